#include "stark/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "stark/parallel.hpp"

namespace stark {

std::vector<Eigen::Index> SpectralResult::interior(double tol) const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < boundary_mass.size(); ++i)
        if (boundary_mass(i) <= tol) out.push_back(i);
    return out;
}

std::vector<double> SpectralResult::interior_eigenvalues(double tol) const {
    std::vector<double> out;
    for (Eigen::Index i : interior(tol)) out.push_back(eigenvalues(i));
    return out;
}

namespace {

void fill_diagnostics(SpectralResult& r, const OperatorMatrix& H) {
    const Eigen::MatrixXd R = H.matrix * r.eigenvectors - r.eigenvectors * r.eigenvalues.asDiagonal();
    r.residual_max = R.cols() ? R.colwise().norm().maxCoeff() : 0.0;
    r.norm_estimate = r.eigenvalues.size() ? r.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    const Eigen::MatrixXd G = r.eigenvectors.transpose() * r.eigenvectors;
    r.gram_deviation = (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
    r.boundary_mass = Eigen::VectorXd::Zero(r.eigenvectors.cols());
    if (r.index_map.size() != static_cast<std::size_t>(r.eigenvectors.rows())) return;
    for (Eigen::Index c = 0; c < r.eigenvectors.cols(); ++c)
        r.boundary_mass(c) = boundary_mass(r.eigenvectors.col(c), r.index_map, r.window.interior_margin);
}

}  // namespace

SpectralResult eigh(const OperatorMatrix& H, std::size_t dense_cap) {
    if (H.dimension() > dense_cap) throw std::length_error("eigh: dimension above the dense cap, use extremal_eigs");
    if (H.asymmetry() > 1e-12) throw std::invalid_argument("eigh: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H.dense());
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: eigensolver failed");
    SpectralResult r;
    r.basis = H.basis;
    r.window = H.window;
    r.index_map = H.index_map;
    r.eigenvalues = solver.eigenvalues();
    r.eigenvectors = solver.eigenvectors();
    fill_diagnostics(r, H);
    return r;
}

std::vector<double> ClusterSpectrum::values() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.value);
    return v;
}

namespace {

std::vector<double> dedup(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || x - out.back() > kClusterDedupTol) out.push_back(x);
    return out;
}

}  // namespace

ClusterSpectrum cluster_spectrum(const ModelParams& params, const Window& window,
                                 const std::map<int, Window>& depth_windows, Basis basis) {
    params.validate();
    if (params.N < 2) throw std::invalid_argument("cluster_spectrum: need N >= 2");
    const auto partitions = enumerate_integer_partitions(params.N);

    std::vector<int> sizes;
    for (const auto& part : partitions)
        for (int p : part)
            if (p < params.N && std::find(sizes.begin(), sizes.end(), p) == sizes.end()) sizes.push_back(p);
    std::sort(sizes.begin(), sizes.end());

    ClusterSpectrum sigma;
    for (int p : sizes) {
        auto it = depth_windows.find(p);
        sigma.windows[p] = it == depth_windows.end() ? window : it->second;
    }

    std::vector<std::vector<double>> spectra(sizes.size());
    parallel_for(sizes.size(), [&](std::size_t s) {
        ModelParams sub = params;
        sub.N = sizes[s];
        const Window w = sigma.windows.at(sizes[s]);
        const SpectralResult r = eigh(build_hamiltonian(sub, w, basis));
        spectra[s] = dedup(r.interior_eigenvalues());
    });
    auto spectrum_of = [&](int p) -> const std::vector<double>& {
        return spectra[static_cast<std::size_t>(std::find(sizes.begin(), sizes.end(), p) - sizes.begin())];
    };

    std::vector<ClusterPoint> all;
    for (const auto& part : partitions) {
        if (part.size() < 2) continue;
        std::vector<double> acc = spectrum_of(part.front());
        for (std::size_t i = 1; i < part.size(); ++i) {
            const auto& next = spectrum_of(part[i]);
            std::vector<double> sum;
            sum.reserve(acc.size() * next.size());
            for (double a : acc)
                for (double b : next) sum.push_back(a + b);
            acc = dedup(std::move(sum));
        }
        for (double v : acc) all.push_back({v, part});
    }
    std::stable_sort(all.begin(), all.end(), [](const ClusterPoint& a, const ClusterPoint& b) { return a.value < b.value; });
    for (auto& p : all)
        if (sigma.points.empty() || p.value - sigma.points.back().value > kClusterDedupTol) sigma.points.push_back(p);
    return sigma;
}

double nearest_distance(double value, const std::vector<double>& sorted) {
    if (sorted.empty()) return std::numeric_limits<double>::infinity();
    auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
    double d = std::numeric_limits<double>::infinity();
    if (it != sorted.end()) d = std::min(d, std::abs(*it - value));
    if (it != sorted.begin()) d = std::min(d, std::abs(*std::prev(it) - value));
    return d;
}

double nearest_distance(double value, const Eigen::VectorXd& sorted) {
    return nearest_distance(value, std::vector<double>(sorted.data(), sorted.data() + sorted.size()));
}

double dist_to_cluster(double lambda, const ClusterSpectrum& sigma) {
    if (sigma.points.empty()) throw std::invalid_argument("dist_to_cluster: empty cluster spectrum");
    return nearest_distance(lambda, sigma.values());
}

PeriodicityReport spectral_periodicity_check(const SpectralResult& result, double shift, double tol) {
    PeriodicityReport rep;
    rep.shift = shift;
    const std::vector<double> inner = result.interior_eigenvalues();
    if (inner.empty()) return rep;
    const double lo = inner.front(), hi = inner.back();
    for (double e : inner) {
        const double target = e + shift;
        if (target < lo || target > hi) continue;
        const double d = nearest_distance(target, result.eigenvalues);
        ++rep.compared;
        if (d > rep.max_distance || rep.compared == 1) {
            rep.max_distance = std::max(rep.max_distance, d);
            if (d >= rep.max_distance) rep.worst_eigenvalue = e;
        }
    }
    rep.passed = rep.compared > 0 && rep.max_distance <= tol;
    return rep;
}

}  // namespace stark
