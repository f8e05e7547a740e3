#include "stark/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "stark/parallel.hpp"
#include "stark/spectra.hpp"

namespace stark {

bool DecompositionChain::realizable() const {
    for (std::size_t i = 1; i < sequence.size(); ++i)
        if (sequence[i - 1].block_count() - sequence[i].block_count() != 1) return false;
    return true;
}

std::string DecompositionChain::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        if (i) s += " -> ";
        s += sequence[i].to_string();
    }
    return s;
}

namespace {

void extend(const std::vector<ClusterDecomposition>& partitions, std::vector<ClusterDecomposition>& prefix,
            std::vector<DecompositionChain>& out) {
    out.push_back({prefix});
    for (const auto& next : partitions) {
        if (!prefix.back().strictly_refines(next)) continue;
        prefix.push_back(next);
        extend(partitions, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<DecompositionChain> enumerate_chains(int n, ChainTerminal terminal) {
    if (n < 1 || n > 5) throw std::invalid_argument("enumerate_chains: need 1 <= N <= 5");
    const auto partitions = enumerate_set_partitions(n);
    std::vector<ClusterDecomposition> prefix{ClusterDecomposition::finest(n)};
    std::vector<DecompositionChain> all;
    extend(partitions, prefix, all);
    std::vector<DecompositionChain> out;
    for (auto& c : all) {
        const bool connected = c.k_S() == 1;
        if (terminal == ChainTerminal::all || (terminal == ChainTerminal::connected_only) == connected)
            out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::pair<int, int>> coupling_pairs(const ClusterDecomposition& fine, const ClusterDecomposition& coarse) {
    if (!fine.strictly_refines(coarse)) throw std::invalid_argument("coupling: decompositions are not strictly comparable");
    std::vector<std::pair<int, int>> pairs;
    for (const auto& [i, j] : coarse.internal_pairs())
        if (!fine.same_cluster(i, j)) pairs.emplace_back(i, j);
    return pairs;
}

OperatorMatrix inter_cluster_coupling(const ClusterDecomposition& fine, const ClusterDecomposition& coarse,
                                      const ModelParams& params, const Window& window, Basis basis) {
    if (fine.particle_count() != params.N) throw std::invalid_argument("coupling: decomposition size mismatch");
    return build_pair_interaction(params, window, basis, coupling_pairs(fine, coarse));
}

ResolventBlock cluster_resolvent(const ClusterDecomposition& D, Complex z, const ModelParams& params,
                                 const Window& window, Basis basis) {
    const OperatorMatrix H = build_cluster_hamiltonian(params, window, D, basis);
    const auto n = static_cast<Eigen::Index>(H.dimension());
    const Eigen::MatrixXd Hd = H.dense();
    ComplexMatrix A = -Hd.cast<Complex>();
    A.diagonal().array() += z;
    Eigen::PartialPivLU<ComplexMatrix> lu(A);
    ResolventBlock block;
    block.rcond = lu.rcond();
    // The estimator is meaningless once a pivot is exactly zero.
    if (n > 0 && lu.matrixLU().diagonal().cwiseAbs().minCoeff() == 0.0) block.rcond = 0.0;
    if (!(block.rcond > 1e-12)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hd, Eigen::EigenvaluesOnly);
        double d = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) d = std::min(d, std::abs(z - es.eigenvalues()(i)));
        throw std::domain_error("cluster_resolvent: z - H_" + D.to_string() + " is near singular (distance to spectrum " +
                                std::to_string(d) + ")");
    }
    block.G = lu.inverse();
    const ComplexMatrix R = A * block.G - ComplexMatrix::Identity(n, n);
    block.residual = R.cwiseAbs().maxCoeff();
    return block;
}

ResolventProbe::ResolventProbe(Complex z, ModelParams params, Window window, Basis basis)
    : z_(z), params_(std::move(params)), window_(window), basis_(basis) {
    params_.validate();
    window_.validate();
}

const ResolventBlock& ResolventProbe::resolvent(const ClusterDecomposition& D) {
    const std::string key = D.to_string();
    auto it = resolvents_.find(key);
    if (it == resolvents_.end()) it = resolvents_.emplace(key, cluster_resolvent(D, z_, params_, window_, basis_)).first;
    return it->second;
}

const SparseMatrix& ResolventProbe::coupling(const ClusterDecomposition& fine, const ClusterDecomposition& coarse) {
    const std::string key = fine.to_string() + ">" + coarse.to_string();
    auto it = couplings_.find(key);
    if (it == couplings_.end())
        it = couplings_.emplace(key, inter_cluster_coupling(fine, coarse, params_, window_, basis_).matrix).first;
    return it->second;
}

const ResolventBlock& ResolventProbe::full() { return resolvent(ClusterDecomposition::coarsest(params_.N)); }

double ResolventProbe::worst_solver_residual() const {
    double r = 0.0;
    for (const auto& [k, b] : resolvents_) r = std::max(r, b.residual);
    return r;
}

ComplexMatrix ResolventProbe::chain_product(const DecompositionChain& chain, bool trailing) {
    const auto& seq = chain.sequence;
    ComplexMatrix M = resolvent(seq.front()).G;
    for (std::size_t i = 1; i < seq.size(); ++i) {
        const SparseMatrix& Vr = coupling(seq[i - 1], seq[i]);
        ComplexMatrix MV;
        // Stark-basis couplings are nearly dense; a dense product is much faster then.
        if (Vr.nonZeros() > Vr.rows() * Vr.cols() / 20) MV = M * Eigen::MatrixXd(Vr).cast<Complex>();
        else MV = M * Eigen::SparseMatrix<Complex>(Vr.cast<Complex>());
        if (i + 1 < seq.size() || trailing) M = MV * resolvent(seq[i]).G;
        else M = std::move(MV);
    }
    return M;
}

ComplexMatrix build_I(ResolventProbe& probe) {
    const int N = probe.params().N;
    if (N < 2) throw std::invalid_argument("build_I: need N >= 2");
    const auto dim = static_cast<Eigen::Index>(IndexMap(N, probe.window().L).size());
    ComplexMatrix I = ComplexMatrix::Zero(dim, dim);
    for (const auto& chain : enumerate_chains(N, ChainTerminal::connected_only))
        if (chain.realizable()) I += probe.chain_product(chain, false);
    return I;
}

ComplexMatrix build_D(ResolventProbe& probe) {
    const int N = probe.params().N;
    if (N < 2) throw std::invalid_argument("build_D: need N >= 2");
    const auto dim = static_cast<Eigen::Index>(IndexMap(N, probe.window().L).size());
    ComplexMatrix D = ComplexMatrix::Zero(dim, dim);
    for (const auto& chain : enumerate_chains(N, ChainTerminal::disconnected_only))
        if (chain.realizable()) D += probe.chain_product(chain, true);
    return D;
}

ComplexMatrix build_I(Complex z, const ModelParams& params, const Window& window) {
    ResolventProbe probe(z, params, window);
    return build_I(probe);
}

ComplexMatrix build_D(Complex z, const ModelParams& params, const Window& window) {
    ResolventProbe probe(z, params, window);
    return build_D(probe);
}

double power_norm(const ComplexMatrix& A, int steps) {
    if (A.size() == 0) return 0.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(A.cols()) / std::sqrt(static_cast<double>(A.cols()));
    for (int s = 0; s < steps; ++s) {
        const Eigen::VectorXcd w = A.adjoint() * (A * v);
        const double n = w.norm();
        if (n == 0.0) return 0.0;
        v = w / n;
    }
    return (A * v).norm();
}

double exact_norm(const ComplexMatrix& A) {
    if (A.size() == 0) return 0.0;
    Eigen::BDCSVD<ComplexMatrix> svd(A);
    return svd.singularValues()(0);
}

FunctionalEquationReport functional_equation_residual(Complex z, const ModelParams& params, const Window& window) {
    ResolventProbe probe(z, params, window);
    FunctionalEquationReport rep;
    rep.z = z;
    const ComplexMatrix I = build_I(probe);
    const ComplexMatrix D = build_D(probe);
    const ComplexMatrix& G = probe.full().G;
    const ComplexMatrix R = G - D - I * G;
    rep.residual = power_norm(R);
    rep.norm_I = power_norm(I);
    rep.norm_D = power_norm(D);
    rep.norm_G = power_norm(G);
    rep.solver_residual = probe.worst_solver_residual();
    for (const auto& c : enumerate_chains(params.N, ChainTerminal::all)) {
        if (!c.realizable()) continue;
        (c.k_S() == 1 ? rep.connected_chains : rep.disconnected_chains) += 1;
    }
    return rep;
}

CompactnessReport compactness_proxy(const ComplexMatrix& I, double ratio) {
    CompactnessReport rep;
    rep.ratio = ratio;
    if (I.size() == 0) return rep;
    Eigen::BDCSVD<ComplexMatrix> svd(I);
    rep.singular_values = svd.singularValues();
    const double s1 = rep.singular_values(0);
    for (Eigen::Index k = 0; k < rep.singular_values.size(); ++k)
        if (rep.singular_values(k) <= ratio * s1) {
            rep.k_threshold = k + 1;
            break;
        }
    rep.passed = rep.k_threshold > 0 && rep.k_threshold < I.rows() / 2;
    return rep;
}

FredholmReport fredholm_probe(const std::vector<Complex>& z_grid, const ModelParams& params, const Window& window,
                              double threshold, double match_tol) {
    const SpectralResult spectrum = eigh(build_hamiltonian(params, window, Basis::stark));
    FredholmReport rep;
    rep.points.resize(z_grid.size());
    parallel_for(z_grid.size(), [&](std::size_t i) {
        FredholmPoint& p = rep.points[i];
        p.z = z_grid[i];
        const ComplexMatrix I = build_I(p.z, params, window);
        Eigen::ComplexEigenSolver<ComplexMatrix> es(I, false);
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            const double d = std::abs(es.eigenvalues()(k) - 1.0);
            if (d < best) {
                best = d;
                p.nearest_to_one = es.eigenvalues()(k);
            }
        }
        p.proximity = best;
        p.flagged = best < threshold;
        const double x = p.z.real();
        p.distance_to_h = nearest_distance(x, spectrum.eigenvalues);
        auto it = std::lower_bound(spectrum.eigenvalues.data(), spectrum.eigenvalues.data() + spectrum.eigenvalues.size(), x);
        const double* lo = spectrum.eigenvalues.data();
        const double* hi = lo + spectrum.eigenvalues.size();
        double nearest = it == hi ? *(it - 1) : *it;
        if (it != lo && it != hi && std::abs(*(it - 1) - x) < std::abs(*it - x)) nearest = *(it - 1);
        p.nearest_h_eigenvalue = nearest;
        const bool real_z = std::abs(p.z.imag()) < 1e-12;
        p.consistent = !(p.flagged && real_z) || p.distance_to_h <= match_tol;
    });
    for (const auto& p : rep.points) {
        rep.flagged += p.flagged ? 1 : 0;
        rep.passed = rep.passed && p.consistent;
    }
    return rep;
}

}  // namespace stark
