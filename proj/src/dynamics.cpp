#include "stark/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include "stark/io.hpp"

namespace stark {

void PropagatorConfig::validate() const {
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("propagator: t_max must be >= 0");
    if (samples < 1) throw std::invalid_argument("propagator: samples must be >= 1");
    if (!(tolerance > 0.0) || tolerance > 1e-10) throw std::invalid_argument("propagator: tolerance must lie in (0, 1e-10]");
    if (spectral_bounds && !(spectral_bounds->first < spectral_bounds->second))
        throw std::invalid_argument("propagator: spectral bounds must be an interval");
}

std::pair<double, double> gershgorin_bounds(const SparseMatrix& H, double margin) {
    const Eigen::Index n = H.rows();
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), radius = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < H.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(H, k); it; ++it) {
            if (it.row() == it.col()) diag(it.row()) += it.value();
            else radius(it.row()) += std::abs(it.value());
        }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 0; i < n; ++i) {
        lo = std::min(lo, diag(i) - radius(i));
        hi = std::max(hi, diag(i) + radius(i));
    }
    if (n == 0) lo = hi = 0.0;
    double width = hi - lo;
    if (width <= 0.0) width = std::max(1.0, std::abs(hi));
    return {lo - margin * width, hi + margin * width};
}

ChebyshevPropagator::ChebyshevPropagator(const OperatorMatrix& H, std::pair<double, double> bounds, double tolerance)
    : H_(&H), center_(0.5 * (bounds.first + bounds.second)), half_width_(0.5 * (bounds.second - bounds.first)),
      tolerance_(tolerance) {
    if (!(half_width_ > 0.0)) throw std::invalid_argument("ChebyshevPropagator: empty spectral interval");
}

Eigen::VectorXcd ChebyshevPropagator::apply(const Eigen::VectorXcd& psi, double t) const {
    if (t == 0.0) {
        last_order_ = 0;
        return psi;
    }
    const double at = half_width_ * t;
    const long k_cap = static_cast<long>(std::ceil(std::abs(at))) + 60 + static_cast<long>(std::ceil(10.0 * std::cbrt(std::abs(at))));
    const std::vector<double> J = bessel_orders(k_cap, at);
    long order = k_cap;
    for (long k = static_cast<long>(std::ceil(std::abs(at))); k + 1 <= k_cap; ++k)
        if (std::abs(J[static_cast<std::size_t>(k)]) < tolerance_ && std::abs(J[static_cast<std::size_t>(k + 1)]) < tolerance_) {
            order = k;
            break;
        }
    const SparseMatrix& A = H_->matrix;
    auto scaled = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
        return (A * v - center_ * v) / half_width_;
    };
    const double norm0 = psi.norm();
    const std::complex<double> minus_i(0.0, -1.0);
    Eigen::VectorXcd t_prev = psi;
    Eigen::VectorXcd result = J[0] * psi;
    if (order >= 1) {
        Eigen::VectorXcd t_cur = scaled(psi);
        std::complex<double> phase = minus_i;
        result += 2.0 * phase * J[1] * t_cur;
        for (long k = 2; k <= order; ++k) {
            Eigen::VectorXcd t_next = 2.0 * scaled(t_cur) - t_prev;
            if (t_next.norm() > norm0 * (1.0 + 1e-6))
                throw std::runtime_error("chebyshev: |T_k(H) psi| grew past |psi|, spectral bounds do not enclose the spectrum");
            phase *= minus_i;
            result += 2.0 * phase * J[static_cast<std::size_t>(k)] * t_next;
            t_prev = std::move(t_cur);
            t_cur = std::move(t_next);
        }
    }
    last_order_ = static_cast<int>(order);
    return std::exp(std::complex<double>(0.0, -center_ * t)) * result;
}

Eigen::VectorXcd evolve(const OperatorMatrix& H, const Eigen::VectorXcd& psi0, double t, const PropagatorConfig& config) {
    config.validate();
    if (static_cast<std::size_t>(psi0.size()) != H.dimension()) throw std::invalid_argument("evolve: size mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("evolve: psi0 must be normalized");
    const auto bounds = config.spectral_bounds ? *config.spectral_bounds : gershgorin_bounds(H.matrix);
    return ChebyshevPropagator(H, bounds, config.tolerance).apply(psi0, t);
}

std::vector<double> density(const Eigen::Ref<const Eigen::VectorXcd>& psi, const IndexMap& map) {
    if (static_cast<std::size_t>(psi.size()) != map.size()) throw std::invalid_argument("density: basis size mismatch");
    std::vector<double> rho(static_cast<std::size_t>(map.side()), 0.0);
    std::vector<int> t(static_cast<std::size_t>(map.particles()));
    for (std::size_t f = 0; f < map.size(); ++f) {
        const double p = std::norm(psi(static_cast<Eigen::Index>(f)));
        if (p == 0.0) continue;
        map.tuple_into(f, t.data());
        for (int x : t) rho[static_cast<std::size_t>(x + map.L())] += p;
    }
    return rho;
}

namespace {

std::vector<double> tails(const std::vector<double>& rho, int L, const std::vector<int>& radii) {
    std::vector<double> out;
    for (int r : radii) {
        double s = 0.0;
        for (int x = -L; x <= L; ++x)
            if (std::abs(x) > r) s += rho[static_cast<std::size_t>(x + L)];
        out.push_back(s);
    }
    return out;
}

std::vector<double> sup_over_samples(const OperatorMatrix& H, const ChebyshevPropagator& prop, Eigen::VectorXcd psi,
                                     double dt, int steps, const std::vector<int>& radii) {
    std::vector<double> sup = tails(density(psi, H.index_map), H.index_map.L(), radii);
    for (int s = 1; s <= steps; ++s) {
        psi = prop.apply(psi, dt);
        const auto tl = tails(density(psi, H.index_map), H.index_map.L(), radii);
        for (std::size_t i = 0; i < sup.size(); ++i) sup[i] = std::max(sup[i], tl[i]);
    }
    return sup;
}

}  // namespace

DensityTrace tail_trace(const OperatorMatrix& H, const Eigen::VectorXcd& psi0, const PropagatorConfig& config,
                        std::vector<int> radii, bool refine) {
    config.validate();
    if (H.basis != Basis::position) throw std::invalid_argument("tail_trace: needs a position-basis operator");
    const IndexMap& map = H.index_map;
    if (static_cast<std::size_t>(psi0.size()) != map.size()) throw std::invalid_argument("tail_trace: size mismatch");
    if (boundary_mass(psi0, map, H.window.interior_margin) > 1e-10)
        throw std::invalid_argument("tail_trace: initial state is not supported in the interior");
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    DensityTrace tr;
    tr.safety_radius = map.L() - H.window.interior_margin;
    tr.radii = radii;
    std::vector<int> all_radii = radii;
    all_radii.push_back(tr.safety_radius);

    const auto bounds = config.spectral_bounds ? *config.spectral_bounds : gershgorin_bounds(H.matrix);
    const ChebyshevPropagator prop(H, bounds, config.tolerance);
    const double dt = config.t_max / config.samples;
    const int N = map.particles();

    auto energy = [&](const Eigen::VectorXcd& v) { return v.dot(H.matrix * v).real(); };
    const double e0 = energy(psi0);
    Eigen::VectorXcd psi = psi0;
    tr.sup_tail.assign(radii.size(), 0.0);
    for (int s = 0; s <= config.samples; ++s) {
        if (s > 0) psi = prop.apply(psi, dt);
        const double t = s * dt;
        const auto rho = density(psi, map);
        const auto tl = tails(rho, map.L(), all_radii);
        tr.times.push_back(t);
        tr.densities.push_back(rho);
        tr.tail.emplace_back(tl.begin(), tl.end() - 1);
        for (std::size_t i = 0; i < radii.size(); ++i) tr.sup_tail[i] = std::max(tr.sup_tail[i], tl[i]);
        tr.safety_tail = std::max(tr.safety_tail, tl.back());
        tr.norm_drift = std::max(tr.norm_drift, std::abs(psi.norm() - 1.0));
        tr.energy_drift = std::max(tr.energy_drift, std::abs(energy(psi) - e0));
        const double total = std::accumulate(rho.begin(), rho.end(), 0.0);
        tr.density_sum_error = std::max(tr.density_sum_error, std::abs(total - N));
    }
    tr.truncation_unsafe = tr.safety_tail > 1e-4;
    tr.monotone = true;
    for (std::size_t i = 1; i < tr.sup_tail.size(); ++i) tr.monotone = tr.monotone && tr.sup_tail[i] <= tr.sup_tail[i - 1];
    if (refine && !radii.empty()) {
        tr.sup_tail_refined = sup_over_samples(H, prop, psi0, dt / 2.0, 2 * config.samples, radii);
        for (std::size_t i = 0; i < radii.size(); ++i)
            tr.refinement_delta = std::max(tr.refinement_delta, std::abs(tr.sup_tail_refined[i] - tr.sup_tail[i]));
    }
    return tr;
}

Eigen::VectorXcd product_state(const IndexMap& map, const std::vector<int>& sites) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(map.size()));
    v(static_cast<Eigen::Index>(map.flat(sites))) = 1.0;
    return v;
}

Eigen::VectorXcd symmetrized_state(const IndexMap& map, const std::vector<int>& sites, int eta) {
    if (eta != 1 && eta != -1) throw std::invalid_argument("symmetrized_state: eta must be +1 or -1");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(map.size()));
    std::vector<int> p(sites.size());
    std::iota(p.begin(), p.end(), 0);
    do {
        int inversions = 0;
        for (std::size_t a = 0; a < p.size(); ++a)
            for (std::size_t b = a + 1; b < p.size(); ++b)
                if (p[a] > p[b]) ++inversions;
        std::vector<int> u(sites.size());
        for (std::size_t i = 0; i < p.size(); ++i) u[i] = sites[static_cast<std::size_t>(p[i])];
        v(static_cast<Eigen::Index>(map.flat(u))) += (inversions % 2 == 0) ? 1.0 : static_cast<double>(eta);
    } while (std::next_permutation(p.begin(), p.end()));
    const double n = v.norm();
    if (n == 0.0) throw std::invalid_argument("symmetrized_state: state vanishes (Pauli exclusion)");
    return v / n;
}

Eigen::VectorXcd load_state_csv(const std::filesystem::path& path, const IndexMap& map) {
    const CsvTable table = parse_csv(read_text_file(path));
    const std::size_t ci = table.column("flat_index"), cr = table.column("real"), cm = table.column("imag");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(map.size()));
    for (const auto& row : table.rows) {
        const long idx = std::stol(row[ci]);
        if (idx < 0 || static_cast<std::size_t>(idx) >= map.size()) throw std::out_of_range("state csv: index outside the basis");
        v(idx) += std::complex<double>(std::stod(row[cr]), std::stod(row[cm]));
    }
    const double n = v.norm();
    if (n == 0.0) throw std::invalid_argument("state csv: zero vector");
    return v / n;
}

}  // namespace stark
