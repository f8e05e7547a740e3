#include "stark/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "stark/parallel.hpp"

namespace stark {

std::string to_string(Basis b) { return b == Basis::position ? "position" : "stark"; }

std::string to_string(Statistics s) {
    switch (s) {
        case Statistics::distinguishable: return "distinguishable";
        case Statistics::boson: return "boson";
        case Statistics::fermion: return "fermion";
    }
    return "unknown";
}

std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::nearest_neighbor: return "nearest_neighbor";
        case PotentialKind::exponential: return "exponential";
        case PotentialKind::power_law: return "power_law";
        case PotentialKind::tabulated: return "tabulated";
    }
    return "unknown";
}

Basis parse_basis(const std::string& s) {
    if (s == "position") return Basis::position;
    if (s == "stark") return Basis::stark;
    throw std::invalid_argument("unknown basis '" + s + "'");
}

Statistics parse_statistics(const std::string& s) {
    if (s == "distinguishable") return Statistics::distinguishable;
    if (s == "boson") return Statistics::boson;
    if (s == "fermion") return Statistics::fermion;
    throw std::invalid_argument("unknown statistics '" + s + "'");
}

PotentialKind parse_potential_kind(const std::string& s) {
    if (s == "nearest_neighbor") return PotentialKind::nearest_neighbor;
    if (s == "exponential") return PotentialKind::exponential;
    if (s == "power_law") return PotentialKind::power_law;
    if (s == "tabulated") return PotentialKind::tabulated;
    throw std::invalid_argument("unknown potential kind '" + s + "'");
}

double PairPotential::operator()(long n) const {
    const double an = static_cast<double>(std::labs(n));
    switch (kind) {
        case PotentialKind::nearest_neighbor: return std::labs(n) == 1 ? U : 0.0;
        case PotentialKind::exponential: return U * std::exp(-decay * an);
        case PotentialKind::power_law: return U / std::pow(1.0 + an, decay);
        case PotentialKind::tabulated: {
            auto it = table.find(n);
            return it == table.end() ? 0.0 : it->second;
        }
    }
    return 0.0;
}

double PairPotential::sup_norm() const {
    if (kind != PotentialKind::tabulated) return std::abs(U);
    double m = 0.0;
    for (const auto& [k, v] : table) m = std::max(m, std::abs(v));
    return m;
}

bool PairPotential::symmetric() const {
    if (kind != PotentialKind::tabulated) return true;
    for (const auto& [k, v] : table)
        if ((*this)(-k) != v) return false;
    return true;
}

long PairPotential::range(double tol) const {
    const double a = std::abs(U);
    switch (kind) {
        case PotentialKind::nearest_neighbor: return a < tol ? 0 : 1;
        case PotentialKind::exponential:
            return a < tol ? 0 : static_cast<long>(std::ceil(std::log(a / tol) / decay));
        case PotentialKind::power_law:
            return a < tol ? 0 : std::max(0L, static_cast<long>(std::ceil(std::pow(a / tol, 1.0 / decay))));
        case PotentialKind::tabulated: {
            long r = 0;
            for (const auto& [k, v] : table)
                if (std::abs(v) >= tol) r = std::max(r, std::labs(k));
            return r;
        }
    }
    return 0;
}

void PairPotential::validate() const {
    if (!std::isfinite(U)) throw std::invalid_argument("potential: U must be finite");
    if (kind == PotentialKind::exponential && !(decay > 0.0 && std::isfinite(decay)))
        throw std::invalid_argument("potential: exponential decay rate must be positive");
    if (kind == PotentialKind::power_law && !(decay >= 1.0 && std::isfinite(decay)))
        throw std::invalid_argument("potential: power-law exponent must be >= 1");
    for (const auto& [k, v] : table)
        if (!std::isfinite(v)) throw std::invalid_argument("potential: table values must be finite");
}

void ModelParams::validate() const {
    if (!std::isfinite(g) || !std::isfinite(h)) throw std::invalid_argument("model: g and h must be finite");
    if (std::abs(h) < h_min) throw std::invalid_argument("model: |h| below h_min");
    if (N < 1 || N > n_max) throw std::invalid_argument("model: N must lie in [1, N_max]");
    potential.validate();
    if (statistics != Statistics::distinguishable && !potential.symmetric())
        throw std::invalid_argument("model: identical particles need v(n) = v(-n)");
    (void)ratio();
}

int ModelParams::eta() const {
    switch (statistics) {
        case Statistics::boson: return 1;
        case Statistics::fermion: return -1;
        default: return 0;
    }
}

void Window::validate() const {
    if (L < 0) throw std::invalid_argument("window: L must be >= 0");
    if (interior_margin < 0 || interior_margin > L) throw std::invalid_argument("window: need 0 <= margin <= L");
}

bool window_is_adequate(const ModelParams& params, const Window& window) {
    const int c = static_cast<int>(std::ceil(std::abs(params.g / params.h)));
    return window.L >= 2 * c + 10 && window.interior_margin >= c + 5;
}

void require_adequate_window(const ModelParams& params, const Window& window) {
    window.validate();
    if (!window_is_adequate(params, window))
        throw std::invalid_argument("window: need L >= 2 ceil|g/h| + 10 and margin >= ceil|g/h| + 5");
}

IndexMap::IndexMap(int particles, int L) : n_(particles), L_(L) {
    if (particles < 1) throw std::invalid_argument("IndexMap: need N >= 1");
    if (L < 0) throw std::invalid_argument("IndexMap: need L >= 0");
    const std::size_t s = static_cast<std::size_t>(side());
    strides_.assign(static_cast<std::size_t>(particles), 1);
    size_ = 1;
    for (int i = particles - 1; i >= 0; --i) {
        strides_[static_cast<std::size_t>(i)] = size_;
        if (size_ > (std::size_t{1} << 40) / s) throw std::length_error("IndexMap: dimension overflow");
        size_ *= s;
    }
}

std::size_t IndexMap::flat(const std::vector<int>& tuple) const {
    if (static_cast<int>(tuple.size()) != n_) throw std::invalid_argument("IndexMap: tuple length mismatch");
    std::size_t f = 0;
    for (int i = 0; i < n_; ++i) {
        const int x = tuple[static_cast<std::size_t>(i)];
        if (x < -L_ || x > L_) throw std::out_of_range("IndexMap: coordinate outside window");
        f += static_cast<std::size_t>(x + L_) * strides_[static_cast<std::size_t>(i)];
    }
    return f;
}

std::vector<int> IndexMap::tuple(std::size_t flat) const {
    std::vector<int> t(static_cast<std::size_t>(n_));
    tuple_into(flat, t.data());
    return t;
}

void IndexMap::tuple_into(std::size_t flat, int* out) const {
    const std::size_t s = static_cast<std::size_t>(side());
    for (int i = n_ - 1; i >= 0; --i) {
        out[i] = static_cast<int>(flat % s) - L_;
        flat /= s;
    }
}

bool IndexMap::near_boundary(std::size_t flat, int margin) const {
    const std::size_t s = static_cast<std::size_t>(side());
    for (int i = 0; i < n_; ++i) {
        const int x = static_cast<int>(flat % s) - L_;
        if (std::abs(x) > L_ - margin) return true;
        flat /= s;
    }
    return false;
}

double OperatorMatrix::asymmetry() const {
    const SparseMatrix t = matrix.transpose();
    const SparseMatrix d = matrix - t;
    double m = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

namespace {

template <class Vec>
double boundary_mass_impl(const Vec& psi, const IndexMap& map, int margin) {
    if (static_cast<std::size_t>(psi.size()) != map.size()) throw std::invalid_argument("boundary_mass: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i)
        if (map.near_boundary(i, margin)) m += std::norm(psi(static_cast<Eigen::Index>(i)));
    return m;
}

OperatorMatrix empty_operator(const ModelParams& params, const Window& window, Basis basis) {
    params.validate();
    window.validate();
    OperatorMatrix op;
    op.basis = basis;
    op.window = window;
    op.index_map = IndexMap(params.N, window.L);
    const auto dim = static_cast<Eigen::Index>(op.index_map.size());
    op.matrix.resize(dim, dim);
    return op;
}

void check_nonzeros(std::size_t estimate, std::size_t cap) {
    if (estimate > cap) throw std::length_error("operator exceeds the configured nonzero cap");
}

using Triplets = std::vector<Eigen::Triplet<double>>;

// Runs `fill(row, out)` over all rows in parallel blocks and concatenates in row order.
template <class F>
Triplets assemble_rows(std::size_t rows, F&& fill) {
    const std::size_t block = 4096;
    const std::size_t blocks = (rows + block - 1) / block;
    std::vector<Triplets> parts(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = b * block;
        const std::size_t hi = std::min(rows, lo + block);
        for (std::size_t r = lo; r < hi; ++r) fill(r, parts[b]);
    });
    Triplets all;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    all.reserve(total);
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return all;
}

}  // namespace

double boundary_mass(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map, int margin) {
    return boundary_mass_impl(psi, map, margin);
}

double boundary_mass(const Eigen::Ref<const Eigen::VectorXcd>& psi, const IndexMap& map, int margin) {
    return boundary_mass_impl(psi, map, margin);
}

OperatorMatrix build_h0(const ModelParams& params, const Window& window, Basis basis, std::size_t nonzero_cap) {
    OperatorMatrix op = empty_operator(params, window, basis);
    const IndexMap& map = op.index_map;
    const int n = params.N;
    const bool hopping = basis == Basis::position && params.g != 0.0;
    check_nonzeros(map.size() * (hopping ? 1 + 2 * static_cast<std::size_t>(n) : 1), nonzero_cap);
    Triplets trips = assemble_rows(map.size(), [&](std::size_t r, Triplets& out) {
        std::vector<int> t(static_cast<std::size_t>(n));
        map.tuple_into(r, t.data());
        double diag = 0.0;
        for (int x : t) diag += -2.0 * params.h * x;
        if (diag != 0.0) out.emplace_back(static_cast<int>(r), static_cast<int>(r), diag);
        for (int i = 0; hopping && i < n; ++i) {
            const int xi = t[static_cast<std::size_t>(i)];
            if (xi > -window.L) out.emplace_back(static_cast<int>(r), static_cast<int>(r - map.stride(i)), -params.g);
            if (xi < window.L) out.emplace_back(static_cast<int>(r), static_cast<int>(r + map.stride(i)), -params.g);
        }
    });
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.matrix.makeCompressed();
    return op;
}

double pair_element_stark(long n1, long n2, long m1, long m2, const ModelParams& params, const Window& window) {
    for (long v : {n1, n2, m1, m2})
        if (std::labs(v) > window.L) throw std::out_of_range("pair_element_stark: index outside window");
    const double x = params.ratio();
    const long K = bessel_support(x, 1e-17);
    const long a_lo = std::max(n1, m1) - K, a_hi = std::min(n1, m1) + K;
    const long b_lo = std::max(n2, m2) - K, b_hi = std::min(n2, m2) + K;
    if (a_lo > a_hi || b_lo > b_hi) return 0.0;
    const auto rn1 = bessel_row(n1, a_lo, a_hi, x), rm1 = bessel_row(m1, a_lo, a_hi, x);
    const auto rn2 = bessel_row(n2, b_lo, b_hi, x), rm2 = bessel_row(m2, b_lo, b_hi, x);
    const double cutoff = 1e-16 * params.potential.sup_norm();
    double sum = 0.0;
    for (long j1 = a_lo; j1 <= a_hi; ++j1) {
        const double p1 = rn1[static_cast<std::size_t>(j1 - a_lo)] * rm1[static_cast<std::size_t>(j1 - a_lo)];
        if (p1 == 0.0) continue;
        for (long j2 = b_lo; j2 <= b_hi; ++j2) {
            const double p2 = rn2[static_cast<std::size_t>(j2 - b_lo)] * rm2[static_cast<std::size_t>(j2 - b_lo)];
            if (std::abs(p1 * p2) < cutoff) continue;
            sum += params.potential(j1 - j2) * p1 * p2;
        }
    }
    return sum;
}

Eigen::MatrixXd stark_pair_kernel(const ModelParams& params, const Window& window) {
    const double x = params.ratio();
    const long L = window.L;
    const long n = 2 * L + 1;
    const long K = bessel_support(x, 1e-17);
    const long j_lo = -L - K, j_hi = L + K;
    const long J = j_hi - j_lo + 1;
    Eigen::MatrixXd B(n, J);
    for (long a = 0; a < n; ++a) {
        const auto row = bessel_row(a - L, j_lo, j_hi, x);
        for (long j = 0; j < J; ++j) B(a, j) = row[static_cast<std::size_t>(j)];
    }
    // A[(a,b), j] = B[a,j] B[b,j]
    Eigen::MatrixXd A(n * n, J);
    for (long a = 0; a < n; ++a)
        for (long b = 0; b < n; ++b) A.row(a * n + b) = B.row(a).cwiseProduct(B.row(b));
    Eigen::MatrixXd Vc(J, J);
    for (long p = 0; p < J; ++p)
        for (long q = 0; q < J; ++q) Vc(p, q) = params.potential(p - q);
    // W[(n1,m1),(n2,m2)] = sum_{j1,j2} A[(n1,m1),j1] v(j1-j2) A[(n2,m2),j2]
    const Eigen::MatrixXd W = (A * Vc) * A.transpose();
    Eigen::MatrixXd kernel(n * n, n * n);
    for (long n1 = 0; n1 < n; ++n1)
        for (long m1 = 0; m1 < n; ++m1)
            for (long n2 = 0; n2 < n; ++n2)
                for (long m2 = 0; m2 < n; ++m2) kernel(n1 * n + n2, m1 * n + m2) = W(n1 * n + m1, n2 * n + m2);
    return 0.5 * (kernel + kernel.transpose());
}

std::vector<std::pair<int, int>> all_pairs(int particles) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < particles; ++i)
        for (int j = i + 1; j < particles; ++j) pairs.emplace_back(i, j);
    return pairs;
}

OperatorMatrix build_pair_interaction(const ModelParams& params, const Window& window, Basis basis,
                                      const std::vector<std::pair<int, int>>& pairs, std::size_t nonzero_cap) {
    OperatorMatrix op = empty_operator(params, window, basis);
    const IndexMap& map = op.index_map;
    const int N = params.N;
    for (const auto& [i, j] : pairs)
        if (i < 0 || j < 0 || i >= N || j >= N || i == j) throw std::invalid_argument("pair interaction: bad pair");
    if (pairs.empty()) return op;

    Triplets trips;
    if (basis == Basis::position) {
        check_nonzeros(map.size(), nonzero_cap);
        trips = assemble_rows(map.size(), [&](std::size_t r, Triplets& out) {
            std::vector<int> t(static_cast<std::size_t>(N));
            map.tuple_into(r, t.data());
            double v = 0.0;
            for (const auto& [i, j] : pairs)
                v += params.potential(t[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(j)]);
            if (std::abs(v) >= kStarkDropTolerance) out.emplace_back(static_cast<int>(r), static_cast<int>(r), v);
        });
    } else {
        const Eigen::MatrixXd kernel = stark_pair_kernel(params, window);
        const long n = window.side();
        std::vector<std::vector<std::pair<long, double>>> rows(static_cast<std::size_t>(n * n));
        std::size_t kernel_nnz = 0;
        for (long p = 0; p < n * n; ++p) {
            for (long q = 0; q < n * n; ++q) {
                const double v = kernel(p, q);
                if (std::abs(v) >= kStarkDropTolerance) rows[static_cast<std::size_t>(p)].emplace_back(q, v);
            }
            kernel_nnz += rows[static_cast<std::size_t>(p)].size();
        }
        check_nonzeros(map.size() / static_cast<std::size_t>(n * n) * kernel_nnz * pairs.size(), nonzero_cap);
        trips = assemble_rows(map.size(), [&](std::size_t r, Triplets& out) {
            std::vector<int> t(static_cast<std::size_t>(N));
            map.tuple_into(r, t.data());
            for (const auto& [i, j] : pairs) {
                const long a = t[static_cast<std::size_t>(i)] + window.L;
                const long b = t[static_cast<std::size_t>(j)] + window.L;
                const auto si = static_cast<long>(map.stride(i)), sj = static_cast<long>(map.stride(j));
                for (const auto& [q, v] : rows[static_cast<std::size_t>(a * n + b)]) {
                    const long c = q / n, d = q % n;
                    const long col = static_cast<long>(r) + (c - a) * si + (d - b) * sj;
                    out.emplace_back(static_cast<int>(r), static_cast<int>(col), v);
                }
            }
        });
    }
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.matrix.makeCompressed();
    return op;
}

OperatorMatrix build_interaction(const ModelParams& params, const Window& window, Basis basis, std::size_t nonzero_cap) {
    return build_pair_interaction(params, window, basis, all_pairs(params.N), nonzero_cap);
}

OperatorMatrix build_hamiltonian(const ModelParams& params, const Window& window, Basis basis, std::size_t nonzero_cap) {
    OperatorMatrix h = build_h0(params, window, basis, nonzero_cap);
    const OperatorMatrix v = build_interaction(params, window, basis, nonzero_cap);
    h.matrix = h.matrix + v.matrix;
    h.matrix.makeCompressed();
    return h;
}

OperatorMatrix build_cluster_hamiltonian(const ModelParams& params, const Window& window,
                                         const ClusterDecomposition& decomposition, Basis basis,
                                         std::size_t nonzero_cap) {
    if (decomposition.particle_count() != params.N)
        throw std::invalid_argument("cluster hamiltonian: decomposition does not partition the particles");
    OperatorMatrix h = build_h0(params, window, basis, nonzero_cap);
    const OperatorMatrix v = build_pair_interaction(params, window, basis, decomposition.internal_pairs(), nonzero_cap);
    h.matrix = h.matrix + v.matrix;
    h.matrix.makeCompressed();
    return h;
}

OperatorMatrix symmetrizer(int particles, const Window& window, int eta, Basis basis) {
    if (eta != 1 && eta != -1) throw std::invalid_argument("symmetrizer: eta must be +1 or -1");
    if (particles < 1 || particles > kDefaultNMax) throw std::invalid_argument("symmetrizer: N out of range");
    window.validate();
    OperatorMatrix op;
    op.basis = basis;
    op.window = window;
    op.index_map = IndexMap(particles, window.L);
    const IndexMap& map = op.index_map;

    std::vector<std::vector<int>> perms;
    std::vector<int> signs;
    std::vector<int> p(static_cast<std::size_t>(particles));
    std::iota(p.begin(), p.end(), 0);
    do {
        int inversions = 0;
        for (int a = 0; a < particles; ++a)
            for (int b = a + 1; b < particles; ++b)
                if (p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)]) ++inversions;
        perms.push_back(p);
        signs.push_back(inversions % 2 == 0 ? 1 : eta);
    } while (std::next_permutation(p.begin(), p.end()));
    const double weight = 1.0 / static_cast<double>(perms.size());

    Triplets trips = assemble_rows(map.size(), [&](std::size_t r, Triplets& out) {
        std::vector<int> t(static_cast<std::size_t>(particles)), u(t.size());
        map.tuple_into(r, t.data());
        for (std::size_t k = 0; k < perms.size(); ++k) {
            for (std::size_t i = 0; i < t.size(); ++i) u[i] = t[static_cast<std::size_t>(perms[k][i])];
            out.emplace_back(static_cast<int>(map.flat(u)), static_cast<int>(r), signs[k] * weight);
        }
    });
    const auto dim = static_cast<Eigen::Index>(map.size());
    op.matrix.resize(dim, dim);
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.matrix.prune(0.0);
    op.matrix.makeCompressed();
    return op;
}

EnvelopeValue interaction_envelope_f(long n, const ModelParams& params, int tail) {
    if (tail < 0) throw std::invalid_argument("interaction_envelope_f: negative tail");
    const double x = params.ratio();
    const double vmax = params.potential.sup_norm();
    auto f_at = [&](long m1, long m2) {
        const auto r1 = bessel_row(m1, m1 - tail, m1 + tail, x);
        const auto r2 = bessel_row(m2, m2 - tail, m2 + tail, x);
        const double edge = std::max(std::abs(r1.front()), std::abs(r1.back()));
        if (edge * vmax * std::exp(std::abs(x) / 2.0) * 2.0 >= 1e-14)
            throw std::invalid_argument("interaction_envelope_f: tail too short for 1e-14 truncation");
        double sum = 0.0;
        for (long a = 0; a <= 2L * tail; ++a) {
            const double ja = std::abs(r1[static_cast<std::size_t>(a)]);
            if (ja == 0.0) continue;
            for (long b = 0; b <= 2L * tail; ++b) {
                const long j1 = m1 - tail + a, j2 = m2 - tail + b;
                sum += std::abs(params.potential(j1 - j2)) * ja * std::abs(r2[static_cast<std::size_t>(b)]);
            }
        }
        return sum;
    };
    EnvelopeValue out;
    out.value = f_at(0, -n);
    out.translation_discrepancy = std::abs(out.value - f_at(5, 5 - n));
    return out;
}

StarkBasis StarkBasis::build(const ModelParams& params, int L) {
    StarkBasis basis;
    basis.x = params.ratio();
    basis.L = L;
    const long n = 2L * L + 1;
    basis.xi.resize(n, n);
    for (long m = -L; m <= L; ++m) {
        const auto col = bessel_row(m, -L, L, basis.x);
        for (long j = 0; j < n; ++j) basis.xi(j, m + L) = col[static_cast<std::size_t>(j)];
    }
    return basis;
}

namespace {

template <class Vec>
Vec apply_per_particle_impl(const Eigen::MatrixXd& M, const Vec& psi, const IndexMap& map) {
    using Scalar = typename Vec::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index n = map.side();
    if (M.rows() != n || M.cols() != n) throw std::invalid_argument("apply_per_particle: matrix size mismatch");
    if (static_cast<std::size_t>(psi.size()) != map.size()) throw std::invalid_argument("apply_per_particle: vector size mismatch");
    Vec cur = psi;
    Vec next(psi.size());
    const Mat Mt = M.transpose().template cast<Scalar>();
    for (int axis = 0; axis < map.particles(); ++axis) {
        const auto inner = static_cast<Eigen::Index>(map.stride(axis));
        const Eigen::Index outer = psi.size() / (inner * n);
        for (Eigen::Index o = 0; o < outer; ++o) {
            Eigen::Map<const Mat> in(cur.data() + o * n * inner, inner, n);
            Eigen::Map<Mat> out(next.data() + o * n * inner, inner, n);
            out.noalias() = in * Mt;
        }
        std::swap(cur, next);
    }
    return cur;
}

}  // namespace

Eigen::VectorXcd apply_per_particle(const Eigen::MatrixXd& M, const Eigen::VectorXcd& psi, const IndexMap& map) {
    return apply_per_particle_impl(M, psi, map);
}

Eigen::VectorXd apply_per_particle(const Eigen::MatrixXd& M, const Eigen::VectorXd& psi, const IndexMap& map) {
    return apply_per_particle_impl(M, psi, map);
}

}  // namespace stark
