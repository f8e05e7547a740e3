#include "stark/selftest.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "stark/dynamics.hpp"
#include "stark/io.hpp"
#include "stark/localization.hpp"
#include "stark/model.hpp"
#include "stark/partition.hpp"
#include "stark/resolvent.hpp"
#include "stark/spectra.hpp"

namespace stark {

bool SelftestResult::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    for (const auto& b : bounds)
        if (!b.passed()) return false;
    return true;
}

namespace {

class Suite {
public:
    explicit Suite(SelftestResult& out) : out_(out) {}

    void check(const std::string& module, const std::string& name, const std::function<double()>& deviation, double tol) {
        SelftestCheck c{module, name, false, ""};
        try {
            const double d = deviation();
            c.passed = std::isfinite(d) && d <= tol;
            c.detail = "deviation " + format_double(d) + " (tol " + format_double(tol) + ")";
        } catch (const std::exception& e) {
            c.detail = std::string("exception: ") + e.what();
        }
        out_.checks.push_back(std::move(c));
    }

private:
    SelftestResult& out_;
};

ModelParams desk_params(int N, double g = 1.0) {
    ModelParams p;
    p.g = g;
    p.h = 0.5;
    p.N = N;
    p.potential.kind = PotentialKind::nearest_neighbor;
    p.potential.U = 1.0;
    return p;
}

double matrix_gap(const SparseMatrix& a, const SparseMatrix& b) {
    return Eigen::MatrixXd(a - b).cwiseAbs().maxCoeff();
}

}  // namespace

SelftestResult run_selftest() {
    SelftestResult res;
    Suite s(res);

    s.check("specfun", "J_0(0) = 1", [] { return std::abs(bessel_j(0, 0.0) - 1.0); }, 0.0);
    s.check("specfun", "J_3(0) = 0", [] { return std::abs(bessel_j(3, 0.0)); }, 0.0);
    s.check("specfun", "J_-3(2.5) = -J_3(2.5)", [] { return std::abs(bessel_j(-3, 2.5) + bessel_j(3, 2.5)); }, 0.0);
    s.check("specfun", "row at x = 0 is a unit vector", [] {
        const auto row = bessel_row(0, -2, 2, 0.0);
        const std::vector<double> expect{0, 0, 1, 0, 0};
        double d = 0;
        for (std::size_t i = 0; i < row.size(); ++i) d = std::max(d, std::abs(row[i] - expect[i]));
        return d;
    }, 0.0);
    s.check("specfun", "pair decay sum at x = 0 is 1", [] { return std::abs(pair_decay_sum(3, 3, 0.0, 10) - 1.0); }, 0.0);

    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        res.bounds.push_back(check_upper_bound(40, x));
        const int tail = 2 * static_cast<int>(std::ceil(x)) + 50;
        res.bounds.push_back(check_summability(x, tail));
    }
    res.bounds.push_back(check_pair_decay(12, 1.0, 60));
    {
        BoundReport decay;
        decay.kind = BoundKind::potential_decay;
        const ModelParams p = desk_params(2);
        const long n_big = 1 + 4 * 2 + 40;
        for (long n : {n_big, -n_big}) detail::record_witness(decay, {{n}, interaction_envelope_f(n, p, 60).value, 1e-6});
        res.bounds.push_back(decay);
    }

    s.check("model", "H0 for N = 1, L = 1", [] {
        const OperatorMatrix h = build_h0(desk_params(1), Window{1, 0}, Basis::position);
        Eigen::MatrixXd expect(3, 3);
        expect << 1, -1, 0, -1, 0, -1, 0, -1, -1;
        return (h.dense() - expect).cwiseAbs().maxCoeff();
    }, 0.0);
    s.check("model", "stark H0 diagonal entry at (2,-1)", [] {
        const OperatorMatrix h = build_h0(desk_params(2), Window{3, 0}, Basis::stark);
        const auto i = static_cast<Eigen::Index>(h.index_map.flat({2, -1}));
        return std::abs(h.dense()(i, i) - (-2.0 * 0.5 * 1.0));
    }, 0.0);
    s.check("model", "g = 0 builds coincide", [] {
        const ModelParams p = desk_params(2, 0.0);
        const Window w{4, 1};
        return matrix_gap(build_hamiltonian(p, w, Basis::position).matrix, build_hamiltonian(p, w, Basis::stark).matrix);
    }, 0.0);
    s.check("model", "position interaction at (3,4) is U", [] {
        const OperatorMatrix v = build_interaction(desk_params(2), Window{5, 1}, Basis::position);
        const auto i = static_cast<Eigen::Index>(v.index_map.flat({3, 4}));
        return std::abs(v.dense()(i, i) - 1.0);
    }, 0.0);
    s.check("model", "fermionic projector kills |x,x>", [] {
        const OperatorMatrix P = symmetrizer(2, Window{3, 0}, -1);
        const auto i = static_cast<Eigen::Index>(P.index_map.flat({1, 1}));
        return P.dense().col(i).cwiseAbs().maxCoeff();
    }, 0.0);
    s.check("model", "[P_sym, H] = 0 for bosons", [] {
        const ModelParams p = desk_params(2);
        const Window w{6, 1};
        const Eigen::MatrixXd P = symmetrizer(2, w, 1, Basis::stark).dense();
        const Eigen::MatrixXd H = build_hamiltonian(p, w, Basis::stark).dense();
        return (P * H - H * P).cwiseAbs().maxCoeff();
    }, 1e-12);

    s.check("spectra", "Bell numbers B_1..B_6", [] {
        const int bell[] = {1, 2, 5, 15, 52, 203};
        double d = 0;
        for (int n = 1; n <= 6; ++n) d += std::abs(static_cast<double>(enumerate_set_partitions(n).size()) - bell[n - 1]);
        return d;
    }, 0.0);
    s.check("spectra", "partition numbers p(1)..p(10)", [] {
        const int p[] = {1, 2, 3, 5, 7, 11, 15, 22, 30, 42};
        double d = 0;
        for (int n = 1; n <= 10; ++n) d += std::abs(static_cast<double>(enumerate_integer_partitions(n).size()) - p[n - 1]);
        return d;
    }, 0.0);
    s.check("spectra", "diagonal input gives the sorted diagonal", [] {
        const OperatorMatrix h = build_h0(desk_params(1), Window{4, 0}, Basis::stark);
        const SpectralResult r = eigh(h);
        double d = 0;
        for (int m = -4; m <= 4; ++m) d = std::max(d, std::abs(r.eigenvalues(m + 4) - static_cast<double>(m)));
        return d;
    }, 0.0);

    s.check("localization", "weighted norm at theta = 0", [] {
        const IndexMap map(2, 3);
        Eigen::VectorXd psi = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(map.size())).normalized();
        return std::abs(weighted_norm(psi, map, 0, 0.0) - 1.0);
    }, 1e-14);
    s.check("localization", "weighted norm of |m>", [] {
        const IndexMap map(2, 3);
        Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.size()));
        psi(static_cast<Eigen::Index>(map.flat({-2, 1}))) = 1.0;
        return std::abs(weighted_norm(psi, map, 0, 0.7) - std::exp(0.7 * 2));
    }, 1e-14);
    s.check("localization", "sector profile of |m> is a point mass", [] {
        const IndexMap map(2, 3);
        Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.size()));
        psi(static_cast<Eigen::Index>(map.flat({2, -1}))) = 1.0;
        const ComProfile p = com_profile(psi, map, -1.0, 0.5);
        double d = std::abs(p.entries.at(1) - 1.0);
        for (const auto& [a, v] : p.entries)
            if (a != 1) d += v;
        return d;
    }, 0.0);

    s.check("dynamics", "density of a product state", [] {
        const IndexMap map(2, 6);
        const auto rho = density(product_state(map, {2, 5}), map);
        double d = 0;
        for (int x = -6; x <= 6; ++x) d += std::abs(rho[static_cast<std::size_t>(x + 6)] - ((x == 2 || x == 5) ? 1.0 : 0.0));
        return d;
    }, 0.0);
    s.check("dynamics", "bosonic pair at the origin", [] {
        const IndexMap map(2, 4);
        const auto rho = density(symmetrized_state(map, {0, 0}, 1), map);
        return std::abs(rho[4] - 2.0);
    }, 1e-15);
    s.check("dynamics", "evolution at t = 0", [] {
        const ModelParams p = desk_params(2);
        const Window w{6, 2};
        const OperatorMatrix H = build_hamiltonian(p, w, Basis::position);
        const Eigen::VectorXcd psi = product_state(H.index_map, {0, 1});
        return (evolve(H, psi, 0.0, PropagatorConfig{}) - psi).norm();
    }, 0.0);

    s.check("resolvent", "chain counts for N = 2, 3", [] {
        const double d = std::abs(static_cast<double>(enumerate_chains(2, ChainTerminal::connected_only).size()) - 1) +
                         std::abs(static_cast<double>(enumerate_chains(2, ChainTerminal::disconnected_only).size()) - 1) +
                         std::abs(static_cast<double>(enumerate_chains(3, ChainTerminal::connected_only).size()) - 4) +
                         std::abs(static_cast<double>(enumerate_chains(3, ChainTerminal::disconnected_only).size()) - 4);
        return d;
    }, 0.0);
    s.check("resolvent", "free resolvent is diagonal 1/(z - d)", [] {
        const ModelParams p = desk_params(2);
        const Window w{3, 0};
        const Complex z(0.3, 2.0);
        const ResolventBlock b = cluster_resolvent(ClusterDecomposition::finest(2), z, p, w);
        const OperatorMatrix h0 = build_h0(p, w, Basis::stark);
        ComplexMatrix expect = ComplexMatrix::Zero(b.G.rows(), b.G.cols());
        for (Eigen::Index i = 0; i < expect.rows(); ++i) expect(i, i) = 1.0 / (z - h0.dense()(i, i));
        return (b.G - expect).cwiseAbs().maxCoeff();
    }, 1e-14);
    s.check("resolvent", "zero potential gives I = 0", [] {
        ModelParams p = desk_params(2);
        p.potential.U = 0.0;
        return build_I(Complex(0, 8), p, Window{3, 0}).cwiseAbs().maxCoeff();
    }, 0.0);
    return res;
}

}  // namespace stark
