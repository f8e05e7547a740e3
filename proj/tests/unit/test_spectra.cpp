#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "stark/spectra.hpp"

using namespace stark;

namespace {

ModelParams params(int N, double g = 1.0, double h = 0.5, double U = 1.0) {
    ModelParams p;
    p.g = g;
    p.h = h;
    p.N = N;
    p.potential.U = U;
    return p;
}

OperatorMatrix raw(const Eigen::MatrixXd& M) {
    OperatorMatrix op;
    op.index_map = IndexMap(1, static_cast<int>((M.rows() - 1) / 2));
    op.window = Window{op.index_map.L(), 0};
    op.matrix = M.sparseView();
    return op;
}

OperatorMatrix diagonal(const std::vector<double>& d) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
    return raw(M);
}

}  // namespace

TEST_SUITE("spectra") {

TEST_CASE("eigh on small closed forms") {
    const SpectralResult d = eigh(diagonal({3.0, -1.0, 2.0}));
    CHECK(d.eigenvalues(0) == -1.0);
    CHECK(d.eigenvalues(1) == 2.0);
    CHECK(d.eigenvalues(2) == 3.0);

    OperatorMatrix swap;
    swap.index_map = IndexMap(1, 0);
    Eigen::Matrix2d m;
    m << 0, 1, 1, 0;
    swap.matrix = m.sparseView();
    const SpectralResult s = eigh(swap);
    CHECK(s.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
    CHECK(s.gram_deviation <= 1e-15);
}

TEST_CASE("eigh rejects bad input") {
    Eigen::Matrix3d a;
    a << 0, 1, 0, 0, 0, 0, 0, 0, 0;
    CHECK_THROWS_AS(eigh(raw(a)), std::invalid_argument);
    CHECK_THROWS_AS(eigh(diagonal({1, 2, 3}), 2), std::length_error);
}

TEST_CASE("stark ladder, N=1") {
    const ModelParams p = params(1);
    const SpectralResult r = eigh(build_h0(p, Window{40, 7}, Basis::position));
    CHECK(r.residual_max <= 1e-9 * r.norm_estimate);
    CHECK(r.gram_deviation <= 1e-10);
    const auto inner = r.interior_eigenvalues();
    CHECK(inner.size() > 40);
    for (double e : inner) CHECK(std::abs(e - std::round(e)) <= 1e-8);
}

TEST_CASE("basis equivalence, N=2") {
    const ModelParams p = params(2);
    const Window w{14, 7};
    const SpectralResult a = eigh(build_hamiltonian(p, w, Basis::position));
    const SpectralResult b = eigh(build_hamiltonian(p, w, Basis::stark));
    REQUIRE(!b.interior().empty());
    for (double e : b.interior_eigenvalues()) CHECK(nearest_distance(e, a.eigenvalues) <= 1e-8);
}

TEST_CASE("lanczos against dense") {
    const ModelParams p = params(2);
    const OperatorMatrix H = build_hamiltonian(p, Window{12, 5}, Basis::position);
    const SpectralResult dense = eigh(H);
    const Eigen::Index n = dense.eigenvalues.size();
    SUBCASE("lowest") {
        const SpectralResult r = extremal_eigs(H, 6, Which::lowest);
        CHECK(r.converged);
        CHECK(r.residual_max <= 1e-8);
        for (int i = 0; i < 6; ++i) CHECK(std::abs(r.eigenvalues(i) - dense.eigenvalues(i)) <= 1e-8);
    }
    SUBCASE("highest") {
        const SpectralResult r = extremal_eigs(H, 4, Which::highest);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(r.eigenvalues(i) - dense.eigenvalues(n - 4 + i)) <= 1e-8);
    }
    SUBCASE("nearest to a target") {
        const double target = 0.37;
        const SpectralResult r = extremal_eigs(H, 3, Which::nearest, target);
        CHECK(r.residual_max <= 1e-8);
        std::vector<double> d(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = std::abs(dense.eigenvalues(i) - target);
        std::sort(d.begin(), d.end());
        std::vector<double> got;
        for (int i = 0; i < 3; ++i) got.push_back(std::abs(r.eigenvalues(i) - target));
        std::sort(got.begin(), got.end());
        for (int i = 0; i < 3; ++i) CHECK(std::abs(got[static_cast<std::size_t>(i)] - d[static_cast<std::size_t>(i)]) <= 1e-8);
    }
}

TEST_CASE("lanczos on diagonal matrices") {
    const OperatorMatrix D = diagonal({4.0, -2.5, 0.1, 0.35, 7.0, 1.0, -0.2});
    CHECK(extremal_eigs(D, 1, Which::lowest).eigenvalues(0) == doctest::Approx(-2.5));
    CHECK(extremal_eigs(D, 1, Which::nearest, 0.3).eigenvalues(0) == doctest::Approx(0.35));
    CHECK_THROWS_AS(extremal_eigs(D, 0, Which::lowest), std::invalid_argument);
    CHECK_THROWS_AS(extremal_eigs(D, 65, Which::lowest), std::invalid_argument);
}

TEST_CASE("cluster spectrum, N=2 is the integer lattice") {
    for (double g : {0.0, 1.0}) {
        const ClusterSpectrum s = cluster_spectrum(params(2, g), Window{14, 7}, {}, Basis::stark);
        REQUIRE(!s.points.empty());
        for (double v : s.values()) CHECK(std::abs(v - std::round(v)) <= 1e-8);
        for (std::size_t i = 1; i < s.points.size(); ++i) CHECK(s.points[i].value - s.points[i - 1].value == doctest::Approx(1.0));
        CHECK(s.points.front().partition == std::vector<int>{1, 1});
    }
    const ClusterSpectrum s3 = cluster_spectrum(params(2, 1.0, 0.3), Window{16, 9}, {}, Basis::stark);
    for (double v : s3.values()) CHECK(std::abs(v / 0.6 - std::round(v / 0.6)) <= 1e-8);
}

TEST_CASE("cluster spectrum, N=3 without interaction") {
    const ModelParams p = params(3, 1.0, 0.5, 0.0);
    std::map<int, Window> depth{{2, Window{6, 3}}};
    const ClusterSpectrum s = cluster_spectrum(p, Window{8, 4}, depth, Basis::stark);
    CHECK(s.windows.at(1).L == 8);
    CHECK(s.windows.at(2).L == 6);
    for (double v : s.values()) CHECK(std::abs(v - std::round(v)) <= 1e-8);
    CHECK_THROWS_AS(cluster_spectrum(params(1), Window{8, 4}, {}), std::invalid_argument);
}

TEST_CASE("distance to the cluster spectrum") {
    const ClusterSpectrum s = cluster_spectrum(params(2), Window{14, 7}, {}, Basis::stark);
    CHECK(dist_to_cluster(2.0, s) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dist_to_cluster(0.5, s) == doctest::Approx(0.5));
    CHECK_THROWS_AS(dist_to_cluster(0.0, ClusterSpectrum{}), std::invalid_argument);
    CHECK(nearest_distance(0.4, std::vector<double>{-1.0, 0.0, 1.0}) == doctest::Approx(0.4));
}

TEST_CASE("shift periodicity") {
    SUBCASE("free ladder") {
        const SpectralResult r = eigh(build_h0(params(1), Window{20, 7}, Basis::position));
        const PeriodicityReport rep = spectral_periodicity_check(r, 1.0, 1e-6);
        CHECK(rep.passed);
        CHECK(rep.compared > 10);
    }
    SUBCASE("g = 0 is exact") {
        const SpectralResult r = eigh(build_hamiltonian(params(2, 0.0), Window{8, 2}, Basis::stark));
        const PeriodicityReport rep = spectral_periodicity_check(r, 2.0, 1e-6);
        CHECK(rep.passed);
        CHECK(rep.max_distance == 0.0);
    }
    SUBCASE("interacting N=2") {
        const SpectralResult r = eigh(build_hamiltonian(params(2), Window{14, 7}, Basis::stark));
        CHECK(spectral_periodicity_check(r, 2.0, 1e-6).passed);
        CHECK(spectral_periodicity_check(r, -2.0, 1e-6).passed);
        // A wrong shift is detected.
        CHECK_FALSE(spectral_periodicity_check(r, 1.5, 1e-6).passed);
    }
}

}  // TEST_SUITE
