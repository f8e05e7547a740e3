#include <cmath>
#include <stdexcept>

#include "../oracle/combinatorics_oracle.hpp"
#include "doctest.h"
#include "stark/resolvent.hpp"

using namespace stark;

namespace {

ModelParams params(int N, double g = 1.0, double U = 1.0) {
    ModelParams p;
    p.g = g;
    p.h = 0.5;
    p.N = N;
    p.potential.U = U;
    return p;
}

int count_realizable(const std::vector<DecompositionChain>& cs) {
    int n = 0;
    for (const auto& c : cs) n += c.realizable() ? 1 : 0;
    return n;
}

}  // namespace

TEST_SUITE("resolvent") {

TEST_CASE("chain enumeration") {
    CHECK(enumerate_chains(2, ChainTerminal::connected_only).size() == 1);
    CHECK(enumerate_chains(2, ChainTerminal::disconnected_only).size() == 1);
    for (int n = 2; n <= 4; ++n) {
        const auto [conn, disc] = oracle::chain_counts(n);
        CHECK(static_cast<long>(enumerate_chains(n, ChainTerminal::connected_only).size()) == conn);
        CHECK(static_cast<long>(enumerate_chains(n, ChainTerminal::disconnected_only).size()) == disc);
    }
    const auto c3 = enumerate_chains(3, ChainTerminal::connected_only);
    CHECK(c3.size() == 4);
    CHECK(count_realizable(c3) == 3);
    CHECK(count_realizable(enumerate_chains(3, ChainTerminal::disconnected_only)) == 4);
    for (const auto& c : enumerate_chains(4, ChainTerminal::all)) {
        CHECK(c.sequence.front() == ClusterDecomposition::finest(4));
        for (std::size_t i = 1; i < c.sequence.size(); ++i) CHECK(c.sequence[i - 1].strictly_refines(c.sequence[i]));
    }
    CHECK_THROWS_AS(enumerate_chains(6, ChainTerminal::all), std::invalid_argument);
}

TEST_CASE("coupling pairs") {
    const auto fine = ClusterDecomposition::finest(3);
    const ClusterDecomposition mid({{0, 2}, {1}});
    const auto coarse = ClusterDecomposition::coarsest(3);
    CHECK(coupling_pairs(fine, mid) == std::vector<std::pair<int, int>>{{0, 2}});
    CHECK(coupling_pairs(mid, coarse) == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
    CHECK(coupling_pairs(fine, coarse).size() == 3);
    CHECK_THROWS_AS(coupling_pairs(mid, mid), std::invalid_argument);
    CHECK_THROWS_AS(coupling_pairs(coarse, fine), std::invalid_argument);
}

TEST_CASE("free resolvent in the Stark basis is diagonal") {
    const ModelParams p = params(2);
    const Window w{6, 3};
    const Complex z(0.3, 2.0);
    const ResolventBlock b = cluster_resolvent(ClusterDecomposition::finest(2), z, p, w);
    const IndexMap map(2, 6);
    for (std::size_t f = 0; f < map.size(); ++f) {
        const auto m = map.tuple(f);
        const Complex want = 1.0 / (z + 2.0 * p.h * (m[0] + m[1]));
        const auto i = static_cast<Eigen::Index>(f);
        CHECK(std::abs(b.G(i, i) - want) <= 1e-14);
    }
    CHECK(std::abs(b.G(0, 1)) == 0.0);
    CHECK(b.residual <= 1e-14);
}

TEST_CASE("resolvent norm on the imaginary axis") {
    ResolventProbe probe(Complex(0.0, 8.0), params(2), Window{8, 4});
    CHECK(exact_norm(probe.full().G) <= 1.0 / 8.0 * (1 + 1e-12));
    CHECK(probe.worst_solver_residual() <= 1e-12);
}

TEST_CASE("near singular z is rejected") {
    const ModelParams p = params(2, 0.0);
    CHECK_THROWS_AS(cluster_resolvent(ClusterDecomposition::finest(2), Complex(1.0, 0.0), p, Window{6, 3}), std::domain_error);
}

TEST_CASE("two particles: I = G0 V and D = G0") {
    const ModelParams p = params(2);
    const Window w{8, 4};
    const Complex z(0.5, 3.0);
    ResolventProbe probe(z, p, w);
    const ComplexMatrix G0 = probe.resolvent(ClusterDecomposition::finest(2)).G;
    const Eigen::MatrixXd V = Eigen::MatrixXd(build_interaction(p, w, Basis::stark).matrix);
    CHECK((build_I(probe) - G0 * V.cast<Complex>()).norm() <= 1e-13);
    CHECK((build_D(probe) - G0).norm() == 0.0);
    CHECK_THROWS_AS(build_I(z, params(1), w), std::invalid_argument);
}

TEST_CASE("functional equation") {
    SUBCASE("two particles on the imaginary axis") {
        const auto r = functional_equation_residual(Complex(0.0, 8.0), params(2), Window{8, 4});
        CHECK(r.residual <= 1e-8);
        CHECK(r.connected_chains == 1);
        CHECK(r.disconnected_chains == 1);
    }
    SUBCASE("two particles between lattice points") {
        const auto r = functional_equation_residual(Complex(0.5, 0.5), params(2), Window{8, 4});
        CHECK(r.residual <= 1e-8);
        CHECK(r.norm_G > 0.0);
    }
    SUBCASE("three particles") {
        const auto r = functional_equation_residual(Complex(0.0, 12.0), params(3), Window{4, 2});
        CHECK(r.residual <= 1e-6);
        CHECK(r.connected_chains == 3);
        CHECK(r.disconnected_chains == 4);
    }
}

TEST_CASE("I vanishes without interaction") {
    const ComplexMatrix I = build_I(Complex(0.0, 4.0), params(2, 1.0, 0.0), Window{6, 3});
    CHECK(I.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("I decays along the imaginary axis") {
    const ModelParams p = params(2);
    const Window w{8, 4};
    double prev = std::numeric_limits<double>::infinity();
    for (double y : {2.0, 4.0, 8.0, 16.0}) {
        const double n = exact_norm(build_I(Complex(0.0, y), p, w));
        CHECK(n <= 1.0 / y * (1 + 1e-12));
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("norm estimates") {
    ComplexMatrix A = ComplexMatrix::Zero(3, 3);
    A(0, 0) = 3.0;
    A(1, 1) = Complex(0.0, -2.0);
    A(2, 2) = 1.0;
    CHECK(exact_norm(A) == doctest::Approx(3.0));
    CHECK(power_norm(A, 60) == doctest::Approx(3.0).epsilon(1e-8));
    const ComplexMatrix I = build_I(Complex(0.0, 4.0), params(2), Window{6, 3});
    CHECK(power_norm(I) <= exact_norm(I) * (1 + 1e-12));
    CHECK(power_norm(I) >= 0.9 * exact_norm(I));
}

TEST_CASE("compactness proxy") {
    const ComplexMatrix I = build_I(Complex(0.0, 8.0), params(2, 0.0), Window{8, 4});
    const CompactnessReport r = compactness_proxy(I);
    CHECK(r.passed);
    CHECK(r.k_threshold > 0);
    for (Eigen::Index k = 1; k < r.singular_values.size(); ++k) CHECK(r.singular_values(k) <= r.singular_values(k - 1));
    const CompactnessReport full = compactness_proxy(ComplexMatrix::Identity(10, 10));
    CHECK_FALSE(full.passed);
    CHECK(full.k_threshold == -1);
}

TEST_CASE("fredholm probe away from the real axis") {
    const std::vector<Complex> grid{{0.0, 6.0}, {0.3, 5.0}, {-1.2, 8.0}};
    const FredholmReport r = fredholm_probe(grid, params(2), Window{6, 3});
    CHECK(r.points.size() == 3);
    CHECK(r.flagged == 0);
    CHECK(r.passed);
    for (const auto& pt : r.points) CHECK(pt.proximity > 0.5);
}

}  // TEST_SUITE
