#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "stark/localization.hpp"
#include "stark/spectra.hpp"

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

Eigen::VectorXd basis_vector(const IndexMap& map, const std::vector<int>& m) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.size()));
    v(static_cast<Eigen::Index>(map.flat(m))) = 1.0;
    return v;
}

}  // namespace

TEST_SUITE("localization") {

TEST_CASE("profile of a basis vector") {
    const IndexMap map(2, 6);
    const Eigen::VectorXd v = basis_vector(map, {2, -5});
    const ComProfile prof = com_profile(v, map, 3.0, 0.5);
    CHECK(prof.entries.at(-3) == 1.0);
    CHECK(prof.com_center == -3.0);
    CHECK(prof.total_mass() == 1.0);
    for (const auto& [a, n] : prof.entries)
        if (a != -3) CHECK(n == 0.0);
    CHECK_THROWS_AS(com_profile(Eigen::VectorXd::Zero(3), map, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("point mass passes the decay check for every theta") {
    const IndexMap map(2, 6);
    const ComProfile prof = com_profile(basis_vector(map, {1, 1}), map, -2.0, 0.5);
    for (double theta : {0.5, 1.0, 5.0}) {
        const ComDecayReport r = com_decay_check(prof, theta, 10);
        CHECK(r.fitted_C == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(com_decay_check(prof, 0.0, 10), std::invalid_argument);
}

TEST_CASE("synthetic exponential profile") {
    ComProfile prof;
    prof.com_center = 0.0;
    for (long a = -12; a <= 12; ++a) prof.entries[a] = std::exp(-1.5 * std::abs(a));
    const ComDecayReport r = com_decay_check(prof, 1.0, 12);
    CHECK(r.passed);
    CHECK(r.tail_slope == doctest::Approx(-1.5));
    const ComDecayReport slow = com_decay_check(prof, 2.0, 12);
    CHECK_FALSE(slow.passed);
}

TEST_CASE("sector Parseval and the profile peak for the desk config") {
    const ModelParams p = params(2);
    const SpectralResult r = eigh(build_hamiltonian(p, Window{14, 7}, Basis::stark));
    for (Eigen::Index c : r.interior()) {
        const ComProfile prof = com_profile(r.eigenvectors.col(c), r.index_map, r.eigenvalues(c), p.h);
        CHECK(std::abs(prof.total_mass() - 1.0) <= 1e-10);
        long peak = 0;
        double best = -1.0;
        for (const auto& [a, n] : prof.entries)
            if (n > best) {
                best = n;
                peak = a;
            }
        CHECK(std::abs(peak - std::lround(prof.com_center)) <= 2);
    }
}

TEST_CASE("sector index equals com_center without interaction") {
    const ModelParams p = params(2, 1.0, 0.0);
    const SpectralResult r = eigh(build_hamiltonian(p, Window{10, 5}, Basis::stark));
    for (Eigen::Index c : r.interior()) {
        const ComProfile prof = com_profile(r.eigenvectors.col(c), r.index_map, r.eigenvalues(c), p.h);
        for (const auto& [a, n] : prof.entries)
            if (n > 0.5) CHECK(std::abs(a - prof.com_center) <= 1e-10);
    }
}

TEST_CASE("weighted norm") {
    const IndexMap map(2, 6);
    const Eigen::VectorXd v = basis_vector(map, {-3, 2});
    CHECK(weighted_norm(v, map, 0, 1.0) == doctest::Approx(std::exp(3.0)));
    CHECK(weighted_norm(v, map, 1, 0.5) == doctest::Approx(std::exp(1.0)));
    Eigen::VectorXd u = Eigen::VectorXd::Random(static_cast<Eigen::Index>(map.size())).normalized();
    CHECK(weighted_norm(u, map, 1, 0.0) == doctest::Approx(1.0));
    double prev = 0.0;
    for (double theta : {0.0, 0.1, 0.5, 1.0, 2.0}) {
        const double w = weighted_norm(u, map, 0, theta);
        CHECK(w >= prev);
        prev = w;
    }
    CHECK_THROWS_AS(weighted_norm(v, map, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(weighted_norm(v, map, 0, -1.0), std::invalid_argument);
}

TEST_CASE("shell fit on a single Stark state") {
    // N=1: amplitudes |J_{m-j}(2)| decay factorially, so the local rate keeps growing.
    const ModelParams p = params(1);
    const StarkBasis sb = StarkBasis::build(p, 30);
    const IndexMap map(1, 30);
    const Eigen::VectorXd psi = sb.xi.col(30);
    DecayProbe probe;
    probe.r_lo = 4;
    probe.r_hi = 20;
    const ShellReport r = superexp_shell_fit(psi, map, probe);
    CHECK(r.monotone);
    CHECK(r.exceeds_theta);
    CHECK(r.passed);
    CHECK(r.last_rate > 2.0);
    CHECK(std::isnan(r.rate[0]));
}

TEST_CASE("shell fit is vacuous for a point mass") {
    const IndexMap map(2, 8);
    DecayProbe probe;
    probe.r_lo = 3;
    probe.r_hi = 10;
    const ShellReport r = superexp_shell_fit(basis_vector(map, {0, 1}), map, probe);
    CHECK(r.vacuous);
    CHECK(r.passed);
}

TEST_CASE("shell amplitudes") {
    const IndexMap map(2, 3);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.size()));
    v(static_cast<Eigen::Index>(map.flat({1, 1}))) = 0.6;
    v(static_cast<Eigen::Index>(map.flat({-2, 0}))) = 0.8;
    const auto smax = shell_amplitudes(v, map, ShellStat::max);
    const auto sl2 = shell_amplitudes(v, map, ShellStat::l2);
    CHECK(smax[2] == doctest::Approx(0.8));
    CHECK(sl2[2] == doctest::Approx(1.0));
    CHECK(smax[0] == 0.0);
    CHECK(parse_shell_stat("l2") == ShellStat::l2);
    CHECK_THROWS_AS(parse_shell_stat("median"), std::invalid_argument);
}

TEST_CASE("probe validation") {
    DecayProbe p;
    CHECK_NOTHROW(p.validate());
    p.theta_list = {};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.theta_list = {1.0, -0.5};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.theta_list = {1.0};
    p.r_hi = p.r_lo;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("position-basis transform") {
    SUBCASE("g = 0 is the identity") {
        const ModelParams p = params(2, 0.0);
        const IndexMap map(2, 8);
        const StarkBasis sb = StarkBasis::build(p, 8);
        const Eigen::VectorXd v = basis_vector(map, {1, -2});
        DecayProbe probe;
        probe.r_lo = 1;
        probe.r_hi = 6;
        const PositionDecayReport r = position_decay_check(v, map, sb, probe, 1.0, p.h, 10);
        CHECK(r.transform_norm_loss == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(r.com_sum.entries.at(-1) == 1.0);
    }
    SUBCASE("N=1 column is a row of Bessel values") {
        const ModelParams p = params(1);
        const IndexMap map(1, 30);
        const StarkBasis sb = StarkBasis::build(p, 30);
        const Eigen::VectorXd x = apply_per_particle(sb.xi, basis_vector(map, {2}), map);
        const auto row = bessel_row(2, -30, 30, 2.0);
        for (int j = 0; j < 61; ++j) CHECK(std::abs(x(j) - row[static_cast<std::size_t>(j)]) <= 1e-14);
    }
    SUBCASE("window too small") {
        const ModelParams p = params(2);
        const IndexMap map(2, 3);
        const StarkBasis sb = StarkBasis::build(p, 3);
        CHECK_THROWS_AS(position_decay_check(basis_vector(map, {3, 3}), map, sb, DecayProbe{}, 0.0, p.h, 4),
                        std::runtime_error);
    }
}

}  // TEST_SUITE
