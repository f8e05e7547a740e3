#include <cmath>
#include <complex>
#include <filesystem>
#include <stdexcept>

#include "doctest.h"
#include "stark/dynamics.hpp"
#include "stark/io.hpp"
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

Eigen::VectorXcd dense_evolve(const OperatorMatrix& H, const Eigen::VectorXcd& psi, double t) {
    const SpectralResult r = eigh(H);
    const Eigen::MatrixXcd V = r.eigenvectors.cast<std::complex<double>>();
    Eigen::VectorXcd c = V.adjoint() * psi;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(std::complex<double>(0.0, -t * r.eigenvalues(k)));
    return V * c;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("zero time returns the input") {
    const OperatorMatrix H = build_hamiltonian(params(2), Window{8, 3}, Basis::position);
    const Eigen::VectorXcd psi = product_state(H.index_map, {0, 1});
    const Eigen::VectorXcd out = evolve(H, psi, 0.0, PropagatorConfig{});
    CHECK((out - psi).norm() == 0.0);
}

TEST_CASE("without hopping the evolution is a phase") {
    const OperatorMatrix H = build_hamiltonian(params(2, 0.0), Window{8, 3}, Basis::position);
    const Eigen::VectorXcd psi = product_state(H.index_map, {2, 5});
    const double t = 3.7;
    const Eigen::VectorXcd out = evolve(H, psi, t, PropagatorConfig{});
    const std::complex<double> phase = std::exp(std::complex<double>(0.0, 7.0 * t));
    CHECK((out - phase * psi).norm() <= 1e-11);
}

TEST_CASE("single particle against dense propagation") {
    const OperatorMatrix H = build_hamiltonian(params(1), Window{40, 7}, Basis::position);
    const Eigen::VectorXcd psi = product_state(H.index_map, {0});
    for (double t : {0.5, 10.0}) {
        const Eigen::VectorXcd a = evolve(H, psi, t, PropagatorConfig{});
        const Eigen::VectorXcd b = dense_evolve(H, psi, t);
        CHECK((a - b).norm() <= 1e-9);
    }
}

TEST_CASE("interacting pair against dense propagation") {
    const OperatorMatrix H = build_hamiltonian(params(2), Window{10, 4}, Basis::position);
    const Eigen::VectorXcd psi = symmetrized_state(H.index_map, {0, 1}, 1);
    const Eigen::VectorXcd a = evolve(H, psi, 4.0, PropagatorConfig{});
    CHECK((a - dense_evolve(H, psi, 4.0)).norm() <= 1e-9);
}

TEST_CASE("gershgorin bounds enclose the spectrum") {
    const OperatorMatrix H = build_hamiltonian(params(2), Window{8, 3}, Basis::position);
    const auto [lo, hi] = gershgorin_bounds(H.matrix);
    const SpectralResult r = eigh(H);
    CHECK(lo < r.eigenvalues(0));
    CHECK(hi > r.eigenvalues(r.eigenvalues.size() - 1));
}

TEST_CASE("one-site densities") {
    const IndexMap map(2, 8);
    const auto rho = density(product_state(map, {2, 5}), map);
    REQUIRE(rho.size() == 17);
    for (int x = -8; x <= 8; ++x) {
        const double want = (x == 2 || x == 5) ? 1.0 : 0.0;
        CHECK(rho[static_cast<std::size_t>(x + 8)] == want);
    }
    const auto pair = density(symmetrized_state(map, {0, 0}, 1), map);
    CHECK(pair[8] == doctest::Approx(2.0));
    CHECK_THROWS_AS(symmetrized_state(map, {3, 3}, -1), std::invalid_argument);
    CHECK_THROWS_AS(symmetrized_state(map, {3, 1}, 0), std::invalid_argument);
    const Eigen::VectorXcd f = symmetrized_state(map, {3, 1}, -1);
    CHECK(f(static_cast<Eigen::Index>(map.flat({3, 1}))).real() == doctest::Approx(-f(static_cast<Eigen::Index>(map.flat({1, 3}))).real()));
}

TEST_CASE("tail trace without hopping is frozen") {
    const OperatorMatrix H = build_hamiltonian(params(2, 0.0), Window{10, 4}, Basis::position);
    PropagatorConfig cfg;
    cfg.t_max = 5.0;
    cfg.samples = 10;
    const DensityTrace tr = tail_trace(H, product_state(H.index_map, {0, 1}), cfg, {2, 0, 1});
    CHECK(tr.radii == std::vector<int>{0, 1, 2});
    CHECK(tr.sup_tail == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(tr.refinement_delta == 0.0);
    CHECK(tr.monotone);
    CHECK(tr.times.size() == 11);
    CHECK(tr.safety_radius == 6);
    CHECK_FALSE(tr.truncation_unsafe);
}

TEST_CASE("tail trace on the desk configuration") {
    const OperatorMatrix H = build_hamiltonian(params(2), Window{16, 6}, Basis::position);
    PropagatorConfig cfg;
    cfg.t_max = 8.0;
    cfg.samples = 16;
    const DensityTrace tr = tail_trace(H, product_state(H.index_map, {0, 1}), cfg, {0, 2, 4, 6, 8});
    CHECK(tr.norm_drift <= 1e-10);
    CHECK(tr.energy_drift <= 1e-8);
    CHECK(tr.density_sum_error <= 1e-8);
    CHECK(tr.monotone);
    CHECK_FALSE(tr.truncation_unsafe);
    CHECK(tr.refinement_delta <= 1e-2);
    // Bloch oscillations keep the pair close to its start.
    CHECK(tr.sup_tail.back() < 1e-3);
}

TEST_CASE("input validation") {
    const OperatorMatrix H = build_hamiltonian(params(2), Window{8, 3}, Basis::position);
    const Eigen::VectorXcd psi = product_state(H.index_map, {0, 1});
    CHECK_THROWS_AS(evolve(H, 2.0 * psi, 1.0, PropagatorConfig{}), std::invalid_argument);
    PropagatorConfig bad;
    bad.tolerance = 1e-6;
    CHECK_THROWS_AS(evolve(H, psi, 1.0, bad), std::invalid_argument);
    bad = PropagatorConfig{};
    bad.samples = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = PropagatorConfig{};
    bad.spectral_bounds = std::make_pair(1.0, 1.0);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(tail_trace(H, product_state(H.index_map, {8, 0}), PropagatorConfig{}, {1}), std::invalid_argument);
    const OperatorMatrix S = build_hamiltonian(params(2), Window{8, 3}, Basis::stark);
    CHECK_THROWS_AS(tail_trace(S, psi, PropagatorConfig{}, {1}), std::invalid_argument);

    PropagatorConfig narrow;
    narrow.spectral_bounds = std::make_pair(-0.5, 0.5);
    CHECK_THROWS_AS(evolve(H, psi, 20.0, narrow), std::runtime_error);
}

TEST_CASE("state csv") {
    const IndexMap map(2, 4);
    const auto dir = std::filesystem::temp_directory_path() / "stark_state_csv_test";
    std::filesystem::create_directories(dir);
    CsvWriter w({"flat_index", "real", "imag"});
    w.add(static_cast<long>(map.flat({0, 1}))).add(3.0).add(0.0).end_row();
    w.add(static_cast<long>(map.flat({1, 0}))).add(0.0).add(4.0).end_row();
    write_text_file(dir / "ok.csv", w.str());
    const Eigen::VectorXcd v = load_state_csv(dir / "ok.csv", map);
    CHECK(v.norm() == doctest::Approx(1.0));
    CHECK(v(static_cast<Eigen::Index>(map.flat({1, 0}))).imag() == doctest::Approx(0.8));

    write_text_file(dir / "far.csv", "flat_index,real,imag\n81,1,0\n");
    CHECK_THROWS_AS(load_state_csv(dir / "far.csv", map), std::out_of_range);
    write_text_file(dir / "zero.csv", "flat_index,real,imag\n3,0,0\n");
    CHECK_THROWS_AS(load_state_csv(dir / "zero.csv", map), std::invalid_argument);
    write_text_file(dir / "cols.csv", "index,real,imag\n3,1,0\n");
    CHECK_THROWS_AS(load_state_csv(dir / "cols.csv", map), std::runtime_error);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
