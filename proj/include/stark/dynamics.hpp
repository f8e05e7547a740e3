// Time evolution psi_t = exp(-itH) psi_0 by Chebyshev expansion, one-site
// densities and tail masses.

#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stark/model.hpp"

namespace stark {

struct PropagatorConfig {
    double t_max = 50.0;
    int samples = 200;
    double tolerance = 1e-12;
    std::optional<std::pair<double, double>> spectral_bounds;

    void validate() const;
};

// Gershgorin enclosure of the spectrum, widened by `margin` of its width.
std::pair<double, double> gershgorin_bounds(const SparseMatrix& H, double margin = 0.05);

class ChebyshevPropagator {
public:
    ChebyshevPropagator(const OperatorMatrix& H, std::pair<double, double> bounds, double tolerance);

    // exp(-i t H) psi
    Eigen::VectorXcd apply(const Eigen::VectorXcd& psi, double t) const;
    // Number of terms used by the last apply().
    int last_order() const noexcept { return last_order_; }

private:
    const OperatorMatrix* H_;
    double center_;
    double half_width_;
    double tolerance_;
    mutable int last_order_ = 0;
};

Eigen::VectorXcd evolve(const OperatorMatrix& H, const Eigen::VectorXcd& psi0, double t, const PropagatorConfig& config);

// rho(x) = sum_i sum_{tuples with x_i = x} |psi|^2, stored at index x + L.
std::vector<double> density(const Eigen::Ref<const Eigen::VectorXcd>& psi, const IndexMap& map);

struct DensityTrace {
    std::vector<double> times;
    std::vector<std::vector<double>> densities;  // [sample][x + L]
    std::vector<int> radii;
    std::vector<std::vector<double>> tail;       // [sample][radius index]
    std::vector<double> sup_tail;                // max over samples, per radius
    std::vector<double> sup_tail_refined;        // same on the halved step (empty if not computed)
    double refinement_delta = 0.0;
    double norm_drift = 0.0;
    double energy_drift = 0.0;
    double density_sum_error = 0.0;
    int safety_radius = 0;                       // L - interior_margin
    double safety_tail = 0.0;                    // max over samples of the tail at safety_radius
    bool truncation_unsafe = false;
    bool monotone = false;                       // sup_tail weakly decreasing in r
};

// Position-basis H. psi0 must carry boundary mass <= 1e-10.
DensityTrace tail_trace(const OperatorMatrix& H, const Eigen::VectorXcd& psi0, const PropagatorConfig& config,
                        std::vector<int> radii, bool refine = true);

// |x_1, ..., x_N> as a normalized vector.
Eigen::VectorXcd product_state(const IndexMap& map, const std::vector<int>& sites);
// (1/sqrt norm) sum_pi eta^{sign pi} |x_pi(1), ..., x_pi(N)>.
Eigen::VectorXcd symmetrized_state(const IndexMap& map, const std::vector<int>& sites, int eta);
// CSV with columns flat_index, real, imag; normalized on load.
Eigen::VectorXcd load_state_csv(const std::filesystem::path& path, const IndexMap& map);

}  // namespace stark
