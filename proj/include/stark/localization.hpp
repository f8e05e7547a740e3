// Eigenvector decay diagnostics: center-of-mass sector profiles, per-coordinate
// exponential weights and shell-wise superexponential rates.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stark/model.hpp"

namespace stark {

inline constexpr double kAmplitudeFloor = 1e-14;

struct ComProfile {
    std::map<long, double> entries;  // a -> ||P_a psi||
    double lambda = 0.0;
    double com_center = 0.0;         // lambda / (-2h)

    double total_mass() const;
};

// Groups |psi(m)|^2 by a = m_1 + ... + m_N.
ComProfile com_profile(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map, double lambda, double h);

struct ComDecayReport {
    double theta = 0.0;
    double fitted_C = 0.0;
    // Least-squares slope of log norm vs |a - com_center| on the outer half of
    // each side; the larger (slower) of the two sides.
    double tail_slope = 0.0;
    double slope_left = 0.0;
    double slope_right = 0.0;
    int points_used = 0;
    bool sufficient = false;
    bool passed = false;
};

// Fit range |a| <= a_max; entries below kAmplitudeFloor are ignored.
ComDecayReport com_decay_check(const ComProfile& profile, double theta, long a_max, double slope_band = 0.05);

// ||W_{i,theta} psi|| with W_{i,theta}|m> = e^{theta |m_i|} |m>; i is zero-based.
double weighted_norm(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map, int i, double theta);

enum class ShellStat { max, l2 };
std::string to_string(ShellStat s);
ShellStat parse_shell_stat(const std::string& s);

struct DecayProbe {
    std::vector<double> theta_list{1.0};
    ShellStat shell_stat = ShellStat::max;
    int r_lo = 6;
    int r_hi = 18;

    void validate() const;
};

struct ShellReport {
    std::vector<int> radii;        // r_lo .. last usable shell
    std::vector<double> amplitude; // s(r)
    std::vector<double> rate;      // rate[k] = log s(r_{k-1}) - log s(r_k); rate[0] is NaN
    double max_drop = 0.0;         // largest decrease of the rate between consecutive shells
    double last_rate = 0.0;
    bool monotone = false;
    bool exceeds_theta = false;
    bool vacuous = false;          // every shell in range underflowed
    bool passed = false;
    // Ratio of max amplitude toward the origin vs away from it, per shell (descriptive only).
    std::vector<double> asymmetry;
};

// Shell statistic over {|psi(m)| : sum |m_i| = r}.
std::vector<double> shell_amplitudes(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map, ShellStat stat);

ShellReport superexp_shell_fit(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map,
                               const DecayProbe& probe, double noise_band = 0.1);

struct PositionDecayReport {
    ShellReport shells;
    ComProfile com_sum;            // profile along sum_i x_i
    ComDecayReport com_decay;
    double transform_norm_loss = 0.0;  // 1 - ||psi_x||^2
};

// Transforms to the position basis with the per-particle Bessel matrices and
// repeats the shell fit and the sum-decay check.
PositionDecayReport position_decay_check(const Eigen::Ref<const Eigen::VectorXd>& psi_stark, const IndexMap& map,
                                         const StarkBasis& basis, const DecayProbe& probe, double lambda, double h,
                                         long a_max);

}  // namespace stark
