#include "stark/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stark {

double ComProfile::total_mass() const {
    double s = 0.0;
    for (const auto& [a, v] : entries) s += v * v;
    return s;
}

ComProfile com_profile(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map, double lambda, double h) {
    if (static_cast<std::size_t>(psi.size()) != map.size()) throw std::invalid_argument("com_profile: basis size mismatch");
    if (h == 0.0) throw std::invalid_argument("com_profile: h must be nonzero");
    ComProfile p;
    p.lambda = lambda;
    p.com_center = lambda / (-2.0 * h);
    std::vector<int> t(static_cast<std::size_t>(map.particles()));
    std::map<long, double> mass;
    for (std::size_t i = 0; i < map.size(); ++i) {
        map.tuple_into(i, t.data());
        long a = 0;
        for (int x : t) a += x;
        mass[a] += psi(static_cast<Eigen::Index>(i)) * psi(static_cast<Eigen::Index>(i));
    }
    for (const auto& [a, m] : mass) p.entries[a] = std::sqrt(m);
    return p;
}

namespace {

double ls_slope(const std::vector<std::pair<double, double>>& pts) {
    const double n = static_cast<double>(pts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (n * sxy - sx * sy) / den;
}

}  // namespace

ComDecayReport com_decay_check(const ComProfile& profile, double theta, long a_max, double slope_band) {
    if (!(theta > 0.0)) throw std::invalid_argument("com_decay_check: theta must be positive");
    ComDecayReport rep;
    rep.theta = theta;
    std::vector<std::pair<double, double>> left, right;
    for (const auto& [a, norm] : profile.entries) {
        if (std::labs(a) > a_max || norm < kAmplitudeFloor) continue;
        const double d = static_cast<double>(a) - profile.com_center;
        rep.fitted_C = std::max(rep.fitted_C, norm * std::exp(theta * std::abs(d)));
        ++rep.points_used;
        (d < 0 ? left : right).emplace_back(std::abs(d), std::log(norm));
    }
    auto outer_slope = [](std::vector<std::pair<double, double>> side) {
        std::sort(side.begin(), side.end());
        if (side.size() < 4) return std::numeric_limits<double>::quiet_NaN();
        const std::vector<std::pair<double, double>> outer(side.begin() + static_cast<long>(side.size() / 2), side.end());
        return ls_slope(outer);
    };
    rep.slope_left = outer_slope(left);
    rep.slope_right = outer_slope(right);
    rep.sufficient = std::isfinite(rep.slope_left) || std::isfinite(rep.slope_right);
    rep.tail_slope = -std::numeric_limits<double>::infinity();
    for (double s : {rep.slope_left, rep.slope_right})
        if (std::isfinite(s)) rep.tail_slope = std::max(rep.tail_slope, s);
    rep.passed = rep.sufficient && std::isfinite(rep.fitted_C) && rep.tail_slope <= -theta + slope_band;
    return rep;
}

double weighted_norm(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map, int i, double theta) {
    if (theta < 0.0) throw std::invalid_argument("weighted_norm: theta must be >= 0");
    if (i < 0 || i >= map.particles()) throw std::invalid_argument("weighted_norm: coordinate out of range");
    if (static_cast<std::size_t>(psi.size()) != map.size()) throw std::invalid_argument("weighted_norm: size mismatch");
    const std::size_t side = static_cast<std::size_t>(map.side());
    const std::size_t stride = map.stride(i);
    double s = 0.0;
    for (std::size_t f = 0; f < map.size(); ++f) {
        const long m = static_cast<long>((f / stride) % side) - map.L();
        const double w = std::exp(theta * static_cast<double>(std::labs(m)));
        const double v = psi(static_cast<Eigen::Index>(f)) * w;
        s += v * v;
    }
    return std::sqrt(s);
}

std::string to_string(ShellStat s) { return s == ShellStat::max ? "max" : "l2"; }

ShellStat parse_shell_stat(const std::string& s) {
    if (s == "max") return ShellStat::max;
    if (s == "l2") return ShellStat::l2;
    throw std::invalid_argument("unknown shell statistic '" + s + "'");
}

void DecayProbe::validate() const {
    if (theta_list.empty()) throw std::invalid_argument("probe: theta_list must be nonempty");
    for (double t : theta_list)
        if (!(t > 0.0)) throw std::invalid_argument("probe: every theta must be positive");
    if (r_lo < 0 || r_hi <= r_lo) throw std::invalid_argument("probe: need 0 <= r_lo < r_hi");
}

std::vector<double> shell_amplitudes(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map, ShellStat stat) {
    const std::size_t shells = static_cast<std::size_t>(map.particles() * map.L() + 1);
    std::vector<double> s(shells, 0.0);
    std::vector<int> t(static_cast<std::size_t>(map.particles()));
    for (std::size_t f = 0; f < map.size(); ++f) {
        map.tuple_into(f, t.data());
        std::size_t r = 0;
        for (int x : t) r += static_cast<std::size_t>(std::abs(x));
        const double a = std::abs(psi(static_cast<Eigen::Index>(f)));
        if (stat == ShellStat::max) s[r] = std::max(s[r], a);
        else s[r] += a * a;
    }
    if (stat == ShellStat::l2)
        for (double& v : s) v = std::sqrt(v);
    return s;
}

ShellReport superexp_shell_fit(const Eigen::Ref<const Eigen::VectorXd>& psi, const IndexMap& map,
                               const DecayProbe& probe, double noise_band) {
    probe.validate();
    const std::vector<double> s = shell_amplitudes(psi, map, probe.shell_stat);
    ShellReport rep;
    const int r_max = std::min(probe.r_hi, static_cast<int>(s.size()) - 1);
    for (int r = probe.r_lo; r <= r_max; ++r) {
        if (s[static_cast<std::size_t>(r)] < kAmplitudeFloor) break;
        rep.radii.push_back(r);
        rep.amplitude.push_back(s[static_cast<std::size_t>(r)]);
    }
    if (rep.radii.size() < 2) {
        // Amplitudes vanish within the fit range: nothing left to decay.
        rep.vacuous = true;
        rep.monotone = true;
        rep.exceeds_theta = true;
        rep.passed = true;
        return rep;
    }
    rep.rate.push_back(std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 1; k < rep.radii.size(); ++k)
        rep.rate.push_back(std::log(rep.amplitude[k - 1]) - std::log(rep.amplitude[k]));
    for (std::size_t k = 2; k < rep.rate.size(); ++k) rep.max_drop = std::max(rep.max_drop, rep.rate[k - 1] - rep.rate[k]);
    rep.last_rate = rep.rate.back();
    rep.monotone = rep.max_drop <= noise_band;
    const double theta_max = *std::max_element(probe.theta_list.begin(), probe.theta_list.end());
    rep.exceeds_theta = rep.last_rate > theta_max;
    rep.passed = rep.monotone && rep.exceeds_theta;

    // Directional asymmetry: amplitudes with sum m_i < 0 vs > 0 on each shell.
    std::vector<double> inward(s.size(), 0.0), outward(s.size(), 0.0);
    std::vector<int> t(static_cast<std::size_t>(map.particles()));
    for (std::size_t f = 0; f < map.size(); ++f) {
        map.tuple_into(f, t.data());
        std::size_t r = 0;
        long a = 0;
        for (int x : t) {
            r += static_cast<std::size_t>(std::abs(x));
            a += x;
        }
        const double v = std::abs(psi(static_cast<Eigen::Index>(f)));
        (a < 0 ? inward : outward)[r] = std::max((a < 0 ? inward : outward)[r], v);
    }
    for (int r : rep.radii) {
        const double o = outward[static_cast<std::size_t>(r)];
        rep.asymmetry.push_back(o > 0.0 ? inward[static_cast<std::size_t>(r)] / o : std::numeric_limits<double>::infinity());
    }
    return rep;
}

PositionDecayReport position_decay_check(const Eigen::Ref<const Eigen::VectorXd>& psi_stark, const IndexMap& map,
                                         const StarkBasis& basis, const DecayProbe& probe, double lambda, double h,
                                         long a_max) {
    if (basis.L != map.L()) throw std::invalid_argument("position_decay_check: basis window mismatch");
    const Eigen::VectorXd psi_x = apply_per_particle(basis.xi, Eigen::VectorXd(psi_stark), map);
    PositionDecayReport rep;
    rep.transform_norm_loss = psi_stark.squaredNorm() - psi_x.squaredNorm();
    if (std::abs(rep.transform_norm_loss) > 1e-6)
        throw std::runtime_error("position_decay_check: basis transform loses norm, window too small");
    rep.shells = superexp_shell_fit(psi_x, map, probe);
    rep.com_sum = com_profile(psi_x, map, lambda, h);
    rep.com_decay = com_decay_check(rep.com_sum, probe.theta_list.front(), a_max);
    return rep;
}

}  // namespace stark
