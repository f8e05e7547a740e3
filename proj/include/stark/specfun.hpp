// Integer-order Bessel functions J_n(x) and the kernel bounds
// used throughout the Stark-basis machinery.

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace stark {

inline constexpr double kDefaultHMin = 1e-8;
inline constexpr double kBesselMaxArgument = 1e6;
// Values below this magnitude are flushed to zero.
inline constexpr double kBesselUnderflow = 1e-300;

// The dimensionless ratio x = g/h that parametrizes every Stark-basis vector.
class BesselArgument {
public:
    static BesselArgument from_ratio(double g, double h, double h_min = kDefaultHMin);
    explicit BesselArgument(double x);

    double value() const noexcept { return x_; }

private:
    double x_;
};

// J_n(x) for any integer order n and finite |x| <= 1e6.
// Miller downward recurrence in the oscillatory region, power series where it
// converges fast (|x| <= 0.5, or far past the turning point). Negative orders and
// arguments are reduced to n, x >= 0 by the parity relations.
double bessel_j(long n, double x);

// J_0(x) ... J_{k_max}(x) from a single downward pass.
std::vector<double> bessel_orders(long k_max, double x);

// Entries J_{m-j}(x) for j = j_lo ... j_hi (one downward pass for the whole row).
std::vector<double> bessel_row(long m, long j_lo, long j_hi, double x);

// Smallest k >= |x| with |J_k(x)| < tol; orders beyond it are negligible.
long bessel_support(double x, double tol = 1e-17);

enum class BoundKind { upper_bound, summability, pair_decay, potential_decay };

std::string to_string(BoundKind kind);

struct BoundWitness {
    std::vector<long> index;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct BoundReport {
    BoundKind kind = BoundKind::upper_bound;
    double max_ratio = 0.0;
    std::vector<BoundWitness> witnesses;  // largest ratios first
    // Bounds with existential constants record the smallest feasible ones.
    bool explicit_constant = true;
    std::optional<double> fitted_C;
    std::optional<double> fitted_c;

    bool passed() const;
};

// |J_n(x)| <= (|x|/2)^|n| / |n|!  for |n| <= n_max.
BoundReport check_upper_bound(int n_max, double x);

// sum_{|n| <= tail} |J_n(x)| <= 2 exp(|x|/2) - 1.
BoundReport check_summability(double x, int tail);

// sum_j |J_{n-j}(x) J_{m-j}(x)| over |j - (n+m)/2| <= tail.
double pair_decay_sum(long n, long m, double x, int tail);

// Scans separations d = 0..max_sep and fits the smallest C with
// pair_decay_sum <= C exp(c d) / (d/2)!, c = max(ln|x|, 1).
BoundReport check_pair_decay(int max_sep, double x, int tail);

namespace detail {
// Appends a witness and keeps the list ordered by lhs/rhs, capped at `keep`.
void record_witness(BoundReport& report, BoundWitness w, std::size_t keep = 5);
double witness_ratio(const BoundWitness& w);
}  // namespace detail

}  // namespace stark
