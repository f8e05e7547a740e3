#include "stark/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace stark {

namespace {

constexpr double kRescaleAbove = 1e250;
constexpr double kRescaleFactor = 1e-250;

double flush(double v) { return std::abs(v) < kBesselUnderflow ? 0.0 : v; }

void require_finite(double x) {
    if (!std::isfinite(x)) throw std::domain_error("bessel: non-finite argument");
    if (std::abs(x) > kBesselMaxArgument) throw std::domain_error("bessel: |x| exceeds 1e6");
}

// log of the upper bound (x/2)^n / n!, x > 0, n >= 0.
double log_upper_bound(long n, double ax) {
    return static_cast<double>(n) * std::log(ax / 2.0) - std::lgamma(static_cast<double>(n) + 1.0);
}

bool underflows(long n, double ax) {
    return n > 0 && log_upper_bound(n, ax) < std::log(kBesselUnderflow) - 5.0;
}

long miller_start(long k_hi, double ax) {
    return k_hi + static_cast<long>(std::ceil(ax)) + 30 +
           static_cast<long>(std::ceil(10.0 * std::cbrt(ax)));
}

// Downward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalized by
// J_0 + 2 sum_{k>=1} J_{2k} = 1. Stores orders k_lo..k_hi.
std::vector<double> miller(long k_lo, long k_hi, double ax) {
    const long start = miller_start(k_hi, ax);
    std::vector<double> out(static_cast<std::size_t>(k_hi - k_lo + 1), 0.0);
    double next = 0.0;
    double cur = 1e-30;
    double norm = (start % 2 == 0) ? 2.0 * cur : 0.0;
    for (long k = start; k >= 1; --k) {
        const double prev = (2.0 * static_cast<double>(k) / ax) * cur - next;
        next = cur;
        cur = prev;
        const long order = k - 1;
        if (order >= k_lo && order <= k_hi) out[static_cast<std::size_t>(order - k_lo)] = cur;
        if (order % 2 == 0) norm += (order == 0) ? cur : 2.0 * cur;
        if (std::abs(cur) > kRescaleAbove) {
            cur *= kRescaleFactor;
            next *= kRescaleFactor;
            norm *= kRescaleFactor;
            const long lo = std::max(order, k_lo);
            for (long i = lo; i <= k_hi; ++i) out[static_cast<std::size_t>(i - k_lo)] *= kRescaleFactor;
        }
    }
    for (double& v : out) v = flush(v / norm);
    return out;
}

// Power series, used where consecutive terms decrease from the first one on.
double series(long n, double ax) {
    const double half = ax / 2.0;
    double prefactor;
    if (n <= 150) {
        prefactor = 1.0;
        for (long i = 1; i <= n; ++i) prefactor *= half / static_cast<double>(i);
    } else {
        prefactor = std::exp(log_upper_bound(n, ax));
    }
    const double q = half * half;
    double term = 1.0;
    double sum = 1.0;
    for (long k = 1; k < 1000; ++k) {
        term *= -q / (static_cast<double>(k) * static_cast<double>(k + n));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return flush(prefactor * sum);
}

bool use_series(long n, double ax) {
    if (ax <= 0.5) return true;
    const double dn = static_cast<double>(n);
    return dn >= 3.0 * ax + 60.0 && ax * ax / 4.0 <= dn + 1.0;
}

// J_n(ax) for n >= 0, ax >= 0.
double bessel_nonneg(long n, double ax) {
    if (ax == 0.0) return n == 0 ? 1.0 : 0.0;
    if (underflows(n, ax)) return 0.0;
    if (use_series(n, ax)) return series(n, ax);
    return miller(n, n, ax).front();
}

double parity_sign(long k) { return (std::labs(k) % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

BesselArgument BesselArgument::from_ratio(double g, double h, double h_min) {
    if (!std::isfinite(g) || !std::isfinite(h)) throw std::invalid_argument("BesselArgument: non-finite g or h");
    if (std::abs(h) < h_min) throw std::invalid_argument("BesselArgument: |h| below h_min");
    return BesselArgument(g / h);
}

BesselArgument::BesselArgument(double x) : x_(x) { require_finite(x); }

double bessel_j(long n, double x) {
    require_finite(x);
    const long an = std::labs(n);
    double value = bessel_nonneg(an, std::abs(x));
    if (n < 0) value *= parity_sign(an);
    if (x < 0.0) value *= parity_sign(an);
    return value;
}

std::vector<double> bessel_orders(long k_max, double x) {
    require_finite(x);
    if (k_max < 0) throw std::invalid_argument("bessel_orders: negative k_max");
    const double ax = std::abs(x);
    std::vector<double> out(static_cast<std::size_t>(k_max + 1), 0.0);
    if (ax == 0.0) {
        out[0] = 1.0;
        return out;
    }
    out = miller(0, k_max, ax);
    if (x < 0.0) {
        for (long k = 1; k <= k_max; k += 2) out[static_cast<std::size_t>(k)] = -out[static_cast<std::size_t>(k)];
    }
    return out;
}

std::vector<double> bessel_row(long m, long j_lo, long j_hi, double x) {
    if (j_lo > j_hi) throw std::invalid_argument("bessel_row: j_lo > j_hi");
    const long k_max = std::max(std::labs(m - j_lo), std::labs(m - j_hi));
    const std::vector<double> orders = bessel_orders(k_max, x);
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(j_hi - j_lo + 1));
    for (long j = j_lo; j <= j_hi; ++j) {
        const long k = m - j;
        const double v = orders[static_cast<std::size_t>(std::labs(k))];
        row.push_back(k < 0 ? parity_sign(k) * v : v);
    }
    return row;
}

long bessel_support(double x, double tol) {
    require_finite(x);
    const double ax = std::abs(x);
    if (ax == 0.0) return 1;
    // The upper bound (x/2)^k/k! certifies a safe scan limit.
    long guess = static_cast<long>(std::ceil(ax));
    while (log_upper_bound(guess, ax) >= std::log(tol)) ++guess;
    const std::vector<double> orders = bessel_orders(guess, ax);
    long k = guess;
    while (k > static_cast<long>(std::ceil(ax)) && std::abs(orders[static_cast<std::size_t>(k - 1)]) < tol) --k;
    return k;
}

std::string to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::upper_bound: return "upper_bound";
        case BoundKind::summability: return "summability";
        case BoundKind::pair_decay: return "pair_decay";
        case BoundKind::potential_decay: return "potential_decay";
    }
    return "unknown";
}

bool BoundReport::passed() const {
    if (explicit_constant) return max_ratio <= 1.0;
    return fitted_C.has_value() && std::isfinite(*fitted_C);
}

namespace detail {

double witness_ratio(const BoundWitness& w) {
    if (w.lhs == 0.0) return 0.0;
    if (w.rhs == 0.0) return std::numeric_limits<double>::infinity();
    return w.lhs / w.rhs;
}

void record_witness(BoundReport& report, BoundWitness w, std::size_t keep) {
    const double r = witness_ratio(w);
    report.max_ratio = std::max(report.max_ratio, r);
    auto pos = std::find_if(report.witnesses.begin(), report.witnesses.end(),
                            [r](const BoundWitness& other) { return witness_ratio(other) < r; });
    report.witnesses.insert(pos, std::move(w));
    if (report.witnesses.size() > keep) report.witnesses.resize(keep);
}

}  // namespace detail

BoundReport check_upper_bound(int n_max, double x) {
    if (n_max < 0) throw std::invalid_argument("check_upper_bound: n_max < 0");
    require_finite(x);
    BoundReport report;
    report.kind = BoundKind::upper_bound;
    const double half = std::abs(x) / 2.0;
    for (long n = -n_max; n <= n_max; ++n) {
        const long an = std::labs(n);
        double bound = 1.0;
        for (long i = 1; i <= an; ++i) bound *= half / static_cast<double>(i);
        detail::record_witness(report, {{n}, std::abs(bessel_j(n, x)), bound});
    }
    return report;
}

BoundReport check_summability(double x, int tail) {
    require_finite(x);
    const int min_tail = 2 * static_cast<int>(std::ceil(std::abs(x))) + 50;
    if (tail < min_tail) throw std::invalid_argument("check_summability: tail too short");
    const std::vector<double> orders = bessel_orders(tail, x);
    double sum = std::abs(orders[0]);
    for (int k = 1; k <= tail; ++k) sum += 2.0 * std::abs(orders[static_cast<std::size_t>(k)]);
    BoundReport report;
    report.kind = BoundKind::summability;
    detail::record_witness(report, {{static_cast<long>(tail)}, sum, 2.0 * std::exp(std::abs(x) / 2.0) - 1.0});
    return report;
}

double pair_decay_sum(long n, long m, double x, int tail) {
    if (tail < 0) throw std::invalid_argument("pair_decay_sum: negative tail");
    const double center = 0.5 * static_cast<double>(n + m);
    const long j_lo = static_cast<long>(std::ceil(center - tail));
    const long j_hi = static_cast<long>(std::floor(center + tail));
    const std::vector<double> rn = bessel_row(n, j_lo, j_hi, x);
    const std::vector<double> rm = bessel_row(m, j_lo, j_hi, x);
    const double edge = std::max(std::abs(rn.front() * rm.front()), std::abs(rn.back() * rm.back()));
    if (edge >= 1e-16) throw std::invalid_argument("pair_decay_sum: tail too short for 1e-16 truncation");
    double sum = 0.0;
    for (std::size_t i = 0; i < rn.size(); ++i) sum += std::abs(rn[i] * rm[i]);
    return sum;
}

BoundReport check_pair_decay(int max_sep, double x, int tail) {
    if (max_sep < 0) throw std::invalid_argument("check_pair_decay: max_sep < 0");
    BoundReport report;
    report.kind = BoundKind::pair_decay;
    report.explicit_constant = false;
    const double c = std::max(std::log(std::abs(x)), 1.0);
    double C = 0.0;
    for (long d = 0; d <= max_sep; ++d) {
        const double lhs = pair_decay_sum(0, d, x, tail);
        const double envelope = std::exp(c * static_cast<double>(d) - std::lgamma(0.5 * static_cast<double>(d) + 1.0));
        C = std::max(C, lhs / envelope);
        detail::record_witness(report, {{0, d}, lhs, envelope});
    }
    report.fitted_C = C;
    report.fitted_c = c;
    return report;
}

}  // namespace stark
