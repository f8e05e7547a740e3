// Independent reference for J_n(x): the defining power series summed in
// 160-bit binary floating point. Shares no code with the library kernel.

#pragma once

#include <cstdlib>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<160, boost::multiprecision::digit_base_2>>;

// sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!), n >= 0, then J_{-n} = (-1)^n J_n.
inline double bessel_j(long n, double x) {
    const long an = std::labs(n);
    const big half = big(x) / 2;
    big prefactor = 1;
    for (long i = 1; i <= an; ++i) prefactor *= half / i;
    const big q = half * half;
    big term = 1, sum = 1;
    for (long k = 1; k < 2000; ++k) {
        term *= -q / (big(k) * big(k + an));
        sum += term;
        if (abs(term) < abs(sum) * big(1e-45) && k > 2) break;
    }
    big value = prefactor * sum;
    if (n < 0 && an % 2 == 1) value = -value;
    return static_cast<double>(value);
}

}  // namespace oracle
