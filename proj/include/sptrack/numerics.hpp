#ifndef SPTRACK_NUMERICS_HPP
#define SPTRACK_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace sptrack {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(std::span<const double> logs) {
    double mx = kNegInf;
    for (double v : logs) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : logs) s += std::exp(v - mx);
    return mx + std::log(s);
}

inline double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double mx = std::max(a, b);
    return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
}

// In-place exp-normalization of log weights. Returns log of the
// normalization constant. All -inf input yields a uniform output.
inline double normalize_log_weights(std::vector<double>& logw) {
    const double lz = log_sum_exp(logw);
    if (!std::isfinite(lz)) {
        const double u = 1.0 / static_cast<double>(logw.size());
        std::fill(logw.begin(), logw.end(), u);
        return lz;
    }
    for (double& v : logw) v = std::exp(v - lz);
    return lz;
}

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/**
 * log I0(u) for u >= 0, where I0 is the modified Bessel function of the
 * first kind, order zero. Power series below the crossover, scaled
 * asymptotic expansion above it; relative error under 1e-10 on both sides.
 */
inline double log_bessel_i0(double u) {
    if (u < 0.0) u = -u;
    if (u <= 20.0) {
        // I0(u) = sum_k (u^2/4)^k / (k!)^2
        const double q = 0.25 * u * u;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k <= 60; ++k) {
            term *= q / (static_cast<double>(k) * static_cast<double>(k));
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return std::log(sum);
    }
    // I0(u) ~ e^u / sqrt(2 pi u) * sum_k a_k(u),  a_k = prod ((2j-1)^2) / (k! 8^k u^k)
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 8; ++k) {
        const double j = 2.0 * k - 1.0;
        term *= j * j / (8.0 * static_cast<double>(k) * u);
        sum += term;
    }
    return u - 0.5 * std::log(2.0 * M_PI * u) + std::log(sum);
}

}  // namespace sptrack

#endif
