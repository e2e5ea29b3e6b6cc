#include "sptrack/cardinality.hpp"

#include <algorithm>
#include <cmath>

namespace sptrack {

std::vector<double> binomial_thinning(std::span<const double> pmf, double p) {
    const size_t n = pmf.size();
    if (p >= 1.0) return {pmf.begin(), pmf.end()};
    std::vector<double> out(n, 0.0);
    for (size_t m = 0; m < n; ++m) {
        std::vector<double> binom(m + 1, 0.0);
        binom[0] = std::pow(1.0 - p, static_cast<double>(m));
        for (size_t j = 1; j <= m; ++j) {
            binom[j] = binom[j - 1] * (p / (1.0 - p)) *
                       (static_cast<double>(m - j + 1) / static_cast<double>(j));
        }
        for (size_t j = 0; j <= m; ++j) out[j] += pmf[m] * binom[j];
    }
    return out;
}

std::vector<double> convolve_pmf(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i) {
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

std::vector<double> poisson_binomial_pmf(std::span<const double> r) {
    std::vector<double> pmf{1.0};
    for (double ri : r) {
        std::vector<double> next(pmf.size() + 1, 0.0);
        for (size_t j = 0; j < pmf.size(); ++j) {
            next[j] += pmf[j] * (1.0 - ri);
            next[j + 1] += pmf[j] * ri;
        }
        pmf = std::move(next);
    }
    return pmf;
}

double pmf_mean(std::span<const double> pmf) {
    double m = 0.0;
    for (size_t n = 0; n < pmf.size(); ++n) m += static_cast<double>(n) * pmf[n];
    return m;
}

double pmf_var(std::span<const double> pmf) {
    const double m = pmf_mean(pmf);
    double s = 0.0;
    for (size_t n = 0; n < pmf.size(); ++n) {
        const double d = static_cast<double>(n) - m;
        s += d * d * pmf[n];
    }
    return s;
}

int pmf_argmax(std::span<const double> pmf) {
    return static_cast<int>(std::max_element(pmf.begin(), pmf.end()) - pmf.begin());
}

std::vector<double> truncate_pmf(std::span<const double> pmf, size_t max_n) {
    std::vector<double> out(pmf.begin(), pmf.begin() + std::min(pmf.size(), max_n + 1));
    double s = 0.0;
    for (double v : out) s += v;
    if (s > 0.0) {
        for (double& v : out) v /= s;
    }
    return out;
}

}  // namespace sptrack
