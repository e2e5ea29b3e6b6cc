#ifndef SPTRACK_CARDINALITY_HPP
#define SPTRACK_CARDINALITY_HPP

#include <span>
#include <vector>

namespace sptrack {

// Probability mass functions over target count, index = count.

// Each element survives independently with probability p.
std::vector<double> binomial_thinning(std::span<const double> pmf, double p);

// Distribution of the sum of two independent counts.
std::vector<double> convolve_pmf(std::span<const double> a, std::span<const double> b);

// Count of successes among independent Bernoulli trials with probs r.
std::vector<double> poisson_binomial_pmf(std::span<const double> r);

double pmf_mean(std::span<const double> pmf);
double pmf_var(std::span<const double> pmf);
int pmf_argmax(std::span<const double> pmf);

// Truncate to max_n entries and renormalize.
std::vector<double> truncate_pmf(std::span<const double> pmf, size_t max_n);

}  // namespace sptrack

#endif
