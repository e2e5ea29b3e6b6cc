#ifndef SPTRACK_OSPA_HPP
#define SPTRACK_OSPA_HPP

#include <vector>

#include "sptrack/types.hpp"

namespace sptrack {

struct OspaParams {
    double cutoff = 100.0;  // meters
    double order = 1.0;
};

// Minimum-cost assignment of every row to a distinct column, rows <= cols.
double min_cost_assignment(const Mat& cost);

/**
 * Optimal sub-pattern assignment distance between two finite sets of
 * position vectors: cutoff-capped localization cost under the optimal
 * pairing plus the cutoff-weighted cardinality mismatch.
 */
double ospa(const std::vector<Vec>& X, const std::vector<Vec>& Y, const OspaParams& params);

struct StepAggregate {
    double mean_n_hat = 0.0;
    double std_n_hat = 0.0;
    double mean_ospa = 0.0;
    double std_ospa = 0.0;
};

struct RunRecord {
    std::vector<double> n_hat;  // indexed by step
    std::vector<double> ospa;
};

// Per-step sample mean and standard deviation across runs.
std::vector<StepAggregate> aggregate(const std::vector<RunRecord>& runs);

}  // namespace sptrack

#endif
