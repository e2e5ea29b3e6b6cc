#ifndef SPTRACK_RFS_HPP
#define SPTRACK_RFS_HPP

#include <span>
#include <vector>

#include "sptrack/label.hpp"
#include "sptrack/motion.hpp"
#include "sptrack/types.hpp"

namespace sptrack {

struct LabeledState {
    Label label;
    Vec x;
};

// Finite set of labeled states; treated as a set, kept sorted by label.
using LabeledSet = std::vector<LabeledState>;

void sort_by_label(LabeledSet& X);
bool labels_distinct(const LabeledSet& X);
std::vector<Label> labels_of(const LabeledSet& X);
const LabeledState* find_label(const LabeledSet& X, const Label& l);

// Elementary symmetric functions e_0..e_n of vals, e_0 = 1.
std::vector<double> esf(std::span<const double> vals);

// A Bernoulli track component: label plus existence probability.
struct WeightedLabel {
    Label label;
    double r = 0.0;
};

/**
 * Log weight of label set L under a labeled multi-Bernoulli density with
 * the given components: prod_{l in L} r_l * prod_{l not in L} (1 - r_l).
 * Labels outside the component set give -inf.
 */
double log_lmb_weight(std::span<const Label> L, std::span<const WeightedLabel> comps);

/**
 * Single-component labeled density in cardinality-balanced form: an explicit
 * cardinality distribution rho over |L|, with per-label inclusion weights r.
 * omega(L) = rho(|L|) * prod_{l in L} r_l / e_{|L|}(r).
 */
struct CardinalityBalancedWeight {
    std::vector<double> rho;            // indexed by cardinality, sums to 1
    std::vector<WeightedLabel> comps;
};

double log_cb_weight(std::span<const Label> L, const CardinalityBalancedWeight& w);

/**
 * Log multi-target transition density f(X_k | X_{k-1}).
 *
 * Labels carried over from X_{k-1} contribute survival times single-target
 * transition factors; labels of X_{k-1} that disappear contribute death
 * factors; labels born at time k contribute multi-Bernoulli birth factors.
 * Any label in X_k that neither survives from X_{k-1} nor belongs to the
 * birth space at k makes the density zero, as do duplicate labels.
 */
double log_multitarget_transition(const LabeledSet& to, const LabeledSet& from, int k,
                                  const MotionModel& motion, const BirthModel& birth);

}  // namespace sptrack

#endif
