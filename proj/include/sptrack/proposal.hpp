#ifndef SPTRACK_PROPOSAL_HPP
#define SPTRACK_PROPOSAL_HPP

#include <optional>
#include <vector>

#include "sptrack/gaussian.hpp"
#include "sptrack/rfs.hpp"
#include "sptrack/sa_cphd.hpp"

namespace sptrack {

// One track proposal component: inclusion mass plus a Gaussian over states.
struct ProposalCluster {
    Label label;
    double mass;
    MvNormal density;
};

/**
 * Labeled multi-Bernoulli proposal: survival components gate on the previous
 * particle's labels, birth components are proposed unconditionally.
 */
class LmbProposal {
public:
    static LmbProposal build(const std::vector<GaussianCluster>& clusters);

    LabeledSet sample(const LabeledSet& X_prev, RngStream& rng) const;
    double log_q(const LabeledSet& X_new, const LabeledSet& X_prev) const;

    const std::vector<ProposalCluster>& survival() const { return survival_; }
    const std::vector<ProposalCluster>& birth() const { return birth_; }

private:
    // both sorted by label
    std::vector<ProposalCluster> survival_;
    std::vector<ProposalCluster> birth_;

    const ProposalCluster* find(const std::vector<ProposalCluster>& v, const Label& l) const;
};

/**
 * Single-component labeled proposal that reproduces the filter's cardinality
 * distribution exactly: draw n from rho, then an n-subset of the label pool
 * with probability proportional to the product of normalized cluster masses,
 * then states from the per-label Gaussians.
 */
class VovoProposal {
public:
    static VovoProposal build(std::span<const double> rho,
                              const std::vector<GaussianCluster>& clusters);

    LabeledSet sample(RngStream& rng) const;
    double log_q(const LabeledSet& X_new) const;

    const std::vector<double>& rho() const { return rho_; }
    const std::vector<ProposalCluster>& clusters() const { return clusters_; }
    const std::vector<double>& esf_table() const { return esf_; }
    double existence(size_t j) const { return clusters_[j].mass; }

private:
    std::vector<double> rho_;                 // truncated to the label count
    std::vector<ProposalCluster> clusters_;   // sorted by label; mass = normalized r+
    std::vector<double> esf_;                 // e_0..e_L of the r+ values
    std::vector<std::vector<double>> suffix_; // suffix_[j][t] = e_t(r_j..r_{L-1})

    std::vector<size_t> sample_subset(size_t n, RngStream& rng) const;
};

}  // namespace sptrack

#endif
