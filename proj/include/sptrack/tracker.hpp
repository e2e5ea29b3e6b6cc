#ifndef SPTRACK_TRACKER_HPP
#define SPTRACK_TRACKER_HPP

#include <cstdint>
#include <vector>

#include "sptrack/motion.hpp"
#include "sptrack/proposal.hpp"
#include "sptrack/radar.hpp"
#include "sptrack/rfs.hpp"
#include "sptrack/rng.hpp"

namespace sptrack {

struct MultiTargetParticle {
    LabeledSet X;
    double w;
};

struct LabelEstimate {
    Label label;
    double existence;
    Vec mean;
    Mat cov;
};

struct TrackEstimate {
    int n_hat = 0;
    std::vector<LabelEstimate> tracks;  // the n_hat highest-existence labels
    std::vector<double> card_pmf;
};

struct StepDiagnostics {
    double n_eff = 0.0;
    int weight_violations = 0;  // particles whose log weight was -inf before normalization
    double log_norm = 0.0;
    TrackEstimate estimate;  // taken from the weighted particles before resampling
};

enum class VovoWeightMode { kFullSum, kSingleParticle };

struct TrackerOptions {
    int num_particles = 3000;
    VovoWeightMode vovo_mode = VovoWeightMode::kSingleParticle;
    bool bootstrap_debug = false;  // q == f: propose from the prior transition
    double resample_frac = 0.5;    // resample when n_eff falls below this fraction of N_p
};

/**
 * Sequential Monte Carlo filter over labeled multi-target states. One call
 * per scan: draw each particle's new labeled set from the chosen proposal,
 * weight by likelihood x transition / proposal, normalize, estimate, and
 * systematically resample when the effective sample size has degenerated.
 */
class Tracker {
public:
    Tracker(const MotionModel& motion, const BirthModel& birth, const RadarSensor& sensor,
            TrackerOptions opt, uint64_t seed);

    void reset();

    StepDiagnostics step_lmb(int k, const Vec& z, const LmbProposal& prop);
    StepDiagnostics step_vovo(int k, const Vec& z, const VovoProposal& prop);

    TrackEstimate estimate() const;

    const std::vector<MultiTargetParticle>& particles() const { return particles_; }
    std::vector<MultiTargetParticle>& particles() { return particles_; }

    static void resample_systematic(std::vector<MultiTargetParticle>& particles, RngStream& rng);

    RngStream particle_stream(int k, int i) const;

private:
    const MotionModel& motion_;
    const BirthModel& birth_;
    const RadarSensor& sensor_;
    TrackerOptions opt_;
    RngStream base_;
    std::vector<MultiTargetParticle> particles_;

    LabeledSet sample_prior_transition(const LabeledSet& X_prev, int k, RngStream& rng) const;
    StepDiagnostics finish_step(int k, std::vector<LabeledSet>&& proposed,
                                std::vector<double>&& logw, int violations);
};

}  // namespace sptrack

#endif
