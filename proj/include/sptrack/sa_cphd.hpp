#ifndef SPTRACK_SA_CPHD_HPP
#define SPTRACK_SA_CPHD_HPP

#include <span>
#include <vector>

#include "sptrack/motion.hpp"
#include "sptrack/radar.hpp"
#include "sptrack/rfs.hpp"
#include "sptrack/types.hpp"

namespace sptrack {

// Additive measurement contribution gamma(x) of a single target, sparse over
// the sensor cells. Abstracted so the filter can run against scalar or
// surrogate sensors in tests.
class GammaSource {
public:
    virtual ~GammaSource() = default;
    virtual int num_cells() const = 0;
    virtual SparseCells gamma(const Vec& x) const = 0;
};

struct PhdParticle {
    Vec x;
    double w;
    Label label;
};

using PhdCloud = std::vector<PhdParticle>;

struct GaussianCluster {
    Label label;
    Vec mean;
    Mat cov;
    double mass;      // clamped
    double raw_mass;  // pre-clamp PHD mass
    bool is_birth;
};

struct MassClamps {
    double ps_min = 0.1, ps_max = 0.99;
    double pb_min = 0.01, pb_max = 0.5;
};

// Cardinality distribution plus label-tagged intensity particle cloud. The
// cloud weights sum to the intensity mass, not to 1.
struct SaCphdState {
    std::vector<double> rho;
    PhdCloud cloud;
};

/**
 * Moment integrals of gamma under the normalized intensity, restricted to
 * the active cells (the union of the per-particle gamma supports). Off the
 * active set every gamma is zero, so those cells contribute identical
 * diagonal factors to the update's numerator and denominator Gaussians and
 * cancel exactly; the restriction loses nothing.
 *
 * The second moment is kept structured,
 *     sigma_hat = diag(d_within) + sum_l p_l gbar_l gbar_l^T,
 * one outer product per label: the per-cell diagonal is exact and the
 * cross-cell correlation of a label collapses onto its mean template. Every
 * covariance in the update is then diagonal-plus-low-rank, so the filter
 * stays linear in the number of active cells.
 */
struct SaCphdMoments {
    std::vector<int> active;  // sorted global cell indices
    Vec mu_hat;               // E_s[gamma]
    Vec sig_diag;             // diag of E_s[gamma gamma^T], exact
    Vec d_within;             // sig_diag - sum_l p_l gbar_l^2, >= 0
    Mat gbar;                 // active x L per-label mean templates
    std::vector<double> p;    // per-label intensity shares, sum 1
    double N = 0.0;           // predicted mean target count
    double var = 0.0;         // predicted cardinality variance
    double G2 = 0.0, G3 = 0.0;  // factorial moments of the cardinality

    Mat sigma_hat() const {
        Mat S = Mat(d_within.asDiagonal());
        for (size_t l = 0; l < p.size(); ++l) {
            S += p[l] * gbar.col(static_cast<Eigen::Index>(l)) *
                 gbar.col(static_cast<Eigen::Index>(l)).transpose();
        }
        return S;
    }
    Mat sigma_total() const { return N * sigma_hat() + (var - N) * outer(); }
    Vec mu_cond() const { return N > 0.0 ? Vec((G2 / N) * mu_hat) : Vec(Vec::Zero(mu_hat.size())); }
    Mat sigma_cond() const {
        if (N <= 0.0) return Mat::Zero(mu_hat.rows(), mu_hat.rows());
        const double a = G2 / N;
        return a * sigma_hat() + (G3 / N - a * a) * outer();
    }
    Mat centered() const { return sigma_hat() - outer(); }
    Mat outer() const { return mu_hat * mu_hat.transpose(); }
};

struct SaCphdOptions {
    int n_max = 11;
    int n_birth_particles = 5000;
    double sigma_n = 2.0;          // additive-noise std per cell
    double cov_floor = 1.0;        // SPD floor added to cluster covariances
    double log_ratio_clamp = 500;  // dynamic range of per-scan weight ratios
};

/**
 * Superpositional CPHD filter in SMC form, specialized to an
 * additive-Gaussian measurement approximation z = sum gamma(x) + noise.
 *
 * Each step is re-derived from the tracker's labeled particle posterior,
 * predicted through the motion/birth models, updated against the
 * preprocessed measurement, and condensed into per-label Gaussian clusters
 * for proposal construction.
 */
class SaCphd {
public:
    SaCphd(const GammaSource& gs, const MotionModel& motion, const BirthModel& birth,
           SaCphdOptions opt);

    const SaCphdOptions& options() const { return opt_; }

    // Cardinality and labeled intensity implied by a weighted particle set.
    SaCphdState derive(std::span<const LabeledSet> sets, std::span<const double> weights) const;

    SaCphdState predict(const SaCphdState& s, int k, double p_survive, RngStream& rng) const;

    // z is the full-length preprocessed (zero-mean-noise) measurement.
    SaCphdState update(const SaCphdState& s, const Vec& z) const;

    SaCphdMoments moments(const PhdCloud& cloud, std::span<const double> rho) const;

    std::vector<GaussianCluster> extract_clusters(const SaCphdState& s, int k,
                                                  const MassClamps& clamps) const;

private:
    const GammaSource& gs_;
    const MotionModel& motion_;
    const BirthModel& birth_;
    SaCphdOptions opt_;
};

}  // namespace sptrack

#endif
