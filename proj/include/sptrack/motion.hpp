#ifndef SPTRACK_MOTION_HPP
#define SPTRACK_MOTION_HPP

#include <stdexcept>
#include <vector>

#include "sptrack/gaussian.hpp"
#include "sptrack/label.hpp"
#include "sptrack/rng.hpp"
#include "sptrack/types.hpp"

namespace sptrack {

// Single-target dynamics: transition density, sampler, and state-dependent
// survival probability. Kept abstract so filters can be exercised against
// low-dimensional surrogate models in tests.
class MotionModel {
public:
    virtual ~MotionModel() = default;
    virtual int dim() const = 0;
    virtual Vec sample_transition(const Vec& x, RngStream& rng) const = 0;
    virtual double log_transition(const Vec& to, const Vec& from) const = 0;
    virtual Vec mean_transition(const Vec& x) const = 0;
    virtual double survival_prob(const Vec& x) const = 0;
};

/**
 * Nearly-constant-velocity model in 2-D Cartesian coordinates.
 *
 * State layout [px, vx, py, vy] (m, m/s), optionally extended by a
 * nonnegative echo-amplitude modulus following a Gaussian random walk.
 * Kinematic process noise is white acceleration with the same power
 * spectral density on both axes.
 */
class NcvModel final : public MotionModel {
public:
    NcvModel(double dt, double accel_noise_psd, double p_survive, double amplitude_walk_std = -1.0)
        : dim_(amplitude_walk_std >= 0.0 ? 5 : 4),
          p_survive_(p_survive),
          F_(Mat::Identity(dim_, dim_)),
          noise_(make_noise(dt, accel_noise_psd, amplitude_walk_std)) {
        if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
        F_(0, 1) = dt;
        F_(2, 3) = dt;
    }

    int dim() const override { return dim_; }

    Vec sample_transition(const Vec& x, RngStream& rng) const override {
        Vec out = F_ * x + noise_.sample(rng);
        if (dim_ == 5 && out(4) < 0.0) out(4) = 0.0;
        return out;
    }

    double log_transition(const Vec& to, const Vec& from) const override {
        return noise_.logpdf(to - F_ * from);
    }

    Vec mean_transition(const Vec& x) const override { return F_ * x; }

    double survival_prob(const Vec&) const override { return p_survive_; }

    const Mat& transition_matrix() const { return F_; }
    const Mat& process_noise_cov() const { return Q_; }

private:
    static Mat axis_noise(double dt, double q) {
        Mat Qa(2, 2);
        Qa << q * dt * dt * dt / 3.0, q * dt * dt / 2.0,
              q * dt * dt / 2.0,      q * dt;
        return Qa;
    }

    MvNormal make_noise(double dt, double q, double walk_std) {
        Q_ = Mat::Zero(dim_, dim_);
        Q_.block<2, 2>(0, 0) = axis_noise(dt, q);
        Q_.block<2, 2>(2, 2) = axis_noise(dt, q);
        if (dim_ == 5) Q_(4, 4) = walk_std * walk_std;
        return MvNormal(Vec::Zero(dim_), Q_ + 1e-12 * Mat::Identity(dim_, dim_));
    }

    int dim_;
    double p_survive_;
    Mat F_;
    Mat Q_;
    MvNormal noise_;
};

// One adaptive-birth site: appearance probability plus a spatial density.
struct BirthComponent {
    double r;
    MvNormal density;
};

/**
 * Multi-Bernoulli birth model. Labels of targets born at time k are
 * (k, i) with i indexing the components.
 */
class BirthModel {
public:
    void add(double r, MvNormal density) { comps_.push_back({r, std::move(density)}); }

    int size() const { return static_cast<int>(comps_.size()); }
    const BirthComponent& component(int i) const { return comps_[static_cast<size_t>(i)]; }

    bool is_birth_label(const Label& l, int k) const {
        return l.birth_time == k && l.index >= 0 && l.index < size();
    }

    std::vector<Label> labels_at(int k) const {
        std::vector<Label> out;
        out.reserve(comps_.size());
        for (int i = 0; i < size(); ++i) out.push_back({k, i});
        return out;
    }

private:
    std::vector<BirthComponent> comps_;
};

}  // namespace sptrack

#endif
