#include "sptrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <utility>

#include "sptrack/numerics.hpp"

namespace sptrack {

namespace {

bool same_set(const LabeledSet& a, const LabeledSet& b) {
    if (a.size() != b.size()) return false;
    for (size_t t = 0; t < a.size(); ++t) {
        if (!(a[t].label == b[t].label)) return false;
        if (a[t].x.size() != b[t].x.size()) return false;
        for (int c = 0; c < a[t].x.size(); ++c) {
            if (a[t].x(c) != b[t].x(c)) return false;
        }
    }
    return true;
}

// log(1-p) floored at the smallest representable exponent so that an
// impossible branch stays an ordinary huge penalty instead of poisoning
// sums with inf - inf.
double log1m_floored(double p) { return std::max(std::log1p(-p), -745.0); }

/**
 * Ancestor population prepared for evaluating the transition mixture
 * sum_j w_j f(X | X_j) of the sampled-set proposal weight. Particles are
 * grouped by label set and exact duplicates (adjacent after resampling)
 * are pooled, so each proposal costs O(distinct ancestors x survivors)
 * instead of a full sweep with per-pair set algebra. Birth factors do not
 * depend on the ancestor and are applied once per proposal. For the 4-D
 * constant-velocity model the Gaussian terms run over flat arrays of
 * predicted means with closed-form per-axis inverses; other motion models
 * fall back to their transition density.
 */
class TransitionMixture {
public:
    TransitionMixture(const std::vector<MultiTargetParticle>& prev, int k,
                      const MotionModel& motion, const BirthModel& birth)
        : k_(k), motion_(motion), birth_(birth) {
        const auto* ncv = dynamic_cast<const NcvModel*>(&motion);
        fast_ = ncv != nullptr && motion.dim() == 4;
        if (fast_) {
            dt_ = ncv->transition_matrix()(0, 1);
            double logdet = 0.0;
            for (int a = 0; a < 2; ++a) {
                Mat Qa = ncv->process_noise_cov().block<2, 2>(2 * a, 2 * a);
                Qa(0, 0) += 1e-12;
                Qa(1, 1) += 1e-12;
                const double det = Qa(0, 0) * Qa(1, 1) - Qa(0, 1) * Qa(1, 0);
                inv_[a] = {Qa(1, 1) / det, -Qa(0, 1) / det, Qa(0, 0) / det};
                logdet += std::log(det);
            }
            gauss_norm_ = -2.0 * std::log(2.0 * M_PI) - 0.5 * logdet;
        }

        std::vector<std::pair<const LabeledSet*, double>> reps;
        owned_.reserve(prev.size());
        auto ordered = [](const LabeledSet& X) {
            for (size_t t = 1; t < X.size(); ++t) {
                if (!(X[t - 1].label < X[t].label)) return false;
            }
            return true;
        };
        for (const auto& p : prev) {
            const LabeledSet* src = &p.X;
            if (!ordered(p.X)) {
                owned_.push_back(p.X);
                sort_by_label(owned_.back());
                src = &owned_.back();
            }
            if (!reps.empty() && same_set(*reps.back().first, *src)) {
                reps.back().second += p.w;
            } else {
                reps.emplace_back(src, p.w);
            }
        }

        std::map<std::vector<Label>, size_t> index;
        std::vector<std::vector<std::pair<const LabeledSet*, double>>> pools;
        for (const auto& r : reps) {
            auto [it, fresh] = index.try_emplace(labels_of(*r.first), pools.size());
            if (fresh) pools.emplace_back();
            pools[it->second].push_back(r);
        }

        size_t total = 0;
        groups_.resize(pools.size());
        for (auto& [labels, gi] : index) groups_[gi].labels = std::move(labels);
        for (size_t gi = 0; gi < pools.size(); ++gi) {
            Group& g = groups_[gi];
            const size_t m = pools[gi].size();
            const size_t nl = g.labels.size();
            g.count = m;
            total += m;
            g.base.resize(m);
            g.lsurv.resize(nl * m);
            if (fast_) g.mean.resize(nl * 4 * m);
            else g.state.resize(nl * m);
            for (size_t j = 0; j < m; ++j) {
                const LabeledSet& X = *pools[gi][j].first;
                double base = std::log(pools[gi][j].second);
                for (size_t s = 0; s < nl; ++s) {
                    const Vec& x = X[s].x;
                    const double ps = motion.survival_prob(x);
                    const double l1m = log1m_floored(ps);
                    base += l1m;
                    g.lsurv[s * m + j] = std::log(ps) - l1m;
                    if (fast_) {
                        g.mean[(s * 4 + 0) * m + j] = x(0) + dt_ * x(1);
                        g.mean[(s * 4 + 1) * m + j] = x(1);
                        g.mean[(s * 4 + 2) * m + j] = x(2) + dt_ * x(3);
                        g.mean[(s * 4 + 3) * m + j] = x(3);
                    } else {
                        g.state[s * m + j] = &x;
                    }
                }
                g.base[j] = base;
            }
        }
        acc_.reserve(total);

        log1mr_total_ = 0.0;
        for (int i = 0; i < birth.size(); ++i) {
            log1mr_total_ += log1m_floored(birth.component(i).r);
        }
    }

    double log_mixture(const LabeledSet& X) const {
        for (size_t t = 1; t < X.size(); ++t) {
            if (X[t].label == X[t - 1].label) return kNegInf;
        }
        double birth_part = log1mr_total_;
        surv_.clear();
        for (const auto& t : X) {
            if (t.label.birth_time < k_) {
                surv_.push_back(&t);
            } else {
                if (!birth_.is_birth_label(t.label, k_)) return kNegInf;
                const auto& bc = birth_.component(t.label.index);
                birth_part += std::log(bc.r) + bc.density.logpdf(t.x) - log1m_floored(bc.r);
            }
        }

        acc_.clear();
        for (const Group& g : groups_) {
            slots_.clear();
            size_t s = 0;
            bool compatible = true;
            for (const auto* t : surv_) {
                while (s < g.labels.size() && g.labels[s] < t->label) ++s;
                if (s == g.labels.size() || !(g.labels[s] == t->label)) {
                    compatible = false;
                    break;
                }
                slots_.push_back(s++);
            }
            if (!compatible) continue;

            const size_t m = g.count;
            const size_t off = acc_.size();
            acc_.insert(acc_.end(), g.base.begin(), g.base.end());
            double* out = acc_.data() + off;
            for (size_t u = 0; u < surv_.size(); ++u) {
                const size_t slot = slots_[u];
                const Vec& x = surv_[u]->x;
                const double* ls = g.lsurv.data() + slot * m;
                if (fast_) {
                    const double* mpx = g.mean.data() + (slot * 4 + 0) * m;
                    const double* mvx = g.mean.data() + (slot * 4 + 1) * m;
                    const double* mpy = g.mean.data() + (slot * 4 + 2) * m;
                    const double* mvy = g.mean.data() + (slot * 4 + 3) * m;
                    const double px = x(0), vx = x(1), py = x(2), vy = x(3);
                    for (size_t j = 0; j < m; ++j) {
                        const double dpx = px - mpx[j], dvx = vx - mvx[j];
                        const double dpy = py - mpy[j], dvy = vy - mvy[j];
                        const double quad =
                            inv_[0].pp * dpx * dpx + 2.0 * inv_[0].pv * dpx * dvx +
                            inv_[0].vv * dvx * dvx + inv_[1].pp * dpy * dpy +
                            2.0 * inv_[1].pv * dpy * dvy + inv_[1].vv * dvy * dvy;
                        out[j] += ls[j] + gauss_norm_ - 0.5 * quad;
                    }
                } else {
                    const Vec* const* st = g.state.data() + slot * m;
                    for (size_t j = 0; j < m; ++j) {
                        out[j] += ls[j] + motion_.log_transition(x, *st[j]);
                    }
                }
            }
        }
        return birth_part + log_sum_exp(acc_);
    }

private:
    struct AxisInv {
        double pp, pv, vv;
    };
    struct Group {
        std::vector<Label> labels;
        size_t count = 0;
        std::vector<double> base;       // log pooled weight + sum_l log(1 - ps)
        std::vector<double> lsurv;      // [label][member] log ps - log(1 - ps)
        std::vector<double> mean;       // [label][component][member] predicted means
        std::vector<const Vec*> state;  // [label][member] fallback path
    };

    int k_;
    const MotionModel& motion_;
    const BirthModel& birth_;
    bool fast_ = false;
    double dt_ = 0.0;
    AxisInv inv_[2] = {};
    double gauss_norm_ = 0.0;
    double log1mr_total_ = 0.0;
    std::vector<Group> groups_;
    std::vector<LabeledSet> owned_;  // sorted copies of any out-of-order input sets
    mutable std::vector<double> acc_;
    mutable std::vector<const LabeledState*> surv_;
    mutable std::vector<size_t> slots_;
};

}  // namespace

Tracker::Tracker(const MotionModel& motion, const BirthModel& birth, const RadarSensor& sensor,
                 TrackerOptions opt, uint64_t seed)
    : motion_(motion), birth_(birth), sensor_(sensor), opt_(opt), base_(seed) {
    reset();
}

void Tracker::reset() {
    particles_.assign(static_cast<size_t>(opt_.num_particles),
                      {LabeledSet{}, 1.0 / opt_.num_particles});
}

RngStream Tracker::particle_stream(int k, int i) const {
    return base_.child(3u, static_cast<uint64_t>(k), static_cast<uint64_t>(i));
}

LabeledSet Tracker::sample_prior_transition(const LabeledSet& X_prev, int k,
                                            RngStream& rng) const {
    LabeledSet out;
    for (const auto& t : X_prev) {
        if (rng.bernoulli(motion_.survival_prob(t.x))) {
            out.push_back({t.label, motion_.sample_transition(t.x, rng)});
        }
    }
    for (int i = 0; i < birth_.size(); ++i) {
        const auto& bc = birth_.component(i);
        if (rng.bernoulli(bc.r)) out.push_back({{k, i}, bc.density.sample(rng)});
    }
    sort_by_label(out);
    return out;
}

StepDiagnostics Tracker::step_lmb(int k, const Vec& z, const LmbProposal& prop) {
    const size_t n = particles_.size();
    std::vector<LabeledSet> proposed(n);
    std::vector<double> logw(n);
    int violations = 0;

    for (size_t i = 0; i < n; ++i) {
        RngStream rng = particle_stream(k, static_cast<int>(i));
        const LabeledSet& X_prev = particles_[i].X;

        double log_fq;  // log f - log q
        if (opt_.bootstrap_debug) {
            proposed[i] = sample_prior_transition(X_prev, k, rng);
            log_fq = 0.0;
        } else {
            proposed[i] = prop.sample(X_prev, rng);
            log_fq = log_multitarget_transition(proposed[i], X_prev, k, motion_, birth_) -
                     prop.log_q(proposed[i], X_prev);
        }
        const double lg = sensor_.log_likelihood(z, proposed[i]);
        logw[i] = std::log(particles_[i].w) + lg + log_fq;
        if (!std::isfinite(logw[i])) ++violations;
    }
    return finish_step(k, std::move(proposed), std::move(logw), violations);
}

StepDiagnostics Tracker::step_vovo(int k, const Vec& z, const VovoProposal& prop) {
    const size_t n = particles_.size();
    std::vector<LabeledSet> proposed(n);
    std::vector<double> logw(n);
    int violations = 0;

    const bool full_sum = opt_.vovo_mode == VovoWeightMode::kFullSum;
    std::unique_ptr<TransitionMixture> mixture;
    if (full_sum) mixture = std::make_unique<TransitionMixture>(particles_, k, motion_, birth_);

    // previous particles grouped by label set; mode (b) draws the reference
    // particle uniformly among those whose labels cover the sampled survivors
    std::map<std::vector<Label>, std::vector<int>> groups;
    if (!full_sum) {
        for (size_t j = 0; j < n; ++j) {
            groups[labels_of(particles_[j].X)].push_back(static_cast<int>(j));
        }
    }
    struct Compat {
        std::vector<const std::vector<int>*> members;
        std::vector<size_t> cum;
        size_t total = 0;
    };
    std::map<std::vector<Label>, Compat> compat_cache;

    for (size_t i = 0; i < n; ++i) {
        RngStream rng = particle_stream(k, static_cast<int>(i));
        proposed[i] = prop.sample(rng);
        const double lq = prop.log_q(proposed[i]);

        double lf = kNegInf;
        if (full_sum) {
            lf = mixture->log_mixture(proposed[i]);
        } else {
            std::vector<Label> survivors;
            for (const auto& t : proposed[i]) {
                if (t.label.birth_time < k) survivors.push_back(t.label);
            }
            auto [it, fresh] = compat_cache.try_emplace(survivors);
            Compat& cp = it->second;
            if (fresh) {
                for (const auto& [labels, members] : groups) {
                    if (std::includes(labels.begin(), labels.end(), survivors.begin(),
                                      survivors.end())) {
                        cp.total += members.size();
                        cp.members.push_back(&members);
                        cp.cum.push_back(cp.total);
                    }
                }
            }
            if (cp.total > 0) {
                const size_t pick = static_cast<size_t>(rng.uniform_index(cp.total));
                const size_t g = static_cast<size_t>(
                    std::upper_bound(cp.cum.begin(), cp.cum.end(), pick) - cp.cum.begin());
                const size_t offset = pick - (g == 0 ? 0 : cp.cum[g - 1]);
                const int m = (*cp.members[g])[offset];
                lf = log_multitarget_transition(proposed[i], particles_[static_cast<size_t>(m)].X,
                                                k, motion_, birth_);
            }
        }

        const double lg = sensor_.log_likelihood(z, proposed[i]);
        logw[i] = lg + lf - lq;
        if (!std::isfinite(logw[i])) ++violations;
    }
    return finish_step(k, std::move(proposed), std::move(logw), violations);
}

StepDiagnostics Tracker::finish_step(int k, std::vector<LabeledSet>&& proposed,
                                     std::vector<double>&& logw, int violations) {
    StepDiagnostics diag;
    diag.weight_violations = violations;

    diag.log_norm = log_sum_exp(logw);
    if (!std::isfinite(diag.log_norm)) {
        throw std::runtime_error("particle collapse: all importance weights vanished");
    }
    for (size_t i = 0; i < particles_.size(); ++i) {
        particles_[i].X = std::move(proposed[i]);
        particles_[i].w = std::isfinite(logw[i]) ? std::exp(logw[i] - diag.log_norm) : 0.0;
    }

    double sq = 0.0;
    for (const auto& p : particles_) sq += p.w * p.w;
    diag.n_eff = sq > 0.0 ? 1.0 / sq : 0.0;
    diag.estimate = estimate();

    if (diag.n_eff < opt_.resample_frac * static_cast<double>(particles_.size())) {
        RngStream rr = base_.child(4u, static_cast<uint64_t>(k));
        resample_systematic(particles_, rr);
    }
    return diag;
}

void Tracker::resample_systematic(std::vector<MultiTargetParticle>& particles, RngStream& rng) {
    const size_t n = particles.size();
    const double step = 1.0 / static_cast<double>(n);
    double pointer = rng.uniform() * step;

    std::vector<MultiTargetParticle> out;
    out.reserve(n);
    double cum = 0.0;
    size_t j = 0;
    for (size_t i = 0; i < n; ++i) {
        cum += particles[i].w;
        while (j < n && pointer < cum) {
            out.push_back({particles[i].X, step});
            pointer += step;
            ++j;
        }
    }
    while (out.size() < n) out.push_back({particles.back().X, step});
    particles = std::move(out);
}

TrackEstimate Tracker::estimate() const {
    TrackEstimate est;

    size_t max_card = 0;
    for (const auto& p : particles_) max_card = std::max(max_card, p.X.size());
    est.card_pmf.assign(max_card + 1, 0.0);
    std::map<Label, double> existence;
    for (const auto& p : particles_) {
        est.card_pmf[p.X.size()] += p.w;
        for (const auto& t : p.X) existence[t.label] += p.w;
    }
    est.n_hat = static_cast<int>(
        std::max_element(est.card_pmf.begin(), est.card_pmf.end()) - est.card_pmf.begin());

    std::vector<std::pair<double, Label>> ranked;
    for (const auto& [label, ex] : existence) ranked.emplace_back(-ex, label);
    std::sort(ranked.begin(), ranked.end());

    const int dim = motion_.dim();
    for (int r = 0; r < est.n_hat && r < static_cast<int>(ranked.size()); ++r) {
        const Label label = ranked[static_cast<size_t>(r)].second;
        const double ex = -ranked[static_cast<size_t>(r)].first;
        Vec mean = Vec::Zero(dim);
        for (const auto& p : particles_) {
            if (const LabeledState* t = find_label(p.X, label)) mean += (p.w / ex) * t->x;
        }
        Mat cov = Mat::Zero(dim, dim);
        for (const auto& p : particles_) {
            if (const LabeledState* t = find_label(p.X, label)) {
                const Vec dx = t->x - mean;
                cov += (p.w / ex) * dx * dx.transpose();
            }
        }
        est.tracks.push_back({label, ex, std::move(mean), std::move(cov)});
    }
    return est;
}

}  // namespace sptrack
