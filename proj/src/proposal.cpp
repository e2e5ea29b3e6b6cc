#include "sptrack/proposal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sptrack/numerics.hpp"

namespace sptrack {

namespace {

std::vector<ProposalCluster> to_proposal(const std::vector<GaussianCluster>& clusters,
                                         bool births) {
    std::vector<ProposalCluster> out;
    for (const auto& c : clusters) {
        if (c.is_birth != births) continue;
        out.push_back({c.label, c.mass, MvNormal(c.mean, c.cov)});
    }
    std::sort(out.begin(), out.end(),
              [](const ProposalCluster& a, const ProposalCluster& b) { return a.label < b.label; });
    for (size_t i = 1; i < out.size(); ++i) {
        if (out[i].label == out[i - 1].label) throw std::invalid_argument("duplicate cluster label");
    }
    return out;
}

}  // namespace

LmbProposal LmbProposal::build(const std::vector<GaussianCluster>& clusters) {
    LmbProposal p;
    p.survival_ = to_proposal(clusters, false);
    p.birth_ = to_proposal(clusters, true);
    return p;
}

const ProposalCluster* LmbProposal::find(const std::vector<ProposalCluster>& v,
                                         const Label& l) const {
    auto it = std::lower_bound(v.begin(), v.end(), l,
                               [](const ProposalCluster& c, const Label& k) { return c.label < k; });
    if (it != v.end() && it->label == l) return &*it;
    return nullptr;
}

LabeledSet LmbProposal::sample(const LabeledSet& X_prev, RngStream& rng) const {
    LabeledSet out;
    for (const auto& prev : X_prev) {
        const ProposalCluster* c = find(survival_, prev.label);
        if (c && rng.bernoulli(c->mass)) out.push_back({c->label, c->density.sample(rng)});
    }
    for (const auto& c : birth_) {
        if (rng.bernoulli(c.mass)) out.push_back({c.label, c.density.sample(rng)});
    }
    sort_by_label(out);
    return out;
}

double LmbProposal::log_q(const LabeledSet& X_new, const LabeledSet& X_prev) const {
    double lq = 0.0;
    size_t covered = 0;
    for (const auto& prev : X_prev) {
        const ProposalCluster* c = find(survival_, prev.label);
        const LabeledState* cur = find_label(X_new, prev.label);
        if (cur) {
            ++covered;
            if (!c) return kNegInf;
            lq += std::log(c->mass) + c->density.logpdf(cur->x);
        } else if (c) {
            lq += std::log1p(-c->mass);
        }
    }
    for (const auto& c : birth_) {
        const LabeledState* cur = find_label(X_new, c.label);
        if (cur) {
            ++covered;
            lq += std::log(c.mass) + c.density.logpdf(cur->x);
        } else {
            lq += std::log1p(-c.mass);
        }
    }
    if (covered != X_new.size()) return kNegInf;
    return lq;
}

VovoProposal VovoProposal::build(std::span<const double> rho,
                                 const std::vector<GaussianCluster>& clusters) {
    VovoProposal p;
    for (const auto& c : clusters) p.clusters_.push_back({c.label, c.mass, MvNormal(c.mean, c.cov)});
    std::sort(p.clusters_.begin(), p.clusters_.end(),
              [](const ProposalCluster& a, const ProposalCluster& b) { return a.label < b.label; });
    for (size_t i = 1; i < p.clusters_.size(); ++i) {
        if (p.clusters_[i].label == p.clusters_[i - 1].label) {
            throw std::invalid_argument("duplicate cluster label");
        }
    }

    const size_t L = p.clusters_.size();
    double total = 0.0;
    for (const auto& c : p.clusters_) total += c.mass;
    if (total <= 0.0) {
        if (L > 0 || rho.empty() || rho[0] <= 0.0) {
            throw std::invalid_argument("no cluster mass to build proposal from");
        }
    }
    for (auto& c : p.clusters_) c.mass /= total;

    p.rho_.assign(rho.begin(), rho.begin() + std::min(rho.size(), L + 1));
    if (p.rho_.empty()) p.rho_.push_back(1.0);
    double rs = 0.0;
    for (double v : p.rho_) rs += v;
    if (rs <= 0.0) throw std::invalid_argument("cardinality all zero after truncation");
    for (double& v : p.rho_) v /= rs;

    // suffix_[j][t] = e_t over r_j..r_{L-1}; esf_ = suffix_[0]
    p.suffix_.assign(L + 1, std::vector<double>(L + 1, 0.0));
    p.suffix_[L][0] = 1.0;
    for (size_t j = L; j-- > 0;) {
        const double r = p.clusters_[j].mass;
        p.suffix_[j][0] = 1.0;
        for (size_t t = 1; t <= L - j; ++t) {
            p.suffix_[j][t] = p.suffix_[j + 1][t] + r * p.suffix_[j + 1][t - 1];
        }
    }
    p.esf_ = p.suffix_[0];
    return p;
}

std::vector<size_t> VovoProposal::sample_subset(size_t n, RngStream& rng) const {
    std::vector<size_t> chosen;
    chosen.reserve(n);
    size_t t = n;
    for (size_t j = 0; j < clusters_.size() && t > 0; ++j) {
        const double p_incl = clusters_[j].mass * suffix_[j + 1][t - 1] / suffix_[j][t];
        if (rng.uniform() < p_incl) {
            chosen.push_back(j);
            --t;
        }
    }
    return chosen;
}

LabeledSet VovoProposal::sample(RngStream& rng) const {
    const double a = rng.uniform();
    size_t n = rho_.size() - 1;
    double acc = 0.0;
    bool hit = false;
    for (size_t i = 0; i < rho_.size(); ++i) {
        acc += rho_[i];
        if (a < acc) {
            n = i;
            hit = true;
            break;
        }
    }
    while (!hit && n > 0 && rho_[n] <= 0.0) --n;

    LabeledSet out;
    for (size_t j : sample_subset(n, rng)) {
        out.push_back({clusters_[j].label, clusters_[j].density.sample(rng)});
    }
    sort_by_label(out);
    return out;
}

double VovoProposal::log_q(const LabeledSet& X_new) const {
    const size_t n = X_new.size();
    if (n >= rho_.size() || rho_[n] <= 0.0) return kNegInf;

    double lq = std::log(rho_[n]) - std::log(esf_[n]);
    for (const auto& t : X_new) {
        auto it = std::lower_bound(
            clusters_.begin(), clusters_.end(), t.label,
            [](const ProposalCluster& c, const Label& l) { return c.label < l; });
        if (it == clusters_.end() || it->label != t.label) return kNegInf;
        lq += std::log(it->mass) + it->density.logpdf(t.x);
    }
    return lq;
}

}  // namespace sptrack
