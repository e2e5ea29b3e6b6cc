#include "sptrack/rfs.hpp"

#include <algorithm>
#include <cmath>

#include "sptrack/numerics.hpp"

namespace sptrack {

void sort_by_label(LabeledSet& X) {
    std::sort(X.begin(), X.end(),
              [](const LabeledState& a, const LabeledState& b) { return a.label < b.label; });
}

bool labels_distinct(const LabeledSet& X) {
    std::vector<Label> ls = labels_of(X);
    std::sort(ls.begin(), ls.end());
    return std::adjacent_find(ls.begin(), ls.end()) == ls.end();
}

std::vector<Label> labels_of(const LabeledSet& X) {
    std::vector<Label> out;
    out.reserve(X.size());
    for (const auto& s : X) out.push_back(s.label);
    return out;
}

const LabeledState* find_label(const LabeledSet& X, const Label& l) {
    for (const auto& s : X) {
        if (s.label == l) return &s;
    }
    return nullptr;
}

std::vector<double> esf(std::span<const double> vals) {
    std::vector<double> e(vals.size() + 1, 0.0);
    e[0] = 1.0;
    size_t used = 0;
    for (double v : vals) {
        ++used;
        for (size_t j = used; j >= 1; --j) e[j] += v * e[j - 1];
    }
    return e;
}

double log_lmb_weight(std::span<const Label> L, std::span<const WeightedLabel> comps) {
    double lw = 0.0;
    size_t matched = 0;
    for (const auto& c : comps) {
        const bool in = std::find(L.begin(), L.end(), c.label) != L.end();
        if (in) {
            ++matched;
            lw += std::log(c.r);
        } else {
            lw += std::log1p(-c.r);
        }
    }
    if (matched != L.size()) return kNegInf;
    return lw;
}

double log_cb_weight(std::span<const Label> L, const CardinalityBalancedWeight& w) {
    const size_t n = L.size();
    if (n >= w.rho.size() || w.rho[n] <= 0.0) return kNegInf;

    double log_prod = 0.0;
    size_t matched = 0;
    std::vector<double> rs;
    rs.reserve(w.comps.size());
    for (const auto& c : w.comps) {
        rs.push_back(c.r);
        if (std::find(L.begin(), L.end(), c.label) != L.end()) {
            ++matched;
            log_prod += std::log(c.r);
        }
    }
    if (matched != n) return kNegInf;

    const std::vector<double> e = esf(rs);
    if (n >= e.size() || e[n] <= 0.0) return kNegInf;
    return std::log(w.rho[n]) + log_prod - std::log(e[n]);
}

double log_multitarget_transition(const LabeledSet& to, const LabeledSet& from, int k,
                                  const MotionModel& motion, const BirthModel& birth) {
    if (!labels_distinct(to)) return kNegInf;

    double lf = 0.0;
    for (const auto& prev : from) {
        const LabeledState* cur = find_label(to, prev.label);
        const double ps = motion.survival_prob(prev.x);
        if (cur) {
            lf += std::log(ps) + motion.log_transition(cur->x, prev.x);
        } else {
            lf += std::log1p(-ps);
        }
    }

    std::vector<bool> born(static_cast<size_t>(birth.size()), false);
    for (const auto& cur : to) {
        if (find_label(from, cur.label)) continue;
        if (!birth.is_birth_label(cur.label, k)) return kNegInf;
        born[static_cast<size_t>(cur.label.index)] = true;
        const auto& bc = birth.component(cur.label.index);
        lf += std::log(bc.r) + bc.density.logpdf(cur.x);
    }
    for (int i = 0; i < birth.size(); ++i) {
        if (!born[static_cast<size_t>(i)]) lf += std::log1p(-birth.component(i).r);
    }
    return lf;
}

}  // namespace sptrack
