#include "sptrack/sa_cphd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "sptrack/cardinality.hpp"
#include "sptrack/numerics.hpp"

namespace sptrack {

namespace {

// Cholesky with an escalating jitter ladder; throws if the matrix stays
// indefinite after regularization.
Eigen::LLT<Mat> safe_llt(Mat S) {
    Eigen::LLT<Mat> llt(S);
    if (llt.info() == Eigen::Success) return llt;
    const double scale = std::max(S.diagonal().maxCoeff(), 1.0);
    for (double jitter = 1e-12; jitter <= 1e-3; jitter *= 100.0) {
        Mat Sj = S + jitter * scale * Mat::Identity(S.rows(), S.cols());
        llt.compute(Sj);
        if (llt.info() == Eigen::Success) return llt;
    }
    throw std::runtime_error("covariance not positive definite after regularization");
}

double llt_log_det(const Eigen::LLT<Mat>& llt) {
    double ld = 0.0;
    const auto& L = llt.matrixLLT();
    for (int i = 0; i < L.rows(); ++i) ld += std::log(L(i, i));
    return 2.0 * ld;
}

/**
 * Gaussian evaluator for S = diag(m) + U diag(lam) U^T, m > 0, lam of any
 * sign as long as S stays positive definite. Whitening by diag(m)^{-1/2} and
 * projecting onto the column space of the whitened U reduces the log-det and
 * quadratic form to an r x r problem, r = min(rows, cols), with no inverse
 * of lam anywhere.
 */
class DiagLowRank {
public:
    DiagLowRank(const Vec& m, const Mat& U, const Vec& lam)
        : msi_(m.cwiseSqrt().cwiseInverse()), log_det_(m.array().log().sum()) {
        const Eigen::Index A = m.size(), K = lam.size();
        r_ = std::min(A, K);
        if (r_ == 0) return;
        const Mat P = msi_.asDiagonal() * U;
        Eigen::HouseholderQR<Mat> qr(P);
        Qt_ = (qr.householderQ() * Mat::Identity(A, r_)).transpose();
        const Mat R = qr.matrixQR().topRows(r_).triangularView<Eigen::Upper>();
        const Mat H = Mat::Identity(r_, r_) + R * lam.asDiagonal() * R.transpose();
        const auto llt = safe_llt(H);
        log_det_ += llt_log_det(llt);
        J_ = Mat::Identity(r_, r_) - llt.solve(Mat::Identity(r_, r_));
    }

    double log_det() const { return log_det_; }

    // v^T S^{-1} v for a dense residual
    double quad(const Vec& v) const {
        const Vec y = msi_.cwiseProduct(v);
        if (r_ == 0) return y.squaredNorm();
        const Vec c = Qt_ * y;
        return y.squaredNorm() - c.dot(J_ * c);
    }

    const Vec& whitener() const { return msi_; }
    const Mat& basis_t() const { return Qt_; }  // r x active, columns contiguous
    const Mat& correction() const { return J_; }
    Eigen::Index rank() const { return r_; }

private:
    Vec msi_;
    double log_det_;
    Eigen::Index r_ = 0;
    Mat Qt_;
    Mat J_;
};

}  // namespace

SaCphd::SaCphd(const GammaSource& gs, const MotionModel& motion, const BirthModel& birth,
               SaCphdOptions opt)
    : gs_(gs), motion_(motion), birth_(birth), opt_(opt) {}

SaCphdState SaCphd::derive(std::span<const LabeledSet> sets,
                           std::span<const double> weights) const {
    SaCphdState s;
    s.rho.assign(static_cast<size_t>(opt_.n_max) + 1, 0.0);
    double total = 0.0;
    for (size_t i = 0; i < sets.size(); ++i) {
        const size_t n = std::min(sets[i].size(), static_cast<size_t>(opt_.n_max));
        s.rho[n] += weights[i];
        total += weights[i];
        for (const auto& t : sets[i]) s.cloud.push_back({t.x, weights[i], t.label});
    }
    if (total > 0.0) {
        for (double& v : s.rho) v /= total;
        for (auto& p : s.cloud) p.w /= total;
    } else {
        s.rho[0] = 1.0;
    }
    return s;
}

SaCphdState SaCphd::predict(const SaCphdState& s, int k, double p_survive,
                            RngStream& rng) const {
    SaCphdState out;

    std::vector<double> card = binomial_thinning(s.rho, p_survive);
    std::vector<double> birth_r(static_cast<size_t>(birth_.size()));
    for (int i = 0; i < birth_.size(); ++i) birth_r[static_cast<size_t>(i)] = birth_.component(i).r;
    card = convolve_pmf(card, poisson_binomial_pmf(birth_r));
    out.rho = truncate_pmf(card, static_cast<size_t>(opt_.n_max));

    out.cloud.reserve(s.cloud.size() + static_cast<size_t>(birth_.size() * opt_.n_birth_particles));
    for (const auto& p : s.cloud) {
        out.cloud.push_back({motion_.sample_transition(p.x, rng),
                             p.w * motion_.survival_prob(p.x), p.label});
    }
    for (int i = 0; i < birth_.size(); ++i) {
        const auto& bc = birth_.component(i);
        const double w = bc.r / static_cast<double>(opt_.n_birth_particles);
        const Label l{k, i};
        for (int j = 0; j < opt_.n_birth_particles; ++j) {
            out.cloud.push_back({bc.density.sample(rng), w, l});
        }
    }
    return out;
}

SaCphdMoments SaCphd::moments(const PhdCloud& cloud, std::span<const double> rho) const {
    SaCphdMoments mo;
    mo.N = pmf_mean(rho);
    mo.var = pmf_var(rho);
    for (size_t n = 2; n < rho.size(); ++n) {
        const double nd = static_cast<double>(n);
        mo.G2 += nd * (nd - 1.0) * rho[n];
        mo.G3 += nd * (nd - 1.0) * (nd - 2.0) * rho[n];
    }

    std::vector<SparseCells> gammas(cloud.size());
    std::vector<int> local(static_cast<size_t>(gs_.num_cells()), -1);
    for (size_t j = 0; j < cloud.size(); ++j) {
        gammas[j] = gs_.gamma(cloud[j].x);
        for (int c : gammas[j].idx) local[static_cast<size_t>(c)] = 0;
    }
    for (size_t c = 0; c < local.size(); ++c) {
        if (local[c] == 0) {
            local[c] = static_cast<int>(mo.active.size());
            mo.active.push_back(static_cast<int>(c));
        }
    }

    const int A = static_cast<int>(mo.active.size());
    mo.mu_hat = Vec::Zero(A);
    mo.sig_diag = Vec::Zero(A);
    mo.d_within = Vec::Zero(A);
    double mass = 0.0;
    for (const auto& p : cloud) mass += p.w;
    if (mass <= 0.0) {
        mo.gbar = Mat::Zero(A, 0);
        return mo;
    }

    std::map<Label, Eigen::Index> label_col;
    for (const auto& p : cloud) label_col.emplace(p.label, static_cast<Eigen::Index>(label_col.size()));
    const Eigen::Index L = static_cast<Eigen::Index>(label_col.size());
    mo.gbar = Mat::Zero(A, L);
    mo.p.assign(static_cast<size_t>(L), 0.0);

    for (size_t j = 0; j < cloud.size(); ++j) {
        const double sw = cloud[j].w / mass;
        const Eigen::Index l = label_col.at(cloud[j].label);
        mo.p[static_cast<size_t>(l)] += sw;
        const auto& g = gammas[j];
        for (size_t a = 0; a < g.size(); ++a) {
            const int ia = local[static_cast<size_t>(g.idx[a])];
            mo.mu_hat(ia) += sw * g.val[a];
            mo.sig_diag(ia) += sw * g.val[a] * g.val[a];
            mo.gbar(ia, l) += sw * g.val[a];
        }
    }
    mo.d_within = mo.sig_diag;
    for (Eigen::Index l = 0; l < L; ++l) {
        const double pl = mo.p[static_cast<size_t>(l)];
        if (pl > 0.0) {
            mo.gbar.col(l) /= pl;
            mo.d_within -= pl * mo.gbar.col(l).cwiseAbs2();
        }
    }
    mo.d_within = mo.d_within.cwiseMax(0.0);
    return mo;
}

SaCphdState SaCphd::update(const SaCphdState& s, const Vec& z) const {
    if (s.cloud.empty()) {
        SaCphdState out = s;
        double total = 0.0;
        for (double v : out.rho) total += v;
        if (total > 0.0) {
            for (double& v : out.rho) v /= total;
        } else {
            out.rho.assign(out.rho.size(), 0.0);
            out.rho[0] = 1.0;
        }
        return out;
    }

    const SaCphdMoments mo = moments(s.cloud, s.rho);
    const int A = static_cast<int>(mo.active.size());
    const Eigen::Index L = static_cast<Eigen::Index>(mo.p.size());
    const double s2 = opt_.sigma_n * opt_.sigma_n;
    const double log2pi = std::log(2.0 * M_PI);

    Vec zA(A);
    for (int a = 0; a < A; ++a) zA(a) = z(mo.active[static_cast<size_t>(a)]);

    // every covariance below is sigma_n^2 I + alpha C + beta mu mu^T with
    // alpha, beta >= 0 and C = diag(d_within) + between-label covariance of
    // the mean templates, i.e. diag(s2 + alpha d_within) plus outer products
    // of [gbar_1 .. gbar_L, mu_hat]
    Mat U(A, L + 1);
    U.leftCols(L) = mo.gbar;
    U.col(L) = mo.mu_hat;
    Vec pv(L + 1);
    for (Eigen::Index l = 0; l < L; ++l) pv(l) = mo.p[static_cast<size_t>(l)];
    pv(L) = 0.0;
    auto lam_for = [&](double alpha, double beta) {
        Vec lam = alpha * pv;
        lam(L) = beta - alpha;
        return lam;
    };

    // cardinality: N(z - n mu_hat; sigma_r + n C)
    std::vector<double> log_rho(s.rho.size(), kNegInf);
    for (size_t n = 0; n < s.rho.size(); ++n) {
        if (s.rho[n] <= 0.0) continue;
        const double nd = static_cast<double>(n);
        const DiagLowRank S(Vec(s2 + nd * mo.d_within.array()), U, lam_for(nd, 0.0));
        log_rho[n] =
            std::log(s.rho[n]) - 0.5 * (A * log2pi + S.log_det() + S.quad(zA - nd * mo.mu_hat));
    }

    SaCphdState out;
    out.rho.resize(s.rho.size());
    std::vector<double> tmp = log_rho;
    normalize_log_weights(tmp);
    out.rho = tmp;

    // common denominator N(z - N mu_hat; sigma_r + N C + var mu mu^T)
    const DiagLowRank Sden(Vec(s2 + mo.N * mo.d_within.array()), U, lam_for(mo.N, mo.var));
    const double log_den =
        -0.5 * (A * log2pi + Sden.log_det() + Sden.quad(zA - mo.N * mo.mu_hat));

    // per-particle numerator N(z - gamma(x) - mu_cond; sigma_r + sigma_cond);
    // the mu mu^T coefficient is the variance of the size-biased count of the
    // other targets, so the alpha/beta split stays nonnegative
    const double alpha = mo.N > 0.0 ? mo.G2 / mo.N : 0.0;
    const double beta = mo.N > 0.0 ? mo.G3 / mo.N + alpha - alpha * alpha : 0.0;
    const DiagLowRank Snum(Vec(s2 + alpha * mo.d_within.array()), U, lam_for(alpha, beta));
    const double log_det_num = Snum.log_det();
    const Vec u = zA - mo.mu_cond();
    const Vec& msi = Snum.whitener();
    const Mat& Qt = Snum.basis_t();
    const Mat& J = Snum.correction();
    const Vec yu = msi.cwiseProduct(u);
    const Vec cu = Qt * yu;
    const double base = yu.squaredNorm();

    std::vector<int> local(static_cast<size_t>(gs_.num_cells()), -1);
    for (int a = 0; a < A; ++a) local[static_cast<size_t>(mo.active[static_cast<size_t>(a)])] = a;

    out.cloud = s.cloud;
    std::vector<double> lr(out.cloud.size(), kNegInf);
    double lr_max = kNegInf;
    Vec cj(Snum.rank());
    for (size_t j = 0; j < out.cloud.size(); ++j) {
        if (out.cloud[j].w <= 0.0) continue;
        const SparseCells g = gs_.gamma(out.cloud[j].x);
        // whitened residual y = yu - msi.*gamma, sparse correction per cell
        double yy = base;
        cj = cu;
        for (size_t a = 0; a < g.size(); ++a) {
            const int ia = local[static_cast<size_t>(g.idx[a])];
            const double sa = msi(ia) * g.val[a];
            yy += sa * sa - 2.0 * sa * yu(ia);
            cj.noalias() -= sa * Q.row(ia).transpose();
        }
        const double quad = yy - cj.dot(J * cj);
        lr[j] = -0.5 * (A * log2pi + log_det_num + quad) - log_den;
        lr_max = std::max(lr_max, lr[j]);
    }
    // apply the ratios shifted by their maximum: scale-free, so a sharp scan
    // cannot blow the weights up, and the clamp bounds the dynamic range
    if (std::isfinite(lr_max)) {
        for (size_t j = 0; j < out.cloud.size(); ++j) {
            out.cloud[j].w *= std::exp(std::max(lr[j] - lr_max, -opt_.log_ratio_clamp));
        }
    }

    // the exact filter's intensity integrates to the cardinality mean; the
    // sampled update only preserves that in expectation, so project it back
    double mass = 0.0;
    for (const auto& p : out.cloud) mass += p.w;
    if (mass > 0.0) {
        const double scale = pmf_mean(out.rho) / mass;
        for (auto& p : out.cloud) p.w *= scale;
    }
    return out;
}

std::vector<GaussianCluster> SaCphd::extract_clusters(const SaCphdState& s, int k,
                                                      const MassClamps& clamps) const {
    std::map<Label, std::vector<const PhdParticle*>> by_label;
    for (const auto& p : s.cloud) by_label[p.label].push_back(&p);

    std::vector<GaussianCluster> out;
    for (const auto& [label, parts] : by_label) {
        double mass = 0.0;
        for (const auto* p : parts) mass += p->w;
        if (mass <= 0.0) continue;

        const int dim = static_cast<int>(parts.front()->x.size());
        Vec mean = Vec::Zero(dim);
        for (const auto* p : parts) mean += (p->w / mass) * p->x;
        Mat cov = Mat::Zero(dim, dim);
        for (const auto* p : parts) {
            const Vec dx = p->x - mean;
            cov += (p->w / mass) * dx * dx.transpose();
        }
        cov += opt_.cov_floor * Mat::Identity(dim, dim);

        GaussianCluster gc;
        gc.label = label;
        gc.mean = std::move(mean);
        gc.cov = std::move(cov);
        gc.raw_mass = mass;
        gc.is_birth = (label.birth_time == k);
        gc.mass = gc.is_birth ? std::clamp(mass, clamps.pb_min, clamps.pb_max)
                              : std::clamp(mass, clamps.ps_min, clamps.ps_max);
        out.push_back(std::move(gc));
    }
    return out;
}

}  // namespace sptrack
