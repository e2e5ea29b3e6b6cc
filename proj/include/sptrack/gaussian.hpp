#ifndef SPTRACK_GAUSSIAN_HPP
#define SPTRACK_GAUSSIAN_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "sptrack/rng.hpp"
#include "sptrack/types.hpp"

namespace sptrack {

// Multivariate normal with precomputed Cholesky factor.
class MvNormal {
public:
    MvNormal(Vec mean, const Mat& cov) : mean_(std::move(mean)), llt_(cov) {
        double ld = 0.0;
        const auto& L = llt_.matrixLLT();
        for (int i = 0; i < L.rows(); ++i) ld += std::log(L(i, i));
        log_det_half_ = ld;
        log_norm_ = -0.5 * static_cast<double>(cov.rows()) * std::log(2.0 * M_PI) - ld;
    }

    const Vec& mean() const { return mean_; }
    int dim() const { return static_cast<int>(mean_.size()); }

    double logpdf(const Vec& x) const {
        const Vec d = x - mean_;
        const Vec y = llt_.matrixL().solve(d);
        return log_norm_ - 0.5 * y.squaredNorm();
    }

    Vec sample(RngStream& rng) const {
        Vec z(dim());
        for (int i = 0; i < dim(); ++i) z(i) = rng.normal();
        return mean_ + llt_.matrixL() * z;
    }

private:
    Vec mean_;
    Eigen::LLT<Mat> llt_;
    double log_det_half_ = 0.0;
    double log_norm_ = 0.0;
};

inline double gaussian_logpdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

}  // namespace sptrack

#endif
