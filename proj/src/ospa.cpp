#include "sptrack/ospa.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sptrack {

double min_cost_assignment(const Mat& cost) {
    const int nr = static_cast<int>(cost.rows());
    const int nc = static_cast<int>(cost.cols());
    if (nr == 0) return 0.0;
    if (nr > nc) throw std::invalid_argument("assignment needs rows <= cols");
    const double inf = std::numeric_limits<double>::infinity();

    // shortest-augmenting-path Hungarian with row/column potentials
    std::vector<double> u(static_cast<size_t>(nr) + 1, 0.0), v(static_cast<size_t>(nc) + 1, 0.0);
    std::vector<int> match(static_cast<size_t>(nc) + 1, 0), way(static_cast<size_t>(nc) + 1, 0);

    for (int i = 1; i <= nr; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(nc) + 1, inf);
        std::vector<bool> used(static_cast<size_t>(nc) + 1, false);
        do {
            used[static_cast<size_t>(j0)] = true;
            const int i0 = match[static_cast<size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= nc; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= nc; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }

    double total = 0.0;
    for (int j = 1; j <= nc; ++j) {
        if (match[static_cast<size_t>(j)] != 0) total += cost(match[static_cast<size_t>(j)] - 1, j - 1);
    }
    return total;
}

double ospa(const std::vector<Vec>& X, const std::vector<Vec>& Y, const OspaParams& params) {
    const std::vector<Vec>& A = X.size() <= Y.size() ? X : Y;
    const std::vector<Vec>& B = X.size() <= Y.size() ? Y : X;
    const size_t m = A.size(), n = B.size();
    if (n == 0) return 0.0;

    const double c = params.cutoff, p = params.order;
    double total = std::pow(c, p) * static_cast<double>(n - m);
    if (m > 0) {
        Mat cost(m, n);
        for (size_t i = 0; i < m; ++i) {
            for (size_t j = 0; j < n; ++j) {
                cost(static_cast<int>(i), static_cast<int>(j)) =
                    std::pow(std::min((A[i] - B[j]).norm(), c), p);
            }
        }
        total += min_cost_assignment(cost);
    }
    return std::pow(total / static_cast<double>(n), 1.0 / p);
}

std::vector<StepAggregate> aggregate(const std::vector<RunRecord>& runs) {
    if (runs.empty()) return {};
    const size_t K = runs.front().n_hat.size();
    for (const auto& r : runs) {
        if (r.n_hat.size() != K || r.ospa.size() != K) {
            throw std::invalid_argument("ragged run records");
        }
    }

    std::vector<StepAggregate> out(K);
    const double R = static_cast<double>(runs.size());
    for (size_t k = 0; k < K; ++k) {
        double sn = 0.0, so = 0.0;
        for (const auto& r : runs) {
            sn += r.n_hat[k];
            so += r.ospa[k];
        }
        out[k].mean_n_hat = sn / R;
        out[k].mean_ospa = so / R;
        double vn = 0.0, vo = 0.0;
        for (const auto& r : runs) {
            vn += (r.n_hat[k] - out[k].mean_n_hat) * (r.n_hat[k] - out[k].mean_n_hat);
            vo += (r.ospa[k] - out[k].mean_ospa) * (r.ospa[k] - out[k].mean_ospa);
        }
        out[k].std_n_hat = runs.size() > 1 ? std::sqrt(vn / (R - 1.0)) : 0.0;
        out[k].std_ospa = runs.size() > 1 ? std::sqrt(vo / (R - 1.0)) : 0.0;
    }
    return out;
}

}  // namespace sptrack
