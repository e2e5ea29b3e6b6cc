#include "sptrack/radar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sptrack/numerics.hpp"

namespace sptrack {

RadarSensor::RadarSensor(std::vector<double> range_centroids, std::vector<double> azimuth_centroids,
                         double range_resolution, double azimuth_resolution, double sigma_w2,
                         double amplitude, int gate_cells)
    : ranges_(std::move(range_centroids)),
      azimuths_(std::move(azimuth_centroids)),
      R_(range_resolution * range_resolution),
      B_(azimuth_resolution * azimuth_resolution),
      sigma_w2_(sigma_w2),
      amplitude_(amplitude),
      gate_(gate_cells) {
    if (ranges_.empty() || azimuths_.empty()) throw std::invalid_argument("empty grid axis");
    if (sigma_w2_ <= 0.0) throw std::invalid_argument("sigma_w2 must be positive");
    m_ = static_cast<int>(ranges_.size() * azimuths_.size());
}

void RadarSensor::set_doppler_axis(std::vector<double> doppler_centroids, double doppler_resolution) {
    dopplers_ = std::move(doppler_centroids);
    D_ = doppler_resolution * doppler_resolution;
    m_ = static_cast<int>(ranges_.size() * azimuths_.size() * std::max<size_t>(dopplers_.size(), 1));
}

int RadarSensor::cell_index(int ir, int ib, int id) const {
    const int nb = static_cast<int>(azimuths_.size());
    if (dopplers_.empty()) return ir * nb + ib;
    return (ir * nb + ib) * static_cast<int>(dopplers_.size()) + id;
}

void RadarSensor::cell_coords(int idx, int& ir, int& ib, int& id) const {
    const int nb = static_cast<int>(azimuths_.size());
    if (dopplers_.empty()) {
        id = 0;
        ir = idx / nb;
        ib = idx % nb;
        return;
    }
    const int nd = static_cast<int>(dopplers_.size());
    id = idx % nd;
    ib = (idx / nd) % nb;
    ir = idx / (nd * nb);
}

void RadarSensor::measurement_coords(const Vec& x, double& r, double& b, double& d) const {
    const double px = x(0), vx = x(1), py = x(2), vy = x(3);
    r = std::sqrt(px * px + py * py);
    b = std::atan2(py, px);
    d = r > 0.0 ? (px * vx + py * vy) / r : 0.0;
}

void RadarSensor::axis_window(const std::vector<double>& centroids, double coord, int& lo, int& hi) const {
    auto it = std::lower_bound(centroids.begin(), centroids.end(), coord);
    int nearest;
    if (it == centroids.begin()) {
        nearest = 0;
    } else if (it == centroids.end()) {
        nearest = static_cast<int>(centroids.size()) - 1;
    } else {
        const int above = static_cast<int>(it - centroids.begin());
        nearest = (coord - centroids[above - 1] <= centroids[above] - coord) ? above - 1 : above;
    }
    lo = std::max(0, nearest - gate_);
    hi = std::min(static_cast<int>(centroids.size()) - 1, nearest + gate_);
}

std::vector<int> RadarSensor::template_cells(const Vec& x) const {
    double r, b, d;
    measurement_coords(x, r, b, d);
    int rlo, rhi, blo, bhi;
    axis_window(ranges_, r, rlo, rhi);
    axis_window(azimuths_, b, blo, bhi);
    int dlo = 0, dhi = 0;
    if (!dopplers_.empty()) axis_window(dopplers_, d, dlo, dhi);

    std::vector<int> cells;
    cells.reserve(static_cast<size_t>((rhi - rlo + 1) * (bhi - blo + 1) * (dhi - dlo + 1)));
    for (int ir = rlo; ir <= rhi; ++ir) {
        for (int ib = blo; ib <= bhi; ++ib) {
            for (int id = dlo; id <= dhi; ++id) cells.push_back(cell_index(ir, ib, id));
        }
    }
    std::sort(cells.begin(), cells.end());
    return cells;
}

SparseCells RadarSensor::psf(const Vec& x) const {
    double r, b, d;
    measurement_coords(x, r, b, d);
    int rlo, rhi, blo, bhi;
    axis_window(ranges_, r, rlo, rhi);
    axis_window(azimuths_, b, blo, bhi);
    int dlo = 0, dhi = 0;
    if (!dopplers_.empty()) axis_window(dopplers_, d, dlo, dhi);

    std::vector<double> hr(static_cast<size_t>(rhi - rlo + 1));
    for (int ir = rlo; ir <= rhi; ++ir) {
        const double dr = ranges_[static_cast<size_t>(ir)] - r;
        hr[static_cast<size_t>(ir - rlo)] = std::exp(-dr * dr / (2.0 * R_));
    }
    std::vector<double> hb(static_cast<size_t>(bhi - blo + 1));
    for (int ib = blo; ib <= bhi; ++ib) {
        const double db = azimuths_[static_cast<size_t>(ib)] - b;
        hb[static_cast<size_t>(ib - blo)] = std::exp(-db * db / (2.0 * B_));
    }
    std::vector<double> hd(static_cast<size_t>(dhi - dlo + 1), 1.0);
    if (!dopplers_.empty()) {
        for (int id = dlo; id <= dhi; ++id) {
            const double dd = dopplers_[static_cast<size_t>(id)] - d;
            hd[static_cast<size_t>(id - dlo)] = std::exp(-dd * dd / (2.0 * D_));
        }
    }

    SparseCells out;
    out.idx.reserve(hr.size() * hb.size() * hd.size());
    out.val.reserve(out.idx.capacity());
    for (int ir = rlo; ir <= rhi; ++ir) {
        for (int ib = blo; ib <= bhi; ++ib) {
            const double hrb = hr[static_cast<size_t>(ir - rlo)] * hb[static_cast<size_t>(ib - blo)];
            for (int id = dlo; id <= dhi; ++id) {
                out.idx.push_back(cell_index(ir, ib, id));
                out.val.push_back(hrb * hd[static_cast<size_t>(id - dlo)]);
            }
        }
    }
    return out;
}

SparseCells RadarSensor::gamma_map(const Vec& x) const {
    SparseCells g = psf(x);
    const double a2 = target_amplitude(x) * target_amplitude(x);
    for (double& v : g.val) v = a2 * v * v;
    return g;
}

Vec RadarSensor::amplitude_sum(const LabeledSet& X) const {
    Vec s = Vec::Zero(m_);
    for (const auto& t : X) {
        const SparseCells h = psf(t.x);
        const double a = target_amplitude(t.x);
        for (size_t j = 0; j < h.size(); ++j) s(h.idx[j]) += a * h.val[j];
    }
    return s;
}

Vec RadarSensor::deterministic_signal(const LabeledSet& X) const {
    Vec s = amplitude_sum(X);
    return s.cwiseProduct(s);
}

Vec RadarSensor::simulate_measurement(const LabeledSet& X, RngStream& rng) const {
    Vec re = Vec::Zero(m_), im = Vec::Zero(m_);
    for (const auto& t : X) {
        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        const double c = std::cos(theta), s = std::sin(theta);
        const SparseCells h = psf(t.x);
        const double a = target_amplitude(t.x);
        for (size_t j = 0; j < h.size(); ++j) {
            re(h.idx[j]) += a * h.val[j] * c;
            im(h.idx[j]) += a * h.val[j] * s;
        }
    }
    const double sw = std::sqrt(sigma_w2_);
    Vec z(m_);
    for (int i = 0; i < m_; ++i) {
        const double zr = re(i) + sw * rng.normal();
        const double zi = im(i) + sw * rng.normal();
        z(i) = zr * zr + zi * zi;
    }
    return z;
}

double RadarSensor::log_likelihood(const Vec& z, const LabeledSet& X) const {
    if (X.empty()) return 0.0;

    // union of templates with the co-phased amplitude sums, kept sparse
    std::vector<std::pair<int, double>> cells;
    for (const auto& t : X) {
        const SparseCells h = psf(t.x);
        const double a = target_amplitude(t.x);
        for (size_t j = 0; j < h.size(); ++j) cells.emplace_back(h.idx[j], a * h.val[j]);
    }
    std::sort(cells.begin(), cells.end());

    double ll = 0.0;
    size_t j = 0;
    while (j < cells.size()) {
        const int idx = cells[j].first;
        double amp = 0.0;
        for (; j < cells.size() && cells[j].first == idx; ++j) amp += cells[j].second;
        const double zhat = amp * amp;
        ll += -zhat / (2.0 * sigma_w2_) + log_bessel_i0(std::sqrt(z(idx) * zhat) / sigma_w2_);
    }
    return ll;
}

}  // namespace sptrack
