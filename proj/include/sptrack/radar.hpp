#ifndef SPTRACK_RADAR_HPP
#define SPTRACK_RADAR_HPP

#include <vector>

#include "sptrack/rfs.hpp"
#include "sptrack/rng.hpp"
#include "sptrack/types.hpp"

namespace sptrack {

// Sparse per-cell values on a target template, indices sorted ascending.
struct SparseCells {
    std::vector<int> idx;
    std::vector<double> val;

    size_t size() const { return idx.size(); }
};

/**
 * Radar power-return sensor on a range x azimuth (x optional Doppler) cell
 * grid.
 *
 * A target illuminates the cells of its template through a Gaussian point
 * spread function; the receiver observes the squared modulus of the summed
 * complex echoes plus circularly symmetric complex noise of variance
 * 2*sigma_w2 per cell. There is no detector: the filter consumes raw power.
 */
class RadarSensor {
public:
    // Resolutions are per-axis scales (m, rad, m/s); the PSF exponent
    // denominators R, B, D are their squares.
    RadarSensor(std::vector<double> range_centroids, std::vector<double> azimuth_centroids,
                double range_resolution, double azimuth_resolution, double sigma_w2,
                double amplitude, int gate_cells = 3);

    void set_doppler_axis(std::vector<double> doppler_centroids, double doppler_resolution);

    int num_cells() const { return m_; }
    int gate_cells() const { return gate_; }
    double sigma_w2() const { return sigma_w2_; }
    double amplitude() const { return amplitude_; }
    const std::vector<double>& range_centroids() const { return ranges_; }
    const std::vector<double>& azimuth_centroids() const { return azimuths_; }
    const std::vector<double>& doppler_centroids() const { return dopplers_; }
    bool has_doppler() const { return !dopplers_.empty(); }

    int cell_index(int ir, int ib, int id = 0) const;
    void cell_coords(int idx, int& ir, int& ib, int& id) const;

    // Amplitude of one target: the modulus state component in 5-D mode,
    // otherwise the configured constant.
    double target_amplitude(const Vec& x) const {
        return x.size() >= 5 ? x(4) : amplitude_;
    }

    // Measurement-space coordinates of a state: range, azimuth, range rate.
    void measurement_coords(const Vec& x, double& r, double& b, double& d) const;

    std::vector<int> template_cells(const Vec& x) const;

    // Point spread function on the template cells.
    SparseCells psf(const Vec& x) const;

    // Additive expected-power contribution of one target: amplitude^2 * h^2
    // on its template cells.
    SparseCells gamma_map(const Vec& x) const;

    // Co-phased amplitude sum per cell; squaring gives the deterministic
    // signal power z_hat.
    Vec amplitude_sum(const LabeledSet& X) const;
    Vec deterministic_signal(const LabeledSet& X) const;

    // One scan: independent uniform phase per target, complex noise per cell.
    Vec simulate_measurement(const LabeledSet& X, RngStream& rng) const;

    /**
     * Log likelihood ratio of the scan given X versus noise only:
     * sum over template-union cells of
     *   -z_hat/(2 sigma_w2) + log I0(sqrt(z z_hat)/sigma_w2).
     * Cells outside the union contribute nothing; X = {} gives 0.
     */
    double log_likelihood(const Vec& z, const LabeledSet& X) const;

private:
    std::vector<double> ranges_, azimuths_, dopplers_;
    double R_, B_, D_ = 1.0;
    double sigma_w2_;
    double amplitude_;
    int gate_;
    int m_;

    void axis_window(const std::vector<double>& centroids, double coord, int& lo, int& hi) const;
};

}  // namespace sptrack

#endif
