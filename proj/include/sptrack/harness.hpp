#ifndef SPTRACK_HARNESS_HPP
#define SPTRACK_HARNESS_HPP

#include <map>
#include <string>
#include <vector>

#include "sptrack/ospa.hpp"
#include "sptrack/proposal.hpp"
#include "sptrack/sa_cphd.hpp"
#include "sptrack/scenario.hpp"
#include "sptrack/tracker.hpp"

namespace sptrack {

class RadarGammaSource final : public GammaSource {
public:
    explicit RadarGammaSource(const RadarSensor& s) : s_(s) {}
    int num_cells() const override { return s_.num_cells(); }
    SparseCells gamma(const Vec& x) const override { return s_.gamma_map(x); }

private:
    const RadarSensor& s_;
};

struct StepRecord {
    int k = 0;
    int n_hat = 0;
    int truth_n = 0;
    double ospa = 0.0;
    double n_eff = 0.0;
    int weight_violations = 0;
    double log_norm = 0.0;
    std::vector<LabelEstimate> tracks;
};

struct RunResult {
    std::vector<StepRecord> steps;
};

/**
 * One tracking run wired together: radar scan in, SA-CPHD predict/update,
 * proposal construction, particle step, estimate and OSPA out.
 */
class Pipeline {
public:
    Pipeline(const ScenarioConfig& sc, const RunConfig& rc, uint64_t seed);

    StepRecord step(int k, const Vec& z, const LabeledSet* truth);

    const RadarSensor& sensor() const { return sensor_; }
    const Tracker& tracker() const { return tracker_; }

private:
    ScenarioConfig sc_;
    RunConfig rc_;
    RadarSensor sensor_;
    NcvModel motion_;
    BirthModel birth_;
    RadarGammaSource gamma_;
    SaCphd cphd_;
    Tracker tracker_;
    RngStream rng_;
};

// seed for Monte Carlo run r under a master seed
uint64_t run_seed(uint64_t master_seed, int r);

RunResult run_once(const ScenarioConfig& sc, const RunConfig& rc, uint64_t seed);

struct McResult {
    std::vector<RunResult> runs;
    std::vector<StepAggregate> agg;
    std::vector<double> mean_truth_n;  // per step
    long total_weight_violations = 0;
};

// rc.mc_runs independent runs on rc.jobs worker threads; results are
// assembled in run order so the output is independent of the worker count.
McResult run_mc(const ScenarioConfig& sc, const RunConfig& rc);

std::vector<Vec> simulate_measurements(const ScenarioConfig& sc,
                                       const std::vector<LabeledSet>& truth,
                                       const RadarSensor& sensor, uint64_t seed);

double ospa_against_truth(const std::vector<LabelEstimate>& tracks, const LabeledSet& truth,
                          const OspaParams& params);

// file I/O
void write_truth_csv(const std::string& path, const std::vector<LabeledSet>& truth);
std::vector<LabeledSet> read_truth_csv(const std::string& path);
void write_measurements_csv(const std::string& path, const std::vector<Vec>& zs,
                            const RadarSensor& sensor);
std::vector<Vec> read_measurements_csv(const std::string& path, int num_cells);
void write_grid_json(const std::string& path, const RadarSensor& sensor);
void write_estimates_csv(const std::string& path, const RunResult& run);
std::map<int, std::pair<int, std::vector<Vec>>> read_estimates_csv(const std::string& path);
void write_diagnostics_json(const std::string& path, const RunResult& run);
void write_aggregate_csv(const std::string& path, const McResult& mc);
void write_summary_json(const std::string& path, const McResult& mc, const ScenarioConfig& sc,
                        const RunConfig& rc);

}  // namespace sptrack

#endif
