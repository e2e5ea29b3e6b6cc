#ifndef SPTRACK_SCENARIO_HPP
#define SPTRACK_SCENARIO_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sptrack/motion.hpp"
#include "sptrack/ospa.hpp"
#include "sptrack/radar.hpp"
#include "sptrack/rfs.hpp"
#include "sptrack/sa_cphd.hpp"
#include "sptrack/tracker.hpp"

namespace sptrack {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BirthEntry {
    int time = 1;
    Vec x0;
};

struct DeathEntry {
    int time = 0;
    int target_id = 0;  // index into the birth schedule
};

struct ScenarioConfig {
    int K = 24;
    double dt = 1.0;
    std::vector<BirthEntry> birth_schedule;
    std::vector<DeathEntry> death_schedule;

    double snr_db = 10.0;
    double sigma_w2 = 1.0;

    double range_min = 1000.0, range_max = 2000.0, range_step = 10.0;
    double azimuth_min_deg = 30.0, azimuth_max_deg = 60.0, azimuth_step_deg = 1.0;
    double range_resolution = 10.0;       // m
    double azimuth_resolution_deg = 1.0;  // deg
    // optional third grid axis: radial velocity
    bool doppler_axis = false;
    double doppler_min = -30.0, doppler_max = 10.0, doppler_step = 1.0;
    double doppler_resolution = 1.0;  // m/s
    int gate_cells = 3;

    double accel_noise_psd = 1.0;  // (a_max)^2
    double p_survive = 0.95;
    double truth_noise_psd = 0.0;  // 0 = deterministic truth

    Vec birth_mean;     // x_B
    Vec birth_std;      // per-component std of Q_B
    double p_birth = 0.05;
};

struct RunConfig {
    std::string proposal = "vovo";  // lmb | vovo
    int num_particles = 3000;
    int n_birth_particles = 5000;
    uint64_t seed = 1;
    int mc_runs = 50;
    int jobs = 1;
    std::string vovo_weight_mode = "single-particle";  // | full-sum
    bool bootstrap_debug = false;
    MassClamps clamps;
    double sigma_n = 0.0;  // 0 = default 2*sigma_w2
    int n_max = 11;
    OspaParams ospa;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& sc);
RunConfig run_from_json(const nlohmann::json& j);
nlohmann::json run_to_json(const RunConfig& rc);

// Reads a document with "scenario" and "run" sections.
std::pair<ScenarioConfig, RunConfig> load_config(const std::string& path);
void save_config(const std::string& path, const ScenarioConfig& sc, const RunConfig& rc);

RadarSensor make_sensor(const ScenarioConfig& sc);
NcvModel make_motion(const ScenarioConfig& sc);
BirthModel make_birth(const ScenarioConfig& sc);
double noise_std_default(const ScenarioConfig& sc, const RunConfig& rc);

// Ground truth per step, index k in [0, K]; entry 0 is empty.
std::vector<LabeledSet> generate_truth(const ScenarioConfig& sc, RngStream& rng);

}  // namespace sptrack

#endif
