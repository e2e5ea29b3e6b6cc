#include "sptrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace sptrack {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

Vec to_vec(const std::vector<double>& v) {
    Vec out(static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
    return out;
}

std::vector<double> from_vec(const Vec& v) {
    return {v.data(), v.data() + v.size()};
}

std::vector<double> linspace_by_step(double lo, double hi, double step) {
    std::vector<double> out;
    for (double x = lo; x <= hi + 1e-9 * step; x += step) out.push_back(x);
    return out;
}

}  // namespace

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig sc;
    try {
        sc.K = j.value("steps", sc.K);
        sc.dt = j.value("dt", sc.dt);
        sc.snr_db = j.value("snr_db", sc.snr_db);
        sc.sigma_w2 = j.value("sigma_w2", sc.sigma_w2);

        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            sc.range_min = g.value("range_min", sc.range_min);
            sc.range_max = g.value("range_max", sc.range_max);
            sc.range_step = g.value("range_step", sc.range_step);
            sc.azimuth_min_deg = g.value("azimuth_min_deg", sc.azimuth_min_deg);
            sc.azimuth_max_deg = g.value("azimuth_max_deg", sc.azimuth_max_deg);
            sc.azimuth_step_deg = g.value("azimuth_step_deg", sc.azimuth_step_deg);
            sc.range_resolution = g.value("range_resolution", sc.range_resolution);
            sc.azimuth_resolution_deg = g.value("azimuth_resolution_deg", sc.azimuth_resolution_deg);
            sc.doppler_axis = g.value("doppler_axis", sc.doppler_axis);
            sc.doppler_min = g.value("doppler_min", sc.doppler_min);
            sc.doppler_max = g.value("doppler_max", sc.doppler_max);
            sc.doppler_step = g.value("doppler_step", sc.doppler_step);
            sc.doppler_resolution = g.value("doppler_resolution", sc.doppler_resolution);
            sc.gate_cells = g.value("gate_cells", sc.gate_cells);
        }

        sc.accel_noise_psd = j.value("accel_noise_psd", sc.accel_noise_psd);
        sc.p_survive = j.value("p_survive", sc.p_survive);
        sc.truth_noise_psd = j.value("truth_noise_psd", sc.truth_noise_psd);

        if (j.contains("birth_model")) {
            const auto& b = j.at("birth_model");
            sc.birth_mean = to_vec(b.value("mean", std::vector<double>{1250.0, -5.0, 1250.0, -5.0}));
            sc.birth_std = to_vec(b.value("std", std::vector<double>{7.5, 10.0, 7.5, 10.0}));
            sc.p_birth = b.value("p_birth", sc.p_birth);
        } else {
            sc.birth_mean = to_vec({1250.0, -5.0, 1250.0, -5.0});
            sc.birth_std = to_vec({7.5, 10.0, 7.5, 10.0});
        }

        for (const auto& e : j.value("births", nlohmann::json::array())) {
            sc.birth_schedule.push_back(
                {e.at("time").get<int>(), to_vec(e.at("state").get<std::vector<double>>())});
        }
        for (const auto& e : j.value("deaths", nlohmann::json::array())) {
            sc.death_schedule.push_back({e.at("time").get<int>(), e.at("target").get<int>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad scenario config: ") + e.what());
    }

    for (const auto& b : sc.birth_schedule) {
        if (b.time < 1 || b.time > sc.K) throw ConfigError("birth time outside [1, steps]");
        if (b.x0.size() < 4) throw ConfigError("birth state needs at least 4 components");
    }
    for (const auto& d : sc.death_schedule) {
        if (d.target_id < 0 || d.target_id >= static_cast<int>(sc.birth_schedule.size())) {
            throw ConfigError("death entry references unknown target");
        }
    }
    if (sc.K < 1 || sc.dt <= 0.0) throw ConfigError("steps must be >= 1 and dt positive");
    if (sc.sigma_w2 <= 0.0) throw ConfigError("sigma_w2 must be positive");
    if (sc.doppler_axis && (sc.doppler_step <= 0.0 || sc.doppler_max < sc.doppler_min ||
                            sc.doppler_resolution <= 0.0)) {
        throw ConfigError("bad doppler axis parameters");
    }
    return sc;
}

nlohmann::json scenario_to_json(const ScenarioConfig& sc) {
    nlohmann::json j;
    j["steps"] = sc.K;
    j["dt"] = sc.dt;
    j["snr_db"] = sc.snr_db;
    j["sigma_w2"] = sc.sigma_w2;
    j["grid"] = {
        {"range_min", sc.range_min},
        {"range_max", sc.range_max},
        {"range_step", sc.range_step},
        {"azimuth_min_deg", sc.azimuth_min_deg},
        {"azimuth_max_deg", sc.azimuth_max_deg},
        {"azimuth_step_deg", sc.azimuth_step_deg},
        {"range_resolution", sc.range_resolution},
        {"azimuth_resolution_deg", sc.azimuth_resolution_deg},
        {"doppler_axis", sc.doppler_axis},
        {"doppler_min", sc.doppler_min},
        {"doppler_max", sc.doppler_max},
        {"doppler_step", sc.doppler_step},
        {"doppler_resolution", sc.doppler_resolution},
        {"gate_cells", sc.gate_cells},
    };
    j["accel_noise_psd"] = sc.accel_noise_psd;
    j["p_survive"] = sc.p_survive;
    j["truth_noise_psd"] = sc.truth_noise_psd;
    j["birth_model"] = {
        {"mean", from_vec(sc.birth_mean)},
        {"std", from_vec(sc.birth_std)},
        {"p_birth", sc.p_birth},
    };
    j["births"] = nlohmann::json::array();
    for (const auto& b : sc.birth_schedule) {
        j["births"].push_back({{"time", b.time}, {"state", from_vec(b.x0)}});
    }
    j["deaths"] = nlohmann::json::array();
    for (const auto& d : sc.death_schedule) {
        j["deaths"].push_back({{"time", d.time}, {"target", d.target_id}});
    }
    return j;
}

RunConfig run_from_json(const nlohmann::json& j) {
    RunConfig rc;
    try {
        rc.proposal = j.value("proposal", rc.proposal);
        rc.num_particles = j.value("num_particles", rc.num_particles);
        rc.n_birth_particles = j.value("n_birth_particles", rc.n_birth_particles);
        rc.seed = j.value("seed", rc.seed);
        rc.mc_runs = j.value("mc_runs", rc.mc_runs);
        rc.jobs = j.value("jobs", rc.jobs);
        rc.vovo_weight_mode = j.value("vovo_weight_mode", rc.vovo_weight_mode);
        rc.bootstrap_debug = j.value("bootstrap_debug", rc.bootstrap_debug);
        rc.sigma_n = j.value("sigma_n", rc.sigma_n);
        rc.n_max = j.value("n_max", rc.n_max);
        if (j.contains("clamps")) {
            const auto& c = j.at("clamps");
            rc.clamps.ps_min = c.value("ps_min", rc.clamps.ps_min);
            rc.clamps.ps_max = c.value("ps_max", rc.clamps.ps_max);
            rc.clamps.pb_min = c.value("pb_min", rc.clamps.pb_min);
            rc.clamps.pb_max = c.value("pb_max", rc.clamps.pb_max);
        }
        if (j.contains("ospa")) {
            rc.ospa.cutoff = j.at("ospa").value("cutoff", rc.ospa.cutoff);
            rc.ospa.order = j.at("ospa").value("order", rc.ospa.order);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad run config: ") + e.what());
    }
    if (rc.proposal != "lmb" && rc.proposal != "vovo") {
        throw ConfigError("proposal must be lmb or vovo");
    }
    if (rc.vovo_weight_mode != "single-particle" && rc.vovo_weight_mode != "full-sum") {
        throw ConfigError("vovo_weight_mode must be single-particle or full-sum");
    }
    if (rc.num_particles < 1 || rc.mc_runs < 1 || rc.jobs < 1) {
        throw ConfigError("num_particles, mc_runs and jobs must be >= 1");
    }
    return rc;
}

nlohmann::json run_to_json(const RunConfig& rc) {
    return {
        {"proposal", rc.proposal},
        {"num_particles", rc.num_particles},
        {"n_birth_particles", rc.n_birth_particles},
        {"seed", rc.seed},
        {"mc_runs", rc.mc_runs},
        {"jobs", rc.jobs},
        {"vovo_weight_mode", rc.vovo_weight_mode},
        {"bootstrap_debug", rc.bootstrap_debug},
        {"sigma_n", rc.sigma_n},
        {"n_max", rc.n_max},
        {"clamps",
         {{"ps_min", rc.clamps.ps_min},
          {"ps_max", rc.clamps.ps_max},
          {"pb_min", rc.clamps.pb_min},
          {"pb_max", rc.clamps.pb_max}}},
        {"ospa", {{"cutoff", rc.ospa.cutoff}, {"order", rc.ospa.order}}},
    };
}

std::pair<ScenarioConfig, RunConfig> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return {scenario_from_json(j.value("scenario", nlohmann::json::object())),
            run_from_json(j.value("run", nlohmann::json::object()))};
}

void save_config(const std::string& path, const ScenarioConfig& sc, const RunConfig& rc) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    nlohmann::json j;
    j["scenario"] = scenario_to_json(sc);
    j["run"] = run_to_json(rc);
    out << j.dump(2) << "\n";
}

RadarSensor make_sensor(const ScenarioConfig& sc) {
    const double amplitude = std::sqrt(2.0 * sc.sigma_w2 * std::pow(10.0, sc.snr_db / 10.0));
    RadarSensor sensor(linspace_by_step(sc.range_min, sc.range_max, sc.range_step),
                       linspace_by_step(sc.azimuth_min_deg * kDegToRad, sc.azimuth_max_deg * kDegToRad,
                                        sc.azimuth_step_deg * kDegToRad),
                       sc.range_resolution, sc.azimuth_resolution_deg * kDegToRad, sc.sigma_w2,
                       amplitude, sc.gate_cells);
    if (sc.doppler_axis) {
        sensor.set_doppler_axis(linspace_by_step(sc.doppler_min, sc.doppler_max, sc.doppler_step),
                                sc.doppler_resolution);
    }
    return sensor;
}

NcvModel make_motion(const ScenarioConfig& sc) {
    return NcvModel(sc.dt, sc.accel_noise_psd, sc.p_survive);
}

BirthModel make_birth(const ScenarioConfig& sc) {
    BirthModel birth;
    const int d = static_cast<int>(sc.birth_mean.size());
    Mat Q = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) Q(i, i) = sc.birth_std(i) * sc.birth_std(i);
    birth.add(sc.p_birth, MvNormal(sc.birth_mean, Q));
    return birth;
}

double noise_std_default(const ScenarioConfig& sc, const RunConfig& rc) {
    return rc.sigma_n > 0.0 ? rc.sigma_n : 2.0 * sc.sigma_w2;
}

std::vector<LabeledSet> generate_truth(const ScenarioConfig& sc, RngStream& rng) {
    std::map<int, int> death_time;  // target id -> step it disappears
    for (const auto& d : sc.death_schedule) death_time[d.target_id] = d.time;

    NcvModel truth_motion(sc.dt, sc.truth_noise_psd > 0.0 ? sc.truth_noise_psd : 0.0, 1.0);

    // labels: birth index counts same-time births separately
    std::map<int, int> per_time_index;
    std::vector<Label> labels;
    for (const auto& b : sc.birth_schedule) labels.push_back({b.time, per_time_index[b.time]++});

    std::vector<LabeledSet> truth(static_cast<size_t>(sc.K) + 1);
    std::vector<Vec> state(sc.birth_schedule.size());
    for (int k = 1; k <= sc.K; ++k) {
        LabeledSet& Xk = truth[static_cast<size_t>(k)];
        for (size_t t = 0; t < sc.birth_schedule.size(); ++t) {
            const auto& b = sc.birth_schedule[t];
            const auto dt_it = death_time.find(static_cast<int>(t));
            const bool alive = k >= b.time && (dt_it == death_time.end() || k < dt_it->second);
            if (!alive) continue;
            if (k == b.time) {
                state[t] = b.x0;
            } else if (sc.truth_noise_psd > 0.0) {
                state[t] = truth_motion.sample_transition(state[t], rng);
            } else {
                state[t] = truth_motion.mean_transition(state[t]);
            }
            Xk.push_back({labels[t], state[t]});
        }
        sort_by_label(Xk);
    }
    return truth;
}

}  // namespace sptrack
