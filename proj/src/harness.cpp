#include "sptrack/harness.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace sptrack {

Pipeline::Pipeline(const ScenarioConfig& sc, const RunConfig& rc, uint64_t seed)
    : sc_(sc),
      rc_(rc),
      sensor_(make_sensor(sc)),
      motion_(make_motion(sc)),
      birth_(make_birth(sc)),
      gamma_(sensor_),
      cphd_(gamma_, motion_, birth_,
            SaCphdOptions{rc.n_max, rc.n_birth_particles, noise_std_default(sc, rc), 1.0, 500.0}),
      tracker_(motion_, birth_, sensor_,
               TrackerOptions{rc.num_particles,
                              rc.vovo_weight_mode == "full-sum" ? VovoWeightMode::kFullSum
                                                                : VovoWeightMode::kSingleParticle,
                              rc.bootstrap_debug},
               mix_seed(seed, 10u)),
      rng_(seed) {}

StepRecord Pipeline::step(int k, const Vec& z, const LabeledSet* truth) {
    const auto& parts = tracker_.particles();
    std::vector<LabeledSet> sets(parts.size());
    std::vector<double> weights(parts.size());
    for (size_t i = 0; i < parts.size(); ++i) {
        sets[i] = parts[i].X;
        weights[i] = parts[i].w;
    }

    SaCphdState state = cphd_.derive(sets, weights);
    RngStream predict_rng = rng_.child(13u, static_cast<uint64_t>(k));
    state = cphd_.predict(state, k, sc_.p_survive, predict_rng);
    const Vec z_centered = z.array() - 2.0 * sc_.sigma_w2;
    state = cphd_.update(state, z_centered);
    const std::vector<GaussianCluster> clusters = cphd_.extract_clusters(state, k, rc_.clamps);

    StepDiagnostics diag;
    if (rc_.proposal == "lmb") {
        diag = tracker_.step_lmb(k, z, LmbProposal::build(clusters));
    } else {
        diag = tracker_.step_vovo(k, z, VovoProposal::build(state.rho, clusters));
    }

    StepRecord rec;
    rec.k = k;
    rec.n_hat = diag.estimate.n_hat;
    rec.n_eff = diag.n_eff;
    rec.weight_violations = diag.weight_violations;
    rec.log_norm = diag.log_norm;
    rec.tracks = diag.estimate.tracks;
    if (truth) {
        rec.truth_n = static_cast<int>(truth->size());
        rec.ospa = ospa_against_truth(rec.tracks, *truth, rc_.ospa);
    }
    return rec;
}

double ospa_against_truth(const std::vector<LabelEstimate>& tracks, const LabeledSet& truth,
                          const OspaParams& params) {
    std::vector<Vec> est, tru;
    for (const auto& t : tracks) {
        Vec p(2);
        p << t.mean(0), t.mean(2);
        est.push_back(std::move(p));
    }
    for (const auto& t : truth) {
        Vec p(2);
        p << t.x(0), t.x(2);
        tru.push_back(std::move(p));
    }
    return ospa(est, tru, params);
}

uint64_t run_seed(uint64_t master_seed, int r) {
    return mix_seed(master_seed, 20u, static_cast<uint64_t>(r));
}

std::vector<Vec> simulate_measurements(const ScenarioConfig& sc,
                                       const std::vector<LabeledSet>& truth,
                                       const RadarSensor& sensor, uint64_t seed) {
    RngStream rng(seed);
    std::vector<Vec> zs(static_cast<size_t>(sc.K) + 1);
    for (int k = 1; k <= sc.K; ++k) {
        RngStream mr = rng.child(12u, static_cast<uint64_t>(k));
        zs[static_cast<size_t>(k)] = sensor.simulate_measurement(truth[static_cast<size_t>(k)], mr);
    }
    return zs;
}

RunResult run_once(const ScenarioConfig& sc, const RunConfig& rc, uint64_t seed) {
    RngStream rng(seed);
    RngStream truth_rng = rng.child(11u);
    const std::vector<LabeledSet> truth = generate_truth(sc, truth_rng);
    const RadarSensor sensor = make_sensor(sc);
    const std::vector<Vec> zs = simulate_measurements(sc, truth, sensor, seed);

    Pipeline pipe(sc, rc, seed);
    RunResult out;
    for (int k = 1; k <= sc.K; ++k) {
        out.steps.push_back(
            pipe.step(k, zs[static_cast<size_t>(k)], &truth[static_cast<size_t>(k)]));
    }
    return out;
}

McResult run_mc(const ScenarioConfig& sc, const RunConfig& rc) {
    McResult mc;
    mc.runs.resize(static_cast<size_t>(rc.mc_runs));

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= rc.mc_runs || failed.load()) return;
            try {
                mc.runs[static_cast<size_t>(r)] = run_once(sc, rc, run_seed(rc.seed, r));
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                error = e.what();
                failed.store(true);
                return;
            }
        }
    };

    const int jobs = std::min(rc.jobs, rc.mc_runs);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw std::runtime_error("monte carlo run failed: " + error);

    std::vector<RunRecord> records;
    mc.mean_truth_n.assign(static_cast<size_t>(sc.K), 0.0);
    for (const auto& run : mc.runs) {
        RunRecord rec;
        for (size_t k = 0; k < run.steps.size(); ++k) {
            const auto& s = run.steps[k];
            rec.n_hat.push_back(s.n_hat);
            rec.ospa.push_back(s.ospa);
            mc.mean_truth_n[k] += static_cast<double>(s.truth_n) / rc.mc_runs;
            mc.total_weight_violations += s.weight_violations;
        }
        records.push_back(std::move(rec));
    }
    mc.agg = aggregate(records);
    return mc;
}

namespace {

std::string label_str(const Label& l) {
    return std::to_string(l.birth_time) + ":" + std::to_string(l.index);
}

Label parse_label(const std::string& s) {
    const auto pos = s.find(':');
    if (pos == std::string::npos) throw std::runtime_error("bad label field: " + s);
    return {std::stoi(s.substr(0, pos)), std::stoi(s.substr(pos + 1))};
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

void append_g17(std::string& s, double v) {
    char buf[32];
    snprintf(buf, sizeof(buf), "%.17g", v);
    s += buf;
}

}  // namespace

void write_truth_csv(const std::string& path, const std::vector<LabeledSet>& truth) {
    auto f = open_out(path);
    f << "k,label,px,vx,py,vy\n";
    for (size_t k = 1; k < truth.size(); ++k) {
        if (truth[k].empty()) {
            f << k << ",-,,,,\n";  // keep empty scans so the step count survives
            continue;
        }
        for (const auto& t : truth[k]) {
            std::string line = std::to_string(k) + "," + label_str(t.label);
            for (int i = 0; i < 4; ++i) {
                line += ",";
                append_g17(line, t.x(i));
            }
            f << line << "\n";
        }
    }
}

std::vector<LabeledSet> read_truth_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    std::getline(f, line);  // header
    std::vector<LabeledSet> truth;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 2) throw std::runtime_error("bad truth row: " + line);
        const size_t k = static_cast<size_t>(std::stoi(fields[0]));
        if (truth.size() <= k) truth.resize(k + 1);
        if (fields[1] == "-") continue;
        if (fields.size() < 6) throw std::runtime_error("bad truth row: " + line);
        Vec x(4);
        for (int i = 0; i < 4; ++i) x(i) = std::stod(fields[static_cast<size_t>(i) + 2]);
        truth[k].push_back({parse_label(fields[1]), std::move(x)});
    }
    for (auto& X : truth) sort_by_label(X);
    return truth;
}

void write_measurements_csv(const std::string& path, const std::vector<Vec>& zs,
                            const RadarSensor& sensor) {
    auto f = open_out(path);
    if (sensor.has_doppler()) {
        f << "k,cell_index,range_centroid,azimuth_centroid,doppler_centroid,power\n";
    } else {
        f << "k,cell_index,range_centroid,azimuth_centroid,power\n";
    }
    std::string chunk;
    for (size_t k = 1; k < zs.size(); ++k) {
        for (int i = 0; i < sensor.num_cells(); ++i) {
            int ir, ib, id;
            sensor.cell_coords(i, ir, ib, id);
            chunk += std::to_string(k) + "," + std::to_string(i) + ",";
            append_g17(chunk, sensor.range_centroids()[static_cast<size_t>(ir)]);
            chunk += ",";
            append_g17(chunk, sensor.azimuth_centroids()[static_cast<size_t>(ib)]);
            chunk += ",";
            if (sensor.has_doppler()) {
                append_g17(chunk, sensor.doppler_centroids()[static_cast<size_t>(id)]);
                chunk += ",";
            }
            append_g17(chunk, zs[k](i));
            chunk += "\n";
            if (chunk.size() > 1 << 20) {
                f << chunk;
                chunk.clear();
            }
        }
    }
    f << chunk;
}

std::vector<Vec> read_measurements_csv(const std::string& path, int num_cells) {
    auto f = open_in(path);
    std::string line;
    std::getline(f, line);
    // the power column moves when the grid has a doppler axis
    const auto header = split_csv_line(line);
    size_t power_col = header.size();
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "power") power_col = i;
    }
    if (power_col == header.size()) throw std::runtime_error("measurement CSV lacks a power column");
    std::vector<Vec> zs;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() <= power_col) throw std::runtime_error("bad measurement row: " + line);
        const size_t k = static_cast<size_t>(std::stoi(fields[0]));
        const int idx = std::stoi(fields[1]);
        if (zs.size() <= k) {
            const size_t old = zs.size();
            zs.resize(k + 1);
            for (size_t i = old; i < zs.size(); ++i) zs[i] = Vec::Zero(num_cells);
        }
        if (idx < 0 || idx >= num_cells) throw std::runtime_error("cell index out of range");
        zs[k](idx) = std::stod(fields[power_col]);
    }
    return zs;
}

void write_grid_json(const std::string& path, const RadarSensor& sensor) {
    nlohmann::json j;
    j["num_cells"] = sensor.num_cells();
    j["range_centroids"] = sensor.range_centroids();
    j["azimuth_centroids"] = sensor.azimuth_centroids();
    if (sensor.has_doppler()) j["doppler_centroids"] = sensor.doppler_centroids();
    j["sigma_w2"] = sensor.sigma_w2();
    j["amplitude"] = sensor.amplitude();
    j["gate_cells"] = sensor.gate_cells();
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

void write_estimates_csv(const std::string& path, const RunResult& run) {
    auto f = open_out(path);
    f << "k,n_hat,label,exist,px,vx,py,vy\n";
    for (const auto& s : run.steps) {
        if (s.tracks.empty()) {
            f << s.k << "," << s.n_hat << ",-,,,,,\n";
            continue;
        }
        for (const auto& t : s.tracks) {
            std::string line = std::to_string(s.k) + "," + std::to_string(s.n_hat) + "," +
                               label_str(t.label) + ",";
            append_g17(line, t.existence);
            for (int i = 0; i < 4; ++i) {
                line += ",";
                append_g17(line, t.mean(i));
            }
            f << line << "\n";
        }
    }
}

std::map<int, std::pair<int, std::vector<Vec>>> read_estimates_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    std::getline(f, line);
    std::map<int, std::pair<int, std::vector<Vec>>> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 3) throw std::runtime_error("bad estimate row: " + line);
        const int k = std::stoi(fields[0]);
        auto& entry = out[k];
        entry.first = std::stoi(fields[1]);
        if (fields[2] == "-" || fields.size() < 8) continue;
        Vec p(2);
        p << std::stod(fields[4]), std::stod(fields[6]);
        entry.second.push_back(std::move(p));
    }
    return out;
}

void write_diagnostics_json(const std::string& path, const RunResult& run) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : run.steps) {
        steps.push_back({{"k", s.k},
                         {"n_hat", s.n_hat},
                         {"n_eff", s.n_eff},
                         {"weight_violations", s.weight_violations},
                         {"log_norm", s.log_norm}});
    }
    nlohmann::json j;
    j["steps"] = steps;
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

void write_aggregate_csv(const std::string& path, const McResult& mc) {
    auto f = open_out(path);
    f << "k,truth_n,mean_n_hat,std_n_hat,mean_ospa,std_ospa\n";
    for (size_t k = 0; k < mc.agg.size(); ++k) {
        std::string line = std::to_string(k + 1) + ",";
        append_g17(line, mc.mean_truth_n[k]);
        line += ",";
        append_g17(line, mc.agg[k].mean_n_hat);
        line += ",";
        append_g17(line, mc.agg[k].std_n_hat);
        line += ",";
        append_g17(line, mc.agg[k].mean_ospa);
        line += ",";
        append_g17(line, mc.agg[k].std_ospa);
        f << line << "\n";
    }
}

void write_summary_json(const std::string& path, const McResult& mc, const ScenarioConfig& sc,
                        const RunConfig& rc) {
    nlohmann::json steps = nlohmann::json::array();
    for (size_t k = 0; k < mc.agg.size(); ++k) {
        steps.push_back({{"k", k + 1},
                         {"truth_n", mc.mean_truth_n[k]},
                         {"mean_n_hat", mc.agg[k].mean_n_hat},
                         {"std_n_hat", mc.agg[k].std_n_hat},
                         {"mean_ospa", mc.agg[k].mean_ospa},
                         {"std_ospa", mc.agg[k].std_ospa}});
    }
    nlohmann::json j;
    j["mc_runs"] = rc.mc_runs;
    j["proposal"] = rc.proposal;
    j["num_particles"] = rc.num_particles;
    j["snr_db"] = sc.snr_db;
    j["seed"] = rc.seed;
    j["total_weight_violations"] = mc.total_weight_violations;
    j["steps"] = steps;
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

}  // namespace sptrack
