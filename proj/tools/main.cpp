#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "sptrack/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

namespace fs = std::filesystem;

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const auto [sc, rc] = sptrack::load_config(config_path);
    fs::create_directories(out_dir);

    const uint64_t seed = sptrack::run_seed(rc.seed, 0);
    sptrack::RngStream rng(seed);
    sptrack::RngStream truth_rng = rng.child(11u);
    const auto truth = sptrack::generate_truth(sc, truth_rng);
    const sptrack::RadarSensor sensor = sptrack::make_sensor(sc);
    const auto zs = sptrack::simulate_measurements(sc, truth, sensor, seed);

    sptrack::write_truth_csv((fs::path(out_dir) / "truth.csv").string(), truth);
    sptrack::write_measurements_csv((fs::path(out_dir) / "measurements.csv").string(), zs, sensor);
    sptrack::write_grid_json((fs::path(out_dir) / "grid.json").string(), sensor);
    std::printf("wrote truth.csv, measurements.csv, grid.json to %s\n", out_dir.c_str());
    return kExitOk;
}

int cmd_track(const std::string& config_path, const std::string& meas_dir,
              const std::string& proposal, const std::string& out_dir) {
    auto [sc, rc] = sptrack::load_config(config_path);
    if (!proposal.empty()) rc.proposal = proposal;
    fs::create_directories(out_dir);

    const sptrack::RadarSensor sensor = sptrack::make_sensor(sc);
    const auto zs = sptrack::read_measurements_csv(
        (fs::path(meas_dir) / "measurements.csv").string(), sensor.num_cells());

    std::vector<sptrack::LabeledSet> truth;
    const fs::path truth_path = fs::path(meas_dir) / "truth.csv";
    if (fs::exists(truth_path)) truth = sptrack::read_truth_csv(truth_path.string());

    sptrack::Pipeline pipe(sc, rc, sptrack::run_seed(rc.seed, 0));
    sptrack::RunResult run;
    for (int k = 1; k < static_cast<int>(zs.size()); ++k) {
        const sptrack::LabeledSet* tk =
            static_cast<size_t>(k) < truth.size() ? &truth[static_cast<size_t>(k)] : nullptr;
        run.steps.push_back(pipe.step(k, zs[static_cast<size_t>(k)], tk));
    }

    sptrack::write_estimates_csv((fs::path(out_dir) / "estimates.csv").string(), run);
    sptrack::write_diagnostics_json((fs::path(out_dir) / "diagnostics.json").string(), run);
    std::printf("wrote estimates.csv, diagnostics.json to %s\n", out_dir.c_str());
    return kExitOk;
}

int cmd_mc(const std::string& config_path, int runs, uint64_t seed, bool seed_set, int jobs,
           const std::string& proposal, const std::string& out_dir) {
    auto [sc, rc] = sptrack::load_config(config_path);
    if (runs > 0) rc.mc_runs = runs;
    if (seed_set) rc.seed = seed;
    if (jobs > 0) rc.jobs = jobs;
    if (!proposal.empty()) rc.proposal = proposal;
    fs::create_directories(out_dir);

    const sptrack::McResult mc = sptrack::run_mc(sc, rc);
    sptrack::write_aggregate_csv((fs::path(out_dir) / "aggregate.csv").string(), mc);
    sptrack::write_summary_json((fs::path(out_dir) / "summary.json").string(), mc, sc, rc);
    std::printf("completed %d runs; wrote aggregate.csv, summary.json to %s\n", rc.mc_runs,
                out_dir.c_str());
    return kExitOk;
}

int cmd_evaluate(const std::string& est_path, const std::string& truth_path,
                 const std::string& out_path, double cutoff, double order) {
    const auto est = sptrack::read_estimates_csv(est_path);
    const auto truth = sptrack::read_truth_csv(truth_path);
    const sptrack::OspaParams params{cutoff, order};

    FILE* out = out_path.empty() ? nullptr : std::fopen(out_path.c_str(), "w");
    if (out) std::fprintf(out, "k,n_truth,n_hat,ospa\n");
    double total = 0.0;
    int count = 0;
    for (size_t k = 1; k < truth.size(); ++k) {
        std::vector<sptrack::Vec> tru, es;
        for (const auto& t : truth[k]) {
            sptrack::Vec p(2);
            p << t.x(0), t.x(2);
            tru.push_back(std::move(p));
        }
        int n_hat = 0;
        if (auto it = est.find(static_cast<int>(k)); it != est.end()) {
            n_hat = it->second.first;
            es = it->second.second;
        }
        const double d = sptrack::ospa(es, tru, params);
        total += d;
        ++count;
        if (out) {
            std::fprintf(out, "%zu,%zu,%d,%.17g\n", k, truth[k].size(), n_hat, d);
        }
    }
    if (out) std::fclose(out);
    std::printf("mean ospa over %d steps: %.3f m\n", count, count ? total / count : 0.0);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-target particle tracker on superpositional radar power returns"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", meas_dir, proposal;
    std::string est_path, truth_path, eval_out;
    int runs = 0, jobs = 0;
    uint64_t seed = 0;
    double cutoff = 100.0, order = 1.0;

    auto* sim = app.add_subcommand("simulate", "generate ground truth and radar scans");
    sim->add_option("--config", config_path, "config JSON")->required();
    sim->add_option("--out", out_dir, "output directory");

    auto* track = app.add_subcommand("track", "run the tracker on stored scans");
    track->add_option("--config", config_path, "config JSON")->required();
    track->add_option("--measurements", meas_dir, "directory with measurements.csv")->required();
    track->add_option("--proposal", proposal, "lmb or vovo")
        ->check(CLI::IsMember({"lmb", "vovo"}));
    track->add_option("--out", out_dir, "output directory");

    auto* mc = app.add_subcommand("mc", "Monte Carlo batch");
    mc->add_option("--config", config_path, "config JSON")->required();
    mc->add_option("--runs", runs, "number of runs");
    auto* seed_opt = mc->add_option("--seed", seed, "master seed");
    mc->add_option("--jobs", jobs, "worker threads");
    mc->add_option("--proposal", proposal, "lmb or vovo")->check(CLI::IsMember({"lmb", "vovo"}));
    mc->add_option("--out", out_dir, "output directory");

    auto* eval = app.add_subcommand("evaluate", "score estimates against truth");
    eval->add_option("--est", est_path, "estimates.csv")->required();
    eval->add_option("--truth", truth_path, "truth.csv")->required();
    eval->add_option("--out", eval_out, "per-step OSPA CSV");
    eval->add_option("--cutoff", cutoff, "OSPA cutoff (m)");
    eval->add_option("--order", order, "OSPA order");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir);
        if (track->parsed()) return cmd_track(config_path, meas_dir, proposal, out_dir);
        if (mc->parsed()) {
            return cmd_mc(config_path, runs, seed, seed_opt->count() > 0, jobs, proposal, out_dir);
        }
        if (eval->parsed()) return cmd_evaluate(est_path, truth_path, eval_out, cutoff, order);
    } catch (const sptrack::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitOk;
}
