// qfcusum: change-point testing for high-dimensional linear models.
//
// Subcommands: test, localize, calibrate, simulate. Every run echoes the
// resolved seed and configuration to stderr; primary outputs (JSON/CSV) are
// deterministic given identical flags and seeds.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfcusum/calibration.hpp"
#include "qfcusum/data.hpp"
#include "qfcusum/harness.hpp"
#include "qfcusum/random.hpp"
#include "qfcusum/scan.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr std::uint64_t kDefaultCalibrationSeed = 915801;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file: " + path.string());
    out << text << '\n';
}

std::vector<double> parse_alphas(const std::string& list) {
    std::vector<double> alphas;
    std::stringstream stream(list);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        alphas.push_back(std::stod(item));
    }
    if (alphas.empty()) throw CLI::ValidationError("--alphas", "no levels given");
    return alphas;
}

struct TableOptions {
    std::string table_path;
    int grid = 2000;
    int reps = 100000;
    std::uint64_t cal_seed = kDefaultCalibrationSeed;
};

qfcusum::CriticalValueTable resolve_table(const TableOptions& opts, double zeta,
                                          double alpha, int threads) {
    if (!opts.table_path.empty()) {
        auto table = qfcusum::load_table(opts.table_path);
        if (!table.has_alpha(alpha))
            throw std::runtime_error("table does not tabulate alpha=" + std::to_string(alpha));
        return table;
    }
    return qfcusum::load_or_compute_table(zeta, {0.10, alpha, 0.05, 0.01}, opts.grid,
                                          opts.reps, opts.cal_seed,
                                          qfcusum::default_cache_dir(), threads);
}

int cmd_test(const std::string& data_path, bool header, double zeta, double alpha,
             std::uint64_t seed, const TableOptions& table_opts,
             const std::string& out_path, int threads) {
    const qfcusum::Dataset data = qfcusum::load_csv(data_path, header);
    const auto table = resolve_table(table_opts, zeta, alpha, threads);
    std::cerr << "qfcusum test: n=" << data.n() << " p=" << data.p() << " zeta=" << zeta
              << " alpha=" << alpha << " seed=" << seed << " table(grid=" << table.grid_points
              << ",reps=" << table.reps << ",seed=" << table.seed << ")\n";
    const qfcusum::TestOutcome outcome = qfcusum::run_test(data, zeta, alpha, table, seed);
    const std::string json = qfcusum::test_outcome_to_json(outcome, seed);
    std::cout << json << '\n';
    if (!out_path.empty()) write_text(out_path, json);
    return kExitOk;
}

int cmd_localize(const std::string& data_path, bool header, double zeta, std::uint64_t seed,
                 const std::string& out_path) {
    const qfcusum::Dataset data = qfcusum::load_csv(data_path, header);
    const auto nuisance = qfcusum::estimate_nuisance(data, zeta, 10,
                                                     qfcusum::derive_seed(seed, 11));
    qfcusum::ScanConfig config;
    config.zeta = zeta;
    config.sigma_eps = nuisance.sigma_eps_hat;
    config.lambda = nuisance.lambda;
    std::cerr << "qfcusum localize: n=" << data.n() << " p=" << data.p() << " zeta=" << zeta
              << " seed=" << seed << " lambda=" << nuisance.lambda << '\n';
    const int eta_hat = qfcusum::localize(data, config);

    const nlohmann::json j = {{"argmax_t", eta_hat},
                              {"eta_frac", static_cast<double>(eta_hat) / data.n()},
                              {"lambda", nuisance.lambda},
                              {"sigma_eps_hat", nuisance.sigma_eps_hat},
                              {"seed", seed},
                              {"zeta", zeta}};
    const std::string text = j.dump(2);
    std::cout << text << '\n';
    if (!out_path.empty()) write_text(out_path, text);
    return kExitOk;
}

int cmd_calibrate(double zeta, const std::string& alphas, int grid, int reps,
                  std::uint64_t seed, const std::string& out_path, int threads) {
    std::cerr << "qfcusum calibrate: zeta=" << zeta << " grid=" << grid << " reps=" << reps
              << " seed=" << seed << '\n';
    const auto table =
        qfcusum::simulate_critical_values(zeta, parse_alphas(alphas), grid, reps, seed,
                                          threads);
    qfcusum::save_table(table, out_path);
    std::cout << qfcusum::table_to_json_text(table) << '\n';
    return kExitOk;
}

int cmd_simulate(const std::string& plan_path, const std::string& out_dir, int threads,
                 const TableOptions& table_opts) {
    qfcusum::ExperimentPlan plan;
    try {
        plan = qfcusum::load_plan(plan_path);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("bad plan: ") + e.what());
    }
    std::filesystem::create_directories(out_dir);
    const auto table = resolve_table(table_opts, plan.zeta, plan.alpha, threads);
    std::cerr << "qfcusum simulate: " << plan.scenarios.size() << " scenario(s), reps="
              << plan.reps << " mode=" << qfcusum::mode_name(plan.mode)
              << " master_seed=" << plan.master_seed << " threads=" << threads << '\n';
    const auto report = qfcusum::run_experiment(plan, table, threads, true);

    const std::filesystem::path dir(out_dir);
    qfcusum::write_report_csv(report, dir / "report.csv");
    qfcusum::write_report_json(report, dir / "report.json");
    if (plan.mode == qfcusum::ExperimentMode::Localize) {
        qfcusum::write_localization_csv(report, dir / "localization.csv");
        qfcusum::write_localization_histogram_csv(report, dir / "localization_hist.csv");
    }
    std::cerr << "wrote " << (dir / "report.csv").string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QF-CUSUM change-point testing for high-dimensional linear models"};
    app.require_subcommand(1);

    // test
    auto* test = app.add_subcommand("test", "Test a CSV dataset for a structural break");
    std::string test_data, test_out;
    bool test_header = false;
    double test_zeta = 0.15, test_alpha = 0.05;
    std::uint64_t test_seed = 0;
    TableOptions test_table_opts;
    test->add_option("--data", test_data, "CSV file: first column response")->required();
    test->add_flag("--header", test_header, "Skip a single header row");
    test->add_option("--zeta", test_zeta, "Trimming fraction");
    test->add_option("--alpha", test_alpha, "Significance level");
    test->add_option("--seed", test_seed, "Seed for folds and the xi draw");
    test->add_option("--table", test_table_opts.table_path,
                     "Critical-value table JSON (else cache/compute)");
    test->add_option("--out", test_out, "Write the outcome JSON here as well");
    test->add_option("--grid", test_table_opts.grid, "Brownian grid for on-the-fly tables");
    test->add_option("--reps", test_table_opts.reps, "Replicates for on-the-fly tables");
    test->add_option("--cal-seed", test_table_opts.cal_seed, "Seed for on-the-fly tables");

    // localize
    auto* loc = app.add_subcommand("localize", "Estimate the change-point location");
    std::string loc_data, loc_out;
    bool loc_header = false;
    double loc_zeta = 0.15;
    std::uint64_t loc_seed = 0;
    loc->add_option("--data", loc_data, "CSV file: first column response")->required();
    loc->add_flag("--header", loc_header, "Skip a single header row");
    loc->add_option("--zeta", loc_zeta, "Trimming fraction");
    loc->add_option("--seed", loc_seed, "Seed for CV folds");
    loc->add_option("--out", loc_out, "Write the JSON result here as well");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Simulate critical values of sup G");
    std::string cal_alphas = "0.10,0.05,0.01", cal_out;
    double cal_zeta = 0.15;
    int cal_grid = 2000, cal_reps = 100000, cal_threads = 0;
    std::uint64_t cal_seed = kDefaultCalibrationSeed;
    cal->add_option("--zeta", cal_zeta, "Trimming fraction")->required();
    cal->add_option("--alphas", cal_alphas, "Comma-separated levels");
    cal->add_option("--grid", cal_grid, "Brownian-motion grid points");
    cal->add_option("--reps", cal_reps, "Monte-Carlo replicates");
    cal->add_option("--seed", cal_seed, "Simulation seed");
    cal->add_option("--out", cal_out, "Table JSON path")->required();
    cal->add_option("--threads", cal_threads, "Worker threads (0 = all cores)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a multi-replicate experiment plan");
    std::string sim_plan, sim_out;
    int sim_threads = 0;
    TableOptions sim_table_opts;
    sim->add_option("--plan", sim_plan, "Experiment plan JSON")->required();
    sim->add_option("--out", sim_out, "Output directory")->required();
    sim->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");
    sim->add_option("--table", sim_table_opts.table_path, "Critical-value table JSON");
    sim->add_option("--grid", sim_table_opts.grid, "Brownian grid for on-the-fly tables");
    sim->add_option("--reps-table", sim_table_opts.reps, "Replicates for on-the-fly tables");
    sim->add_option("--cal-seed", sim_table_opts.cal_seed, "Seed for on-the-fly tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(test))
            return cmd_test(test_data, test_header, test_zeta, test_alpha, test_seed,
                            test_table_opts, test_out, 0);
        if (app.got_subcommand(loc))
            return cmd_localize(loc_data, loc_header, loc_zeta, loc_seed, loc_out);
        if (app.got_subcommand(cal))
            return cmd_calibrate(cal_zeta, cal_alphas, cal_grid, cal_reps, cal_seed, cal_out,
                                 cal_threads);
        if (app.got_subcommand(sim))
            return cmd_simulate(sim_plan, sim_out, sim_threads, sim_table_opts);
    } catch (const qfcusum::ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
