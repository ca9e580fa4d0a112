#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "qfcusum/harness.hpp"

using namespace qfcusum;

namespace {

ScenarioSpec small_scenario(ChangePattern pattern = ChangePattern::none()) {
    ScenarioSpec spec;
    spec.n = 80;
    spec.p = 8;
    spec.s = 3;
    spec.sigma_kind = SigmaKind::Toeplitz;
    spec.change_pattern = pattern;
    return spec;
}

ExperimentPlan small_plan(ExperimentMode mode, std::vector<ScenarioSpec> scenarios,
                          int reps = 8) {
    ExperimentPlan plan;
    plan.scenarios = std::move(scenarios);
    plan.reps = reps;
    plan.alpha = 0.05;
    plan.zeta = 0.15;
    plan.master_seed = 2024;
    plan.mode = mode;
    return plan;
}

const CriticalValueTable& shared_table() {
    static const CriticalValueTable table =
        simulate_critical_values(0.15, {0.10, 0.05, 0.01}, 500, 5000, 40);
    return table;
}

}  // namespace

TEST_CASE("reports are identical for 1 and 4 threads") {
    const auto plan = small_plan(ExperimentMode::Size,
                                 {small_scenario(), small_scenario(ChangePattern::single_at(
                                                        0.5, 2.0))});
    const auto serial = run_experiment(plan, shared_table(), 1);
    const auto parallel = run_experiment(plan, shared_table(), 4);
    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t k = 0; k < serial.rows.size(); ++k) {
        CHECK(serial.rows[k].rejection_rate == parallel.rows[k].rejection_rate);
        CHECK(serial.rows[k].max_stats == parallel.rows[k].max_stats);
        CHECK(serial.rows[k].failures == parallel.rows[k].failures);
    }
}

TEST_CASE("power at kappa = 0 equals the matching size run") {
    const auto size_plan = small_plan(ExperimentMode::Size, {small_scenario()});
    auto power_plan =
        small_plan(ExperimentMode::Power, {small_scenario(ChangePattern::single_at(0.5, 0.0))});
    const auto size_report = run_experiment(size_plan, shared_table(), 2);
    const auto power_report = run_experiment(power_plan, shared_table(), 2);
    CHECK(size_report.rows[0].rejection_rate == power_report.rows[0].rejection_rate);
    CHECK(size_report.rows[0].max_stats == power_report.rows[0].max_stats);
}

TEST_CASE("localize mode records eta fractions") {
    const auto plan = small_plan(ExperimentMode::Localize,
                                 {small_scenario(ChangePattern::single_at(0.5, 2.0))}, 6);
    const auto report = run_experiment(plan, shared_table(), 2);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].eta_fracs.size() == 6);
    for (const double frac : report.rows[0].eta_fracs) {
        CHECK(frac > 0.0);
        CHECK(frac < 1.0);
    }
}

TEST_CASE("rows are sorted ascending in kappa") {
    auto plan = small_plan(ExperimentMode::Power,
                           {small_scenario(ChangePattern::single_at(0.5, 1.0)),
                            small_scenario(ChangePattern::single_at(0.5, 0.25)),
                            small_scenario(ChangePattern::single_at(0.5, 0.5))},
                           4);
    const auto report = run_experiment(plan, shared_table(), 2);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].scenario.change_pattern.kappa == 0.25);
    CHECK(report.rows[1].scenario.change_pattern.kappa == 0.5);
    CHECK(report.rows[2].scenario.change_pattern.kappa == 1.0);
}

TEST_CASE("report files: csv shape, json metadata, localization outputs") {
    const auto dir = std::filesystem::temp_directory_path() / "qfcusum_report_test";
    std::filesystem::create_directories(dir);

    const auto plan = small_plan(ExperimentMode::Localize,
                                 {small_scenario(ChangePattern::single_at(0.5, 2.0))}, 5);
    const auto report = run_experiment(plan, shared_table(), 2);

    const auto csv_path = dir / "report.csv";
    write_report_csv(report, csv_path);
    std::ifstream csv(csv_path);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) ++lines;
    CHECK(lines == report.rows.size() + 1);

    const auto json_path = dir / "report.json";
    write_report_json(report, json_path);
    std::ifstream json(json_path);
    const std::string content((std::istreambuf_iterator<char>(json)), {});
    CHECK(content.find("\"table_digest\"") != std::string::npos);
    CHECK(content.find("\"eta_fracs\"") != std::string::npos);

    write_localization_csv(report, dir / "loc.csv");
    write_localization_histogram_csv(report, dir / "loc_hist.csv");
    std::ifstream loc(dir / "loc.csv");
    lines = 0;
    while (std::getline(loc, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 1 + report.rows[0].eta_fracs.size());
}

TEST_CASE("plan json round-trip") {
    auto plan = small_plan(ExperimentMode::Power,
                           {small_scenario(ChangePattern::single_at(0.5, 0.5))}, 12);
    plan.stride = 2;
    const ExperimentPlan back = plan_from_json_text(plan_to_json_text(plan));
    CHECK(back.reps == plan.reps);
    CHECK(back.alpha == plan.alpha);
    CHECK(back.zeta == plan.zeta);
    CHECK(back.master_seed == plan.master_seed);
    CHECK(back.mode == plan.mode);
    CHECK(back.stride == plan.stride);
    REQUIRE(back.scenarios.size() == 1);
    CHECK(back.scenarios[0].n == plan.scenarios[0].n);
    CHECK(back.scenarios[0].change_pattern.kappa == 0.5);
}

TEST_CASE("zeta mismatch between plan and table is rejected") {
    auto plan = small_plan(ExperimentMode::Size, {small_scenario()});
    plan.zeta = 0.2;
    CHECK_THROWS_AS(run_experiment(plan, shared_table(), 1), std::invalid_argument);
}
