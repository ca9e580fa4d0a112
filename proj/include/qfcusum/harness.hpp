#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qfcusum/calibration.hpp"
#include "qfcusum/datagen.hpp"

namespace qfcusum {

enum class ExperimentMode { Size, Power, Localize };

std::string mode_name(ExperimentMode mode);
ExperimentMode mode_from_name(const std::string& name);

/// Multi-replicate experiment: replicate r of scenario k runs with seed
/// hash(master_seed, k, r), so reports are identical for any thread count.
struct ExperimentPlan {
    std::vector<ScenarioSpec> scenarios;
    int reps = 200;
    double alpha = 0.05;
    double zeta = 0.15;
    std::uint64_t master_seed = 0;
    ExperimentMode mode = ExperimentMode::Size;
    int stride = 1;
};

struct ScenarioResult {
    std::string scenario_id;
    ScenarioSpec scenario;
    int reps_completed = 0;
    int failures = 0;
    double rejection_rate = 0.0;  // rejection rate (Size) or power (Power)
    double mc_standard_error = 0.0;
    double mean_runtime_s = 0.0;
    std::vector<double> max_stats;  // per completed replicate, replicate order
    std::vector<double> eta_fracs;  // Localize mode: eta_hat / n per replicate
};

struct ExperimentReport {
    ExperimentPlan plan;
    std::vector<ScenarioResult> rows;  // sorted ascending by kappa, plan order on ties
    std::uint64_t table_digest = 0;
    double wall_time_s = 0.0;
};

ExperimentReport run_experiment(const ExperimentPlan& plan, const CriticalValueTable& table,
                                int threads = 0, bool echo_progress = false);

/// CSV: one row per scenario, fixed column order. JSON: full metadata; the
/// wall_time_s field is the one non-deterministic entry.
void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path);
void write_report_json(const ExperimentReport& report, const std::filesystem::path& path);
/// Localize mode: per-replicate eta_hat/n values and a 20-bin histogram.
void write_localization_csv(const ExperimentReport& report, const std::filesystem::path& path);
void write_localization_histogram_csv(const ExperimentReport& report,
                                      const std::filesystem::path& path);

ExperimentPlan plan_from_json_text(const std::string& text);
std::string plan_to_json_text(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::filesystem::path& path);

}  // namespace qfcusum
