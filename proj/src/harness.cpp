#include "qfcusum/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qfcusum/parallel.hpp"
#include "qfcusum/random.hpp"
#include "qfcusum/scan.hpp"
#include "serialization.hpp"

namespace qfcusum {

std::string mode_name(ExperimentMode mode) {
    switch (mode) {
        case ExperimentMode::Size: return "Size";
        case ExperimentMode::Power: return "Power";
        case ExperimentMode::Localize: return "Localize";
    }
    throw std::logic_error("unknown ExperimentMode");
}

ExperimentMode mode_from_name(const std::string& name) {
    if (name == "Size") return ExperimentMode::Size;
    if (name == "Power") return ExperimentMode::Power;
    if (name == "Localize") return ExperimentMode::Localize;
    throw std::invalid_argument("unknown experiment mode: " + name);
}

namespace {

struct ReplicateOutcome {
    bool failed = false;
    bool rejected = false;
    double max_stat = 0.0;
    double eta_frac = 0.0;
    double runtime_s = 0.0;
    std::string error;
};

ReplicateOutcome run_replicate(const ScenarioSpec& base, std::uint64_t seed,
                               const ExperimentPlan& plan, double critical_value) {
    ReplicateOutcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        ScenarioSpec spec = base;
        spec.seed = seed;
        const GeneratedSample sample = generate(spec);
        const NuisanceEstimates nuisance =
            estimate_nuisance(sample.data, plan.zeta, 10, derive_seed(seed, 21));

        ScanConfig config;
        config.zeta = plan.zeta;
        config.stride = plan.stride;
        config.sigma_eps = nuisance.sigma_eps_hat;
        config.lambda = nuisance.lambda;
        config.xi_seed = derive_seed(seed, 22);

        if (plan.mode == ExperimentMode::Localize) {
            const int eta_hat = localize(sample.data, config);
            out.eta_frac = static_cast<double>(eta_hat) / spec.n;
        } else {
            if (nuisance.sigma_xi <= 0.0)
                throw std::runtime_error("sigma_xi estimate is zero");
            config.sigma_xi = nuisance.sigma_xi;
            const ScanResult result = scan(sample.data, config);
            out.max_stat = result.max_stat;
            out.rejected = result.max_stat > critical_value;
        }
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    out.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentPlan& plan, const CriticalValueTable& table,
                                int threads, bool echo_progress) {
    if (plan.reps < 1) throw std::invalid_argument("plan needs reps >= 1");
    if (plan.scenarios.empty()) throw std::invalid_argument("plan has no scenarios");
    if (std::abs(table.zeta - plan.zeta) > 1e-12)
        throw std::invalid_argument("critical-value table zeta does not match plan zeta");
    const double critical_value =
        plan.mode == ExperimentMode::Localize ? 0.0 : table.quantile(plan.alpha);

    const auto wall_start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.plan = plan;
    report.table_digest = table.digest;

    for (std::size_t k = 0; k < plan.scenarios.size(); ++k) {
        const ScenarioSpec& base = plan.scenarios[k];
        std::vector<ReplicateOutcome> outcomes(plan.reps);
        parallel_for(0, plan.reps, threads, [&](int r) {
            const std::uint64_t seed = derive_seed(plan.master_seed, k, r);
            outcomes[r] = run_replicate(base, seed, plan, critical_value);
        });

        ScenarioResult row;
        row.scenario = base;
        row.scenario_id = base.id();
        double runtime_sum = 0.0;
        int rejections = 0;
        for (const ReplicateOutcome& out : outcomes) {
            runtime_sum += out.runtime_s;
            if (out.failed) {
                ++row.failures;
                continue;
            }
            ++row.reps_completed;
            if (plan.mode == ExperimentMode::Localize) {
                row.eta_fracs.push_back(out.eta_frac);
            } else {
                row.max_stats.push_back(out.max_stat);
                if (out.rejected) ++rejections;
            }
        }
        if (row.failures > 0.05 * plan.reps) {
            std::string first_error;
            for (const auto& out : outcomes)
                if (out.failed) { first_error = out.error; break; }
            throw std::runtime_error("scenario " + row.scenario_id + ": " +
                                     std::to_string(row.failures) + "/" +
                                     std::to_string(plan.reps) +
                                     " replicates failed (first error: " + first_error + ")");
        }
        if (row.reps_completed > 0 && plan.mode != ExperimentMode::Localize) {
            row.rejection_rate = static_cast<double>(rejections) / row.reps_completed;
            row.mc_standard_error = std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) /
                                              row.reps_completed);
        }
        row.mean_runtime_s = runtime_sum / plan.reps;
        report.rows.push_back(std::move(row));
        if (echo_progress)
            std::cerr << "scenario " << report.rows.back().scenario_id << ": done ("
                      << report.rows.back().reps_completed << " reps)\n";
    }

    // Power curves read ascending in kappa; stable keeps plan order on ties.
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const ScenarioResult& a, const ScenarioResult& b) {
                         return a.scenario.change_pattern.kappa <
                                b.scenario.change_pattern.kappa;
                     });

    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return report;
}

void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path.string());
    out << "scenario_id,n,p,s,sigma_kind,dependence,change_kind,kappa,mode,reps_completed,"
           "failures,rejection_rate,mc_standard_error\n";
    char buf[64];
    for (const ScenarioResult& row : report.rows) {
        const ScenarioSpec& sc = row.scenario;
        std::string change_kind = "None";
        if (sc.change_pattern.kind == ChangePattern::Kind::SingleAt) change_kind = "SingleAt";
        if (sc.change_pattern.kind == ChangePattern::Kind::EpidemicThirds)
            change_kind = "EpidemicThirds";
        out << row.scenario_id << ',' << sc.n << ',' << sc.p << ',' << sc.s << ','
            << sigma_kind_name(sc.sigma_kind) << ',' << dependence_name(sc.dependence) << ','
            << change_kind << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", sc.change_pattern.kappa);
        out << buf << ',' << mode_name(report.plan.mode) << ',' << row.reps_completed << ','
            << row.failures << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", row.rejection_rate);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", row.mc_standard_error);
        out << buf << '\n';
    }
}

namespace {

nlohmann::json plan_to_json(const ExperimentPlan& plan) {
    nlohmann::json scenarios = nlohmann::json::array();
    for (const ScenarioSpec& spec : plan.scenarios) scenarios.push_back(scenario_to_json(spec));
    return {{"scenarios", scenarios}, {"reps", plan.reps},
            {"alpha", plan.alpha},    {"zeta", plan.zeta},
            {"master_seed", plan.master_seed}, {"mode", mode_name(plan.mode)},
            {"stride", plan.stride}};
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
    ExperimentPlan plan;
    for (const auto& item : j.at("scenarios")) plan.scenarios.push_back(scenario_from_json(item));
    plan.reps = j.at("reps").get<int>();
    plan.alpha = j.value("alpha", 0.05);
    plan.zeta = j.value("zeta", 0.15);
    plan.master_seed = j.at("master_seed").get<std::uint64_t>();
    plan.mode = mode_from_name(j.at("mode").get<std::string>());
    plan.stride = j.value("stride", 1);
    return plan;
}

}  // namespace

void write_report_json(const ExperimentReport& report, const std::filesystem::path& path) {
    nlohmann::json rows = nlohmann::json::array();
    for (const ScenarioResult& row : report.rows) {
        nlohmann::json r = {{"scenario_id", row.scenario_id},
                            {"scenario", scenario_to_json(row.scenario)},
                            {"reps_completed", row.reps_completed},
                            {"failures", row.failures},
                            {"rejection_rate", row.rejection_rate},
                            {"mc_standard_error", row.mc_standard_error},
                            {"mean_runtime_s", row.mean_runtime_s}};
        if (!row.eta_fracs.empty()) r["eta_fracs"] = row.eta_fracs;
        rows.push_back(std::move(r));
    }
    const nlohmann::json j = {{"plan", plan_to_json(report.plan)},
                              {"rows", rows},
                              {"table_digest", report.table_digest},
                              {"wall_time_s", report.wall_time_s}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path.string());
    out << j.dump(2) << '\n';
}

void write_localization_csv(const ExperimentReport& report,
                            const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write localization csv: " + path.string());
    out << "scenario_id,replicate,eta_frac\n";
    char buf[40];
    for (const ScenarioResult& row : report.rows)
        for (std::size_t r = 0; r < row.eta_fracs.size(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.17g", row.eta_fracs[r]);
            out << row.scenario_id << ',' << r << ',' << buf << '\n';
        }
}

void write_localization_histogram_csv(const ExperimentReport& report,
                                      const std::filesystem::path& path) {
    constexpr int kBins = 20;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write histogram csv: " + path.string());
    out << "scenario_id,bin_lo,bin_hi,count\n";
    for (const ScenarioResult& row : report.rows) {
        std::vector<int> counts(kBins, 0);
        for (const double frac : row.eta_fracs) {
            int bin = static_cast<int>(frac * kBins);
            bin = std::clamp(bin, 0, kBins - 1);
            ++counts[bin];
        }
        for (int b = 0; b < kBins; ++b)
            out << row.scenario_id << ',' << static_cast<double>(b) / kBins << ','
                << static_cast<double>(b + 1) / kBins << ',' << counts[b] << '\n';
    }
}

ExperimentPlan plan_from_json_text(const std::string& text) {
    return plan_from_json(nlohmann::json::parse(text));
}

std::string plan_to_json_text(const ExperimentPlan& plan) { return plan_to_json(plan).dump(2); }

ExperimentPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plan file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return plan_from_json_text(buffer.str());
}

}  // namespace qfcusum
