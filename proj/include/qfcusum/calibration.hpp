#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "qfcusum/data.hpp"

namespace qfcusum {

/// Monte-Carlo quantiles of sup_{r in [zeta, 1-zeta]} G(r), where
/// G(r) = (B(r) - r B(1)) / sqrt(r(1-r)) and B is standard Brownian motion.
/// The table is pivotal: one table serves every dataset with the same zeta.
struct CriticalValueTable {
    double zeta = 0.15;
    int grid_points = 2000;
    int reps = 100000;
    std::uint64_t seed = 0;
    std::map<double, double> quantiles;  // alpha -> G_alpha(zeta)
    std::uint64_t digest = 0;            // checksum of the sorted sup draws

    // Sorted sup draws, kept in memory for p-values; not serialized.
    // Empty after loading from JSON; run_test re-simulates and checks digest.
    std::vector<double> sup_draws;

    double quantile(double alpha) const;
    bool has_alpha(double alpha) const;
};

CriticalValueTable simulate_critical_values(double zeta, const std::vector<double>& alphas,
                                            int grid_points, int reps, std::uint64_t seed,
                                            int threads = 0);

/// One path of G(r) at r = k/grid_points, k = 1..grid_points-1; the exact
/// construction the critical-value simulation maximizes over.
Vector standardized_bridge_path(std::uint64_t seed, int grid_points);

/// Data-driven tuning per the stationary-edge protocol: 10-fold CV for
/// lambda on the first and last zeta-fraction, sparsity from the nonzero
/// count, residual noise level with a degrees-of-freedom correction, and
/// sigma_xi = s_hat * log(p)/sqrt(n) * log(log(n)). Natural logarithms.
struct NuisanceEstimates {
    double lambda = 0.0;
    double s_hat = 0.0;          // may be fractional (average of two counts)
    double sigma_eps_hat = 0.0;
    double sigma_xi = 0.0;
    double zeta = 0.15;
};

NuisanceEstimates estimate_nuisance(const Dataset& data, double zeta, int folds,
                                    std::uint64_t seed, bool blocked_folds = false);

struct TestOutcome {
    double max_stat = 0.0;
    double critical_value = 0.0;
    double alpha = 0.0;
    bool reject = false;
    double p_value = 1.0;  // Monte-Carlo: share of sup draws >= max_stat
    int argmax_t = 0;
    NuisanceEstimates nuisance;
};

/// End-to-end test: estimate nuisance quantities (unless overridden), scan,
/// and compare max T_n against G_alpha(zeta) from the table.
TestOutcome run_test(const Dataset& data, double zeta, double alpha,
                     const CriticalValueTable& table, std::uint64_t seed,
                     const std::optional<NuisanceEstimates>& overrides = std::nullopt);

std::string test_outcome_to_json(const TestOutcome& outcome, std::uint64_t seed);

// Table cache: JSON files keyed by (zeta, grid_points, reps, seed) under
// QFCUSUM_CACHE_DIR (default: .qfcusum-cache in the working directory).
std::string table_to_json_text(const CriticalValueTable& table);
CriticalValueTable table_from_json_text(const std::string& text);
void save_table(const CriticalValueTable& table, const std::filesystem::path& path);
CriticalValueTable load_table(const std::filesystem::path& path);
std::filesystem::path default_cache_dir();
CriticalValueTable load_or_compute_table(double zeta, const std::vector<double>& alphas,
                                         int grid_points, int reps, std::uint64_t seed,
                                         const std::filesystem::path& cache_dir,
                                         int threads = 0);

}  // namespace qfcusum
