#include "qfcusum/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qfcusum/lasso.hpp"
#include "qfcusum/parallel.hpp"
#include "qfcusum/random.hpp"
#include "qfcusum/scan.hpp"

namespace qfcusum {

namespace {

std::uint64_t fnv1a_digest(const std::vector<double>& values) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (const double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            hash ^= (bits >> (8 * b)) & 0xFFULL;
            hash *= 0x100000001B3ULL;
        }
    }
    return hash;
}

// Empirical quantile at level 1-alpha, ceiling-index order statistic.
double upper_quantile(const std::vector<double>& sorted, double alpha) {
    const auto reps = static_cast<double>(sorted.size());
    auto rank = static_cast<long>(std::ceil((1.0 - alpha) * reps));
    rank = std::clamp(rank, 1L, static_cast<long>(sorted.size()));
    return sorted[static_cast<std::size_t>(rank - 1)];
}

// Standardized Brownian bridge on {k/G}: cumulative sums of N(0, 1/G)
// increments, centered by r B(1) and scaled by sqrt(r(1-r)).
void bridge_path(std::mt19937_64& rng, int grid_points, std::vector<double>& g_out) {
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(double(grid_points)));
    g_out.resize(grid_points - 1);
    double b = 0.0;
    std::vector<double>& brownian = g_out;  // reuse storage for the partial sums
    for (int k = 0; k < grid_points - 1; ++k) {
        b += gauss(rng);
        brownian[k] = b;
    }
    const double b1 = b + gauss(rng);
    for (int k = 1; k < grid_points; ++k) {
        const double r = static_cast<double>(k) / grid_points;
        g_out[k - 1] = (brownian[k - 1] - r * b1) / std::sqrt(r * (1.0 - r));
    }
}

}  // namespace

Vector standardized_bridge_path(std::uint64_t seed, int grid_points) {
    if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
    auto rng = make_rng(seed);
    std::vector<double> g;
    bridge_path(rng, grid_points, g);
    return Eigen::Map<const Vector>(g.data(), static_cast<Eigen::Index>(g.size()));
}

double CriticalValueTable::quantile(double alpha) const {
    const auto it = quantiles.find(alpha);
    if (it != quantiles.end()) return it->second;
    if (!sup_draws.empty()) return upper_quantile(sup_draws, alpha);
    throw std::invalid_argument("alpha not tabulated and no draws available");
}

bool CriticalValueTable::has_alpha(double alpha) const {
    return quantiles.count(alpha) > 0 || !sup_draws.empty();
}

CriticalValueTable simulate_critical_values(double zeta, const std::vector<double>& alphas,
                                            int grid_points, int reps, std::uint64_t seed,
                                            int threads) {
    if (!(zeta > 0.0 && zeta < 0.5)) throw std::invalid_argument("zeta must lie in (0, 0.5)");
    for (const double a : alphas)
        if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (grid_points < 100) throw std::invalid_argument("grid_points must be >= 100");
    if (reps < 1000) throw std::invalid_argument("reps must be >= 1000");

    // Grid indices k with r = k/grid_points inside [zeta, 1-zeta].
    const int k_lo = std::max(1, static_cast<int>(std::ceil(zeta * grid_points)));
    const int k_hi = std::min(grid_points - 1,
                              static_cast<int>(std::floor((1.0 - zeta) * grid_points)));

    std::vector<double> sups(reps);
    parallel_for(0, reps, threads, [&](int rep) {
        thread_local std::vector<double> g;
        auto rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
        bridge_path(rng, grid_points, g);
        double sup = -std::numeric_limits<double>::infinity();
        for (int k = k_lo; k <= k_hi; ++k) sup = std::max(sup, g[k - 1]);
        sups[rep] = sup;
    });

    std::sort(sups.begin(), sups.end());

    CriticalValueTable table;
    table.zeta = zeta;
    table.grid_points = grid_points;
    table.reps = reps;
    table.seed = seed;
    for (const double a : alphas) table.quantiles[a] = upper_quantile(sups, a);
    table.digest = fnv1a_digest(sups);
    table.sup_draws = std::move(sups);
    return table;
}

NuisanceEstimates estimate_nuisance(const Dataset& data, double zeta, int folds,
                                    std::uint64_t seed, bool blocked_folds) {
    if (!(zeta > 0.0 && zeta < 0.5)) throw std::invalid_argument("zeta must lie in (0, 0.5)");
    const int n = data.n();
    const int edge = static_cast<int>(std::floor(zeta * n));
    if (edge <= folds)
        throw std::invalid_argument("zeta*n = " + std::to_string(edge) +
                                    " leaves too few observations for " +
                                    std::to_string(folds) + "-fold CV");

    const Interval pre{0, edge};
    const Interval post{static_cast<int>(std::floor((1.0 - zeta) * n)), n};

    // Per edge segment, two cross-validated fits play different roles:
    //  - the CV-minimum fit gives the dense support count s_hat, which only
    //    needs to upper-bound the true sparsity for the sigma_xi level;
    //  - the one-SE fit gives lambda and the dof-corrected noise level
    //    (the CV-minimum fit overfits short segments and biases sigma_eps
    //    downward, which inflates the test statistic).
    constexpr int kPathLength = 50;
    auto fit_segment = [&](const Interval& segment, std::uint64_t segment_seed,
                           double& lambda_out, double& s_out, double& sigma_out) {
        const CrossValidationResult cv = cross_validate_lambda(
            data, segment, folds, kPathLength, segment_seed, blocked_folds);
        LassoConfig config;
        config.lambda = cv.lambda_star;
        const IntervalLassoFit dense = fit_interval_lasso(data, segment, config);
        s_out = static_cast<double>((dense.beta_hat.array() != 0.0).count());

        config.lambda = cv.lambda_1se;
        const IntervalLassoFit sparse = fit_interval_lasso(data, segment, config);
        const auto s_sparse = (sparse.beta_hat.array() != 0.0).count();
        const double dof = segment.size() - static_cast<double>(s_sparse);
        if (dof <= 0.0)
            throw std::runtime_error(
                "degenerate variance estimate: selected support as large as the segment; "
                "increase zeta or the sample size");
        const auto x = data.x().middleRows(segment.lo, segment.size());
        const auto y = data.y().segment(segment.lo, segment.size());
        const double rss = (y - x * sparse.beta_hat).squaredNorm();
        // Sparse recovery on noiseless data leaves only shrinkage residue,
        // orders of magnitude below the response scale; such a noise level
        // cannot feed the scan (sigma_eps > 0 required downstream).
        const double mean_sq_y = y.squaredNorm() / segment.size();
        if (rss / dof <= 1e-4 * mean_sq_y)
            throw std::runtime_error(
                "degenerate variance estimate: segment residual is numerically zero "
                "(noiseless data); the test requires sigma_eps > 0");
        lambda_out = cv.lambda_1se;
        sigma_out = std::sqrt(rss / dof);
    };

    double lambda_pre, s_pre, sigma_pre;
    double lambda_post, s_post, sigma_post;
    fit_segment(pre, derive_seed(seed, 1), lambda_pre, s_pre, sigma_pre);
    fit_segment(post, derive_seed(seed, 2), lambda_post, s_post, sigma_post);

    NuisanceEstimates est;
    est.zeta = zeta;
    // Scan fits need lambda at the theoretical sqrt(log p) rate or above;
    // prediction-optimal CV choices on short segments run smaller and let
    // coefficient-estimate noise leak into the statistic.
    est.lambda = std::max(0.5 * (lambda_pre + lambda_post),
                          2.0 * std::sqrt(std::log(static_cast<double>(data.p()))));
    est.s_hat = 0.5 * (s_pre + s_post);  // kept fractional
    est.sigma_eps_hat = 0.5 * (sigma_pre + sigma_post);
    est.sigma_xi = est.s_hat * std::log(static_cast<double>(data.p())) /
                   std::sqrt(static_cast<double>(n)) * std::log(std::log(n));
    if (est.sigma_eps_hat <= 0.0)
        throw std::runtime_error("estimated noise level is zero; the scan requires "
                                 "sigma_eps > 0 (data may be noiseless)");
    return est;
}

TestOutcome run_test(const Dataset& data, double zeta, double alpha,
                     const CriticalValueTable& table, std::uint64_t seed,
                     const std::optional<NuisanceEstimates>& overrides) {
    if (std::abs(table.zeta - zeta) > 1e-12)
        throw std::invalid_argument("table zeta does not match requested zeta");
    if (!table.has_alpha(alpha))
        throw std::invalid_argument("alpha not available in critical-value table");

    const NuisanceEstimates nuisance =
        overrides ? *overrides : estimate_nuisance(data, zeta, 10, derive_seed(seed, 11));
    if (nuisance.sigma_eps_hat <= 0.0)
        throw std::invalid_argument("sigma_eps must be positive to run the test");
    if (nuisance.sigma_xi <= 0.0)
        throw std::invalid_argument(
            "sigma_xi is zero (estimated sparsity 0); supply overrides to run the test");

    ScanConfig config;
    config.zeta = zeta;
    config.sigma_eps = nuisance.sigma_eps_hat;
    config.sigma_xi = nuisance.sigma_xi;
    config.xi_seed = derive_seed(seed, 12);
    config.lambda = nuisance.lambda;
    const ScanResult result = scan(data, config);

    // P-values need the raw sup draws; a table loaded from JSON carries only
    // quantiles, so re-simulate its draws and insist the digest matches.
    const std::vector<double>* draws = &table.sup_draws;
    CriticalValueTable resimulated;
    if (draws->empty()) {
        resimulated = simulate_critical_values(table.zeta, {}, table.grid_points, table.reps,
                                               table.seed);
        if (resimulated.digest != table.digest)
            throw std::runtime_error(
                "critical-value table digest mismatch on re-simulation; recalibrate with "
                "this binary");
        draws = &resimulated.sup_draws;
    }

    TestOutcome outcome;
    outcome.max_stat = result.max_stat;
    outcome.critical_value =
        table.quantiles.count(alpha) ? table.quantiles.at(alpha) : upper_quantile(*draws, alpha);
    outcome.alpha = alpha;
    outcome.reject = outcome.max_stat > outcome.critical_value;
    const auto above = std::distance(
        std::lower_bound(draws->begin(), draws->end(), outcome.max_stat), draws->end());
    outcome.p_value = static_cast<double>(above) / static_cast<double>(draws->size());
    outcome.argmax_t = result.argmax_t;
    outcome.nuisance = nuisance;
    return outcome;
}

namespace {

std::string format_alpha(double alpha) {
    char buf[32];
    const double scaled = alpha * 100.0;
    if (std::abs(scaled - std::round(scaled)) < 1e-9)
        std::snprintf(buf, sizeof(buf), "%.2f", alpha);
    else
        std::snprintf(buf, sizeof(buf), "%.6g", alpha);
    return buf;
}

}  // namespace

std::string test_outcome_to_json(const TestOutcome& outcome, std::uint64_t seed) {
    nlohmann::json j;
    j["max_stat"] = outcome.max_stat;
    j["critical_value"] = outcome.critical_value;
    j["alpha"] = outcome.alpha;
    j["reject"] = outcome.reject;
    j["p_value"] = outcome.p_value;
    j["argmax_t"] = outcome.argmax_t;
    j["seed"] = seed;
    j["nuisance"] = {{"lambda", outcome.nuisance.lambda},
                     {"s_hat", outcome.nuisance.s_hat},
                     {"sigma_eps_hat", outcome.nuisance.sigma_eps_hat},
                     {"sigma_xi", outcome.nuisance.sigma_xi},
                     {"zeta", outcome.nuisance.zeta}};
    return j.dump(2);
}

std::string table_to_json_text(const CriticalValueTable& table) {
    nlohmann::json quantiles = nlohmann::json::object();
    for (const auto& [alpha, value] : table.quantiles) quantiles[format_alpha(alpha)] = value;
    nlohmann::json j = {{"zeta", table.zeta},
                        {"grid_points", table.grid_points},
                        {"reps", table.reps},
                        {"seed", table.seed},
                        {"quantiles", quantiles},
                        {"digest", table.digest}};
    return j.dump(2);
}

CriticalValueTable table_from_json_text(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    CriticalValueTable table;
    table.zeta = j.at("zeta").get<double>();
    table.grid_points = j.at("grid_points").get<int>();
    table.reps = j.at("reps").get<int>();
    table.seed = j.at("seed").get<std::uint64_t>();
    table.digest = j.at("digest").get<std::uint64_t>();
    for (const auto& [key, value] : j.at("quantiles").items())
        table.quantiles[std::stod(key)] = value.get<double>();
    return table;
}

void save_table(const CriticalValueTable& table, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write table file: " + path.string());
    out << table_to_json_text(table) << '\n';
}

CriticalValueTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return table_from_json_text(buffer.str());
}

std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv("QFCUSUM_CACHE_DIR"); env && *env)
        return std::filesystem::path(env);
    return std::filesystem::path(".qfcusum-cache");
}

CriticalValueTable load_or_compute_table(double zeta, const std::vector<double>& alphas,
                                         int grid_points, int reps, std::uint64_t seed,
                                         const std::filesystem::path& cache_dir, int threads) {
    char name[128];
    std::snprintf(name, sizeof(name), "cv_zeta%.6g_grid%d_reps%d_seed%llu.json", zeta,
                  grid_points, reps, static_cast<unsigned long long>(seed));
    const std::filesystem::path path = cache_dir / name;
    if (std::filesystem::exists(path)) {
        CriticalValueTable table = load_table(path);
        bool complete = true;
        for (const double a : alphas) complete = complete && table.quantiles.count(a) > 0;
        if (complete) return table;
    }
    CriticalValueTable table =
        simulate_critical_values(zeta, alphas, grid_points, reps, seed, threads);
    save_table(table, path);
    return table;
}

}  // namespace qfcusum
