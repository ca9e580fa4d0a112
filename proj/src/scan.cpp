#include "qfcusum/scan.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include <json.hpp>

#include "qfcusum/random.hpp"

namespace qfcusum {

namespace {

void check_split(int t, int n) {
    if (t <= 0 || t >= n)
        throw std::invalid_argument("split t=" + std::to_string(t) + " must lie in (0, " +
                                    std::to_string(n) + ")");
}

void check_fit_intervals(const IntervalLassoFit& left, const IntervalLassoFit& right, int t,
                         int n) {
    if (left.interval.lo != 0 || left.interval.hi != t)
        throw std::invalid_argument("left fit does not cover (0, t]");
    if (right.interval.lo != t || right.interval.hi != n)
        throw std::invalid_argument("right fit does not cover (t, n]");
}

// Shared evaluation of S_n(t); xi == nullptr gives the unrandomized statistic.
double qf_statistic(const Dataset& data, int t, const Vector& beta_left,
                    const Vector& beta_right, const Vector* xi) {
    const int n = data.n();
    const double tl = t, tr = n - t;
    const auto x_top = data.x().topRows(t);
    const auto x_bot = data.x().bottomRows(n - t);

    const Vector delta = beta_left - beta_right;
    const Vector u_top = x_top * delta;
    const Vector u_bot = x_bot * delta;
    const Vector res_top = data.y().head(t) - x_top * beta_left;
    const Vector res_bot = data.y().tail(n - t) - x_bot * beta_right;

    const double quad = 0.5 * (u_top.squaredNorm() / tl + u_bot.squaredNorm() / tr);
    double corr_left = 2.0 * u_top.dot(res_top);
    double corr_right = 2.0 * u_bot.dot(res_bot);
    if (xi) {
        corr_left += xi->head(t).dot(res_top);
        corr_right += xi->tail(n - t).dot(res_bot);
    }
    return quad + corr_left / tl - corr_right / tr;
}

}  // namespace

double bias_corrected_qf(const Dataset& data, int t, const IntervalLassoFit& fit_left,
                         const IntervalLassoFit& fit_right) {
    check_split(t, data.n());
    check_fit_intervals(fit_left, fit_right, t, data.n());
    return qf_statistic(data, t, fit_left.beta_hat, fit_right.beta_hat, nullptr);
}

double goodness_of_fit(const Dataset& data, int t, const IntervalLassoFit& fit_left,
                       const IntervalLassoFit& fit_right) {
    const int n = data.n();
    check_split(t, n);
    check_fit_intervals(fit_left, fit_right, t, n);
    const auto x_top = data.x().topRows(t);
    const auto x_bot = data.x().bottomRows(n - t);
    const Vector pooled = 0.5 * (fit_left.beta_hat + fit_right.beta_hat);

    const double rss_left = (data.y().head(t) - x_top * fit_left.beta_hat).squaredNorm();
    const double rss_pooled_top = (data.y().head(t) - x_top * pooled).squaredNorm();
    const double rss_right = (data.y().tail(n - t) - x_bot * fit_right.beta_hat).squaredNorm();
    const double rss_pooled_bot = (data.y().tail(n - t) - x_bot * pooled).squaredNorm();

    // Loss of fit of the pooled coefficient relative to the per-interval
    // fits; large under a change, and exactly half the bias-corrected QF.
    return (rss_pooled_top - rss_left) / t + (rss_pooled_bot - rss_right) / (n - t);
}

double randomized_statistic(const Dataset& data, int t, const IntervalLassoFit& fit_left,
                            const IntervalLassoFit& fit_right, const Vector& xi) {
    check_split(t, data.n());
    check_fit_intervals(fit_left, fit_right, t, data.n());
    if (xi.size() != data.n())
        throw std::invalid_argument("xi length " + std::to_string(xi.size()) +
                                    " does not match n=" + std::to_string(data.n()));
    return qf_statistic(data, t, fit_left.beta_hat, fit_right.beta_hat, &xi);
}

namespace {

void check_scan_config(const ScanConfig& config, int n) {
    if (!(config.zeta > 0.0 && config.zeta < 0.5))
        throw std::invalid_argument("zeta must lie in (0, 0.5)");
    if (static_cast<int>(std::floor(n * config.zeta)) < 1)
        throw std::invalid_argument("floor(n*zeta) must be >= 1");
    if (config.sigma_eps <= 0.0) throw std::invalid_argument("sigma_eps must be positive");
    if (config.sigma_xi < 0.0) throw std::invalid_argument("sigma_xi must be nonnegative");
    if (config.stride < 1) throw std::invalid_argument("stride must be >= 1");
}

}  // namespace

ScanResult scan(const Dataset& data, const ScanConfig& config) {
    const int n = data.n();
    check_scan_config(config, n);

    const int t_first = static_cast<int>(std::floor(n * config.zeta));
    const int t_last = static_cast<int>(std::floor(n * (1.0 - config.zeta)));

    ScanResult result;
    if (config.sigma_xi > 0.0) {
        auto rng = make_rng(config.xi_seed);
        result.xi = normal_vector(rng, n, config.sigma_xi);
    } else {
        result.xi = Vector::Zero(n);
    }

    LassoConfig fit_config;
    fit_config.lambda = config.lambda;
    fit_config.tol = config.tol;
    fit_config.max_iter = config.max_iter;

    std::optional<Vector> prev_left, prev_right;
    result.max_stat = -std::numeric_limits<double>::infinity();

    for (int t = t_first; t <= t_last; t += config.stride) {
        fit_config.warm_start = config.warm_start ? prev_left : std::nullopt;
        const IntervalLassoFit fit_left = fit_interval_lasso(data, left_of(t), fit_config);
        fit_config.warm_start = config.warm_start ? prev_right : std::nullopt;
        const IntervalLassoFit fit_right =
            fit_interval_lasso(data, right_of(t, n), fit_config);

        const double s = qf_statistic(data, t, fit_left.beta_hat, fit_right.beta_hat,
                                      &result.xi);
        const double weight = std::sqrt(static_cast<double>(t) * (n - t) / n);
        const double scale = config.sigma_xi > 0.0
                                 ? 1.0 / (config.sigma_eps * config.sigma_xi)
                                 : 1.0 / config.sigma_eps;
        const double stat = scale * weight * s;
        if (!std::isfinite(stat))
            throw std::runtime_error("non-finite scan statistic at t=" + std::to_string(t));

        result.grid.push_back(t);
        result.s_n.push_back(s);
        result.t_n.push_back(stat);
        result.fits_left.push_back(fit_left.converged ? 1 : 0);
        result.fits_right.push_back(fit_right.converged ? 1 : 0);
        if (stat > result.max_stat) {
            result.max_stat = stat;
            result.argmax_t = t;
        }

        prev_left = fit_left.beta_hat;
        prev_right = fit_right.beta_hat;
    }
    return result;
}

int localize(const Dataset& data, const ScanConfig& config) {
    ScanConfig plain = config;
    plain.sigma_xi = 0.0;
    return scan(data, plain).argmax_t;
}

std::string scan_result_to_json(const ScanResult& result, const ScanConfig& config) {
    nlohmann::json j;
    j["grid"] = result.grid;
    j["s_n"] = result.s_n;
    j["t_n"] = result.t_n;
    j["max_stat"] = result.max_stat;
    j["argmax_t"] = result.argmax_t;
    j["xi_seed"] = config.xi_seed;
    j["config"] = {{"zeta", config.zeta},
                   {"stride", config.stride},
                   {"sigma_eps", config.sigma_eps},
                   {"sigma_xi", config.sigma_xi},
                   {"xi_seed", config.xi_seed},
                   {"lambda", config.lambda},
                   {"tol", config.tol},
                   {"max_iter", config.max_iter},
                   {"warm_start", config.warm_start}};
    return j.dump(2);
}

void write_scan_csv(const ScanResult& result, std::ostream& out) {
    out << "t,s_n,t_n\n";
    char buf[96];
    for (std::size_t k = 0; k < result.grid.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", result.grid[k], result.s_n[k],
                      result.t_n[k]);
        out << buf;
    }
}

}  // namespace qfcusum
