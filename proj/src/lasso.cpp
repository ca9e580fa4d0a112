#include "qfcusum/lasso.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include "qfcusum/random.hpp"

namespace qfcusum {

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

double lasso_objective(const Dataset& data, const Interval& interval, const Vector& beta,
                       double lambda) {
    const int m = interval.size();
    const auto x = data.x().middleRows(interval.lo, m);
    const auto y = data.y().segment(interval.lo, m);
    const double rss = (y - x * beta).squaredNorm();
    return rss / m + lambda / std::sqrt(static_cast<double>(m)) * beta.lpNorm<1>();
}

Vector lasso_gradient(const Dataset& data, const Interval& interval, const Vector& beta) {
    const int m = interval.size();
    const auto x = data.x().middleRows(interval.lo, m);
    const auto y = data.y().segment(interval.lo, m);
    return -2.0 / m * (x.transpose() * (y - x * beta));
}

double lambda_max(const Dataset& data, const Interval& interval) {
    check_interval(interval, data.n());
    const int m = interval.size();
    const auto x = data.x().middleRows(interval.lo, m);
    const auto y = data.y().segment(interval.lo, m);
    return 2.0 / std::sqrt(static_cast<double>(m)) *
           (x.transpose() * y).cwiseAbs().maxCoeff();
}

IntervalLassoFit fit_interval_lasso(const Dataset& data, const Interval& interval,
                                    const LassoConfig& config) {
    check_interval(interval, data.n());
    if (config.lambda < 0) throw std::invalid_argument("lambda must be nonnegative");
    if (config.tol <= 0) throw std::invalid_argument("tol must be positive");
    if (config.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

    const int m = interval.size();
    const int p = data.p();
    const auto& cols = data.x_by_column();
    const auto y = data.y().segment(interval.lo, m);

    Vector beta = Vector::Zero(p);
    if (config.warm_start) {
        if (config.warm_start->size() != p)
            throw std::invalid_argument("warm_start length does not match p");
        beta = *config.warm_start;
    }

    // soft((2/m) X_j^T z, lambda/sqrt(m)) / ((2/m)||X_j||^2) with the common
    // 2/m factor cancelled: threshold on the unscaled inner product.
    const double threshold = 0.5 * config.lambda * std::sqrt(static_cast<double>(m));
    Vector col_sq(p);
    for (int j = 0; j < p; ++j) col_sq[j] = cols.col(j).segment(interval.lo, m).squaredNorm();

    Vector residual(m);
    if (beta.isZero(0.0))
        residual = y;
    else
        residual = y - data.x().middleRows(interval.lo, m) * beta;

#ifndef NDEBUG
    double prev_objective = lasso_objective(data, interval, beta, config.lambda);
#endif

    // One pass over the given coordinates; returns the max coefficient change.
    auto sweep_over = [&](const auto& indices) {
        double max_change = 0.0;
        for (const int j : indices) {
            const double old = beta[j];
            if (col_sq[j] <= 0.0) {
                if (old != 0.0) {
                    beta[j] = 0.0;
                    max_change = std::max(max_change, std::abs(old));
                }
                continue;
            }
            const auto column = cols.col(j).segment(interval.lo, m);
            const double inner = column.dot(residual) + col_sq[j] * old;
            // The relative slack keeps lambda == lambda_max landing on the
            // exact zero vector despite rounding in the threshold product.
            double updated = 0.0;
            if (std::abs(inner) > threshold * (1.0 + 1e-12))
                updated = soft_threshold(inner, threshold) / col_sq[j];
            if (updated != old) {
                residual -= (updated - old) * column;
                beta[j] = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
#ifndef NDEBUG
        const double obj = lasso_objective(data, interval, beta, config.lambda);
        assert(obj <= prev_objective + 1e-10 * (1.0 + std::abs(prev_objective)));
        prev_objective = obj;
#endif
        return max_change;
    };

    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> active;

    // Cyclic coordinate descent with an active-set inner loop: iterate the
    // current support until stable, then confirm with a full sweep.
    // Convergence is declared only on a full sweep.
    int sweeps = 0;
    bool converged = false;
    while (sweeps < config.max_iter) {
        ++sweeps;
        if (sweep_over(all) < config.tol) {
            converged = true;
            break;
        }
        active.clear();
        for (int j = 0; j < p; ++j)
            if (beta[j] != 0.0) active.push_back(j);
        if (active.size() == static_cast<std::size_t>(p)) continue;
        while (sweeps < config.max_iter) {
            ++sweeps;
            if (sweep_over(active) < config.tol) break;
        }
    }

    if (!beta.allFinite() || !residual.allFinite())
        throw std::runtime_error("non-finite values encountered in lasso fit");

    IntervalLassoFit fit;
    fit.beta_hat = std::move(beta);
    fit.interval = interval;
    fit.lambda = config.lambda;
    fit.iterations = sweeps;
    fit.converged = converged;
    fit.objective = residual.squaredNorm() / m +
                    config.lambda / std::sqrt(static_cast<double>(m)) * fit.beta_hat.lpNorm<1>();
    return fit;
}

std::vector<double> lambda_path(const Dataset& data, const Interval& interval, int n_lambda) {
    if (n_lambda < 2) throw std::invalid_argument("n_lambda must be >= 2");
    const double lmax = lambda_max(data, interval);
    if (lmax <= 0.0) throw std::invalid_argument("degenerate lambda path: X^T y is zero");
    std::vector<double> path(n_lambda);
    for (int k = 0; k < n_lambda; ++k)
        path[k] = lmax * std::pow(10.0, -3.0 * k / (n_lambda - 1));
    return path;
}

namespace {

// Near-equal fold sizes; fold of index i in interval order.
std::vector<int> assign_folds(int m, int folds, std::uint64_t seed, bool blocked) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    if (!blocked) {
        auto rng = make_rng(derive_seed(seed, 0x666f6c64ULL));  // "fold"
        std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<int> fold_of(m);
    const int base = m / folds, extra = m % folds;
    int pos = 0;
    for (int f = 0; f < folds; ++f) {
        const int size = base + (f < extra ? 1 : 0);
        for (int k = 0; k < size; ++k) fold_of[order[pos++]] = f;
    }
    return fold_of;
}

}  // namespace

CrossValidationResult cross_validate_lambda(const Dataset& data, const Interval& interval,
                                            int folds, int n_lambda, std::uint64_t seed,
                                            bool blocked_folds, double fit_tol,
                                            int fit_max_iter) {
    check_interval(interval, data.n());
    if (folds < 2) throw std::invalid_argument("folds must be >= 2");
    const int m = interval.size();
    if (m < folds) throw std::invalid_argument("interval size " + std::to_string(m) +
                                               " is smaller than fold count " +
                                               std::to_string(folds));

    const std::vector<double> path = lambda_path(data, interval, n_lambda);
    const std::vector<int> fold_of = assign_folds(m, folds, seed, blocked_folds);
    const int p = data.p();

    std::vector<double> sq_error(path.size(), 0.0);
    std::vector<std::vector<double>> fold_mean(folds, std::vector<double>(path.size(), 0.0));
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train_rows, test_rows;
        for (int i = 0; i < m; ++i)
            (fold_of[i] == f ? test_rows : train_rows).push_back(interval.lo + i);

        Vector y_train(train_rows.size());
        Matrix x_train(train_rows.size(), p);
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            y_train[static_cast<Eigen::Index>(i)] = data.y()[train_rows[i]];
            x_train.row(static_cast<Eigen::Index>(i)) = data.x().row(train_rows[i]);
        }
        const Dataset train(std::move(y_train), std::move(x_train));
        const Interval full{0, static_cast<int>(train_rows.size())};

        LassoConfig config;
        config.tol = fit_tol;
        config.max_iter = fit_max_iter;
        for (std::size_t k = 0; k < path.size(); ++k) {
            config.lambda = path[k];
            const IntervalLassoFit fit = fit_interval_lasso(train, full, config);
            config.warm_start = fit.beta_hat;  // warm start down the path
            double fold_sq = 0.0;
            for (const int row : test_rows) {
                const double pred = data.x().row(row).dot(fit.beta_hat);
                fold_sq += (data.y()[row] - pred) * (data.y()[row] - pred);
            }
            sq_error[k] += fold_sq;
            fold_mean[f][k] = fold_sq / test_rows.size();
        }
    }

    CrossValidationResult result;
    result.cv_curve.reserve(path.size());
    result.cv_se.reserve(path.size());
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const double mse = sq_error[k] / m;
        result.cv_curve.emplace_back(path[k], mse);
        double mean_of_folds = 0.0;
        for (int f = 0; f < folds; ++f) mean_of_folds += fold_mean[f][k];
        mean_of_folds /= folds;
        double var_of_folds = 0.0;
        for (int f = 0; f < folds; ++f)
            var_of_folds += (fold_mean[f][k] - mean_of_folds) * (fold_mean[f][k] - mean_of_folds);
        result.cv_se.push_back(std::sqrt(var_of_folds / (folds - 1) / folds));
        if (mse < best) {
            best = mse;
            best_k = k;
            result.lambda_star = path[k];
        }
    }
    // Largest lambda whose mean CV error is within one SE of the minimum
    // (path is descending, so the first qualifying entry wins).
    result.lambda_1se = result.lambda_star;
    for (std::size_t k = 0; k <= best_k; ++k) {
        if (result.cv_curve[k].second <= best + result.cv_se[best_k]) {
            result.lambda_1se = path[k];
            break;
        }
    }
    return result;
}

}  // namespace qfcusum
