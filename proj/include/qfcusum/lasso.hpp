#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qfcusum/data.hpp"

namespace qfcusum {

struct LassoConfig {
    double lambda = 0.0;            // penalty weight, applied as lambda/sqrt(|I|)
    double tol = 1e-8;              // max abs coordinate change per sweep
    int max_iter = 10000;           // full sweeps
    std::optional<Vector> warm_start;
};

struct IntervalLassoFit {
    Vector beta_hat;
    Interval interval;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
};

/// sign(z) * max(|z| - gamma, 0).
double soft_threshold(double z, double gamma);

/// Minimizes (1/|I|) sum_{i in I} (y_i - x_i^T b)^2 + (lambda/sqrt(|I|)) ||b||_1
/// by cyclic coordinate descent (coordinates 1..p, deterministic order).
/// Non-convergence at max_iter returns the fit with converged=false.
IntervalLassoFit fit_interval_lasso(const Dataset& data, const Interval& interval,
                                    const LassoConfig& config);

/// Objective value of the interval Lasso problem at beta.
double lasso_objective(const Dataset& data, const Interval& interval, const Vector& beta,
                       double lambda);

/// Gradient of the squared loss: g_j = -(2/|I|) sum_{i in I} x_ij (y_i - x_i^T beta).
Vector lasso_gradient(const Dataset& data, const Interval& interval, const Vector& beta);

/// Smallest penalty that forces beta = 0: (2/sqrt(|I|)) * ||X^T y||_inf.
double lambda_max(const Dataset& data, const Interval& interval);

/// Geometric grid from lambda_max down to 1e-3 * lambda_max, descending.
std::vector<double> lambda_path(const Dataset& data, const Interval& interval, int n_lambda);

struct CrossValidationResult {
    double lambda_star = 0.0;  // minimizer of the mean CV error
    double lambda_1se = 0.0;   // largest lambda within one fold-SE of the minimum
    std::vector<std::pair<double, double>> cv_curve;  // (lambda, mean squared prediction error)
    std::vector<double> cv_se;  // fold-level standard error per curve point
};

/// K-fold cross-validation over the lambda path. Folds are a seeded uniform
/// random partition; blocked_folds assigns contiguous blocks instead (for
/// temporally dependent data). Ties on the curve resolve to the larger lambda.
/// Fold fits run at a looser tolerance and sweep cap than contract fits;
/// selection only needs prediction error, not exact solutions.
CrossValidationResult cross_validate_lambda(const Dataset& data, const Interval& interval,
                                            int folds, int n_lambda, std::uint64_t seed,
                                            bool blocked_folds = false, double fit_tol = 1e-5,
                                            int fit_max_iter = 1000);

}  // namespace qfcusum
