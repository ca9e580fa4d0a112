#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qfcusum/data.hpp"
#include "qfcusum/lasso.hpp"

namespace qfcusum {

struct ScanConfig {
    double zeta = 0.15;       // trimming; grid is [floor(n*zeta), floor(n*(1-zeta))]
    int stride = 1;           // evaluate every stride-th t
    double sigma_eps = 1.0;   // noise level (estimated or known)
    double sigma_xi = 0.0;    // randomization level; 0 disables randomization
    std::uint64_t xi_seed = 0;
    double lambda = 0.0;      // Lasso penalty used for every interval fit
    double tol = 1e-8;
    int max_iter = 10000;
    bool warm_start = true;   // seed each fit from the neighboring grid point's fit
};

struct ScanResult {
    std::vector<int> grid;
    std::vector<double> s_n;
    std::vector<double> t_n;
    double max_stat = 0.0;
    int argmax_t = 0;          // smallest grid t attaining the max
    Vector xi;                 // the randomization sequence used (zeros if sigma_xi == 0)
    std::vector<std::uint8_t> fits_left;   // per-t convergence flags
    std::vector<std::uint8_t> fits_right;
};

/// Bias-corrected quadratic form at split t: the plug-in estimate of
/// Delta^T Sigma Delta plus residual cross terms that cancel the Lasso
/// shrinkage bias. Fits must cover (0, t] and (t, n].
double bias_corrected_qf(const Dataset& data, int t, const IntervalLassoFit& fit_left,
                         const IntervalLassoFit& fit_right);

/// Goodness-of-fit contrast against the pooled coefficient
/// (beta_left + beta_right)/2; equals bias_corrected_qf / 2.
double goodness_of_fit(const Dataset& data, int t, const IntervalLassoFit& fit_left,
                       const IntervalLassoFit& fit_right);

/// Randomized statistic S_n(t): the bias-corrected quadratic form with the
/// injected noise sequence xi (length n) added to the correction terms.
/// xi == 0 reduces exactly to bias_corrected_qf.
double randomized_statistic(const Dataset& data, int t, const IntervalLassoFit& fit_left,
                            const IntervalLassoFit& fit_right, const Vector& xi);

/// Full trajectory of S_n(t) and T_n(t) over the trimmed grid. One xi draw
/// per scan, shared across all t. T_n(t) = sqrt(t(n-t)/n)/(sigma_eps*sigma_xi)
/// * S_n(t); when sigma_xi == 0 the 1/sigma_xi factor is dropped (the
/// localization statistic, where scale does not affect the argmax).
ScanResult scan(const Dataset& data, const ScanConfig& config);

/// Argmax of the non-randomized trajectory (sigma_xi treated as 0);
/// smallest t on ties. Does not test: callers gate on scan rejection.
int localize(const Dataset& data, const ScanConfig& config);

std::string scan_result_to_json(const ScanResult& result, const ScanConfig& config);
void write_scan_csv(const ScanResult& result, std::ostream& out);

}  // namespace qfcusum
