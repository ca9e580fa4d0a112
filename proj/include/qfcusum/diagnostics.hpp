#pragma once

#include "qfcusum/datagen.hpp"

namespace qfcusum {

/// Population mean and variance components of the randomized statistic
/// S_n(t) under the alternative: S_n(t) is asymptotically
/// N(mu_t, psi_l/t + psi_r/(n-t)). Under a no-change configuration mu_t = 0
/// and sigma2_t = psi_l = psi_r = sigma_eps^2 * sigma_xi^2.
struct AlternativeDiagnostics {
    double mu_t = 0.0;
    double sigma2_t = 0.0;
    double psi_l = 0.0;
    double psi_r = 0.0;
};

/// Closed form for independent Gaussian covariates only (the fourth-moment
/// term E[Delta^T (xx^T - Sigma) Delta]^2 equals 2 (Delta^T Sigma Delta)^2
/// for x ~ N(0, Sigma)); other designs raise an error.
AlternativeDiagnostics alternative_diagnostics(const ScenarioSpec& scenario, int t,
                                               double sigma_xi);

}  // namespace qfcusum
