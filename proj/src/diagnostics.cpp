#include "qfcusum/diagnostics.hpp"

#include <stdexcept>

namespace qfcusum {

AlternativeDiagnostics alternative_diagnostics(const ScenarioSpec& scenario, int t,
                                               double sigma_xi) {
    if (scenario.dependence != Dependence::Independent)
        throw std::invalid_argument(
            "alternative diagnostics have a closed form only for independent Gaussian "
            "covariates");
    if (sigma_xi < 0.0) throw std::invalid_argument("sigma_xi must be nonnegative");
    if (t <= 0 || t >= scenario.n) throw std::invalid_argument("t must lie in (0, n)");

    const CoefficientPath path = coefficient_path(scenario);
    const Matrix sigma = build_sigma(scenario.sigma_kind, scenario.p);
    const Vector beta_left = path.average(Interval{0, t});
    const Vector beta_right = path.average(Interval{t, scenario.n});
    const Vector delta = beta_left - beta_right;

    const double mu = delta.dot(sigma * delta);
    const double se2 = scenario.sigma_eps * scenario.sigma_eps;
    const double sx2 = sigma_xi * sigma_xi;
    // Fourth-moment term for Gaussian x: E[D^T (xx^T - Sigma) D]^2 = 2 mu^2.
    const double sigma2 = se2 * sx2 + 4.0 * se2 * mu + 0.25 * 2.0 * mu * mu;

    auto dispersion = [&](const Interval& interval, const Vector& center) {
        double acc = 0.0;
        for (int i = interval.lo + 1; i <= interval.hi; ++i) {
            const Vector dev = path.at(i) - center;
            acc += dev.dot(sigma * dev);
        }
        return sx2 * acc / interval.size();
    };

    AlternativeDiagnostics diag;
    diag.mu_t = mu;
    diag.sigma2_t = sigma2;
    diag.psi_l = sigma2 + dispersion(Interval{0, t}, beta_left);
    diag.psi_r = sigma2 + dispersion(Interval{t, scenario.n}, beta_right);
    return diag;
}

}  // namespace qfcusum
