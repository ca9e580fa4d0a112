#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfcusum/data.hpp"

namespace qfcusum {

enum class SigmaKind { Toeplitz, CompoundSymmetric, Identity };
enum class Dependence { Independent, AR, MA };

struct ChangePattern {
    enum class Kind { None, SingleAt, EpidemicThirds };
    Kind kind = Kind::None;
    double frac = 0.5;   // change location as a fraction of n (SingleAt)
    double kappa = 0.0;  // jump factor: post-change coefficient is beta*(1+kappa)

    static ChangePattern none() { return {}; }
    static ChangePattern single_at(double frac, double kappa) {
        return {Kind::SingleAt, frac, kappa};
    }
    static ChangePattern epidemic_thirds(double kappa) {
        return {Kind::EpidemicThirds, 0.5, kappa};
    }
};

/// One synthetic data-generating process: covariance structure, sparse
/// coefficient construction, change pattern, and temporal dependence of
/// covariates and noise. Toeplitz uses rho=0.6, compound symmetric rho=0.3,
/// AR coefficient 0.3, MA coefficient 0.4 (fixed by construction).
struct ScenarioSpec {
    int n = 0;
    int p = 0;
    int s = 0;
    SigmaKind sigma_kind = SigmaKind::Toeplitz;
    Dependence dependence = Dependence::Independent;
    ChangePattern change_pattern;
    double sigma_eps = 1.0;
    std::uint64_t seed = 0;

    std::string id() const;
    void validate() const;
};

/// Piecewise-constant true coefficient sequence beta*_1..beta*_n.
/// Changepoints eta are the last index of each segment (beta jumps between
/// eta and eta+1); observation labels are 1-based.
struct CoefficientPath {
    int n = 0;
    std::vector<Vector> segments;
    std::vector<int> changepoints;  // ascending

    const Vector& at(int i) const;
    /// (1/|I|) sum_{i in I} beta*_i, the population target of the interval Lasso.
    Vector average(const Interval& interval) const;
};

CoefficientPath coefficient_path(const ScenarioSpec& spec);

/// Generated dataset plus the ground truth behind it.
struct GeneratedSample {
    Dataset data;
    CoefficientPath truth;

    const std::vector<int>& true_changepoints() const { return truth.changepoints; }
    const Vector& beta_at(int i) const { return truth.at(i); }
    Vector beta_average(const Interval& interval) const { return truth.average(interval); }
};

Matrix build_sigma(SigmaKind kind, int p);

/// beta^o has entries i/s on the first s coordinates, zero after, rescaled
/// so that beta^T Sigma beta = 9.
Vector build_beta(int s, int p, const Matrix& sigma);

GeneratedSample generate(const ScenarioSpec& spec);

std::string sigma_kind_name(SigmaKind kind);
std::string dependence_name(Dependence dep);
SigmaKind sigma_kind_from_name(const std::string& name);
Dependence dependence_from_name(const std::string& name);

ScenarioSpec scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioSpec& spec);

}  // namespace qfcusum
