#include "qfcusum/datagen.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "qfcusum/random.hpp"

namespace qfcusum {

namespace {
constexpr double kToeplitzRho = 0.6;
constexpr double kCompoundRho = 0.3;
constexpr double kArCoef = 0.3;
constexpr double kMaCoef = 0.4;
}  // namespace

std::string sigma_kind_name(SigmaKind kind) {
    switch (kind) {
        case SigmaKind::Toeplitz: return "Toeplitz";
        case SigmaKind::CompoundSymmetric: return "CompoundSymmetric";
        case SigmaKind::Identity: return "Identity";
    }
    throw std::logic_error("unknown SigmaKind");
}

std::string dependence_name(Dependence dep) {
    switch (dep) {
        case Dependence::Independent: return "Independent";
        case Dependence::AR: return "AR";
        case Dependence::MA: return "MA";
    }
    throw std::logic_error("unknown Dependence");
}

SigmaKind sigma_kind_from_name(const std::string& name) {
    if (name == "Toeplitz") return SigmaKind::Toeplitz;
    if (name == "CompoundSymmetric") return SigmaKind::CompoundSymmetric;
    if (name == "Identity") return SigmaKind::Identity;
    throw std::invalid_argument("unknown sigma_kind: " + name);
}

Dependence dependence_from_name(const std::string& name) {
    if (name == "Independent") return Dependence::Independent;
    if (name == "AR") return Dependence::AR;
    if (name == "MA") return Dependence::MA;
    throw std::invalid_argument("unknown dependence: " + name);
}

void ScenarioSpec::validate() const {
    if (n < 2) throw std::invalid_argument("scenario: n must be >= 2");
    if (p < 1) throw std::invalid_argument("scenario: p must be >= 1");
    if (s < 1 || s > p) throw std::invalid_argument("scenario: need 1 <= s <= p");
    if (sigma_eps <= 0.0) throw std::invalid_argument("scenario: sigma_eps must be positive");
    if (change_pattern.kappa < 0.0)
        throw std::invalid_argument("scenario: kappa must be nonnegative");
    if (change_pattern.kind == ChangePattern::Kind::SingleAt &&
        !(change_pattern.frac > 0.0 && change_pattern.frac < 1.0))
        throw std::invalid_argument("scenario: change fraction must lie in (0, 1)");
}

std::string ScenarioSpec::id() const {
    std::ostringstream out;
    out << "n" << n << "_p" << p << "_s" << s << "_" << sigma_kind_name(sigma_kind) << "_"
        << dependence_name(dependence);
    switch (change_pattern.kind) {
        case ChangePattern::Kind::None: out << "_nochange"; break;
        case ChangePattern::Kind::SingleAt:
            out << "_single" << change_pattern.frac << "_k" << change_pattern.kappa;
            break;
        case ChangePattern::Kind::EpidemicThirds:
            out << "_epidemic_k" << change_pattern.kappa;
            break;
    }
    return out.str();
}

Matrix build_sigma(SigmaKind kind, int p) {
    if (p < 1) throw std::invalid_argument("build_sigma: p must be >= 1");
    Matrix sigma(p, p);
    switch (kind) {
        case SigmaKind::Toeplitz:
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j)
                    sigma(i, j) = std::pow(kToeplitzRho, std::abs(i - j));
            break;
        case SigmaKind::CompoundSymmetric:
            sigma.setConstant(kCompoundRho);
            sigma.diagonal().setOnes();
            break;
        case SigmaKind::Identity:
            sigma.setIdentity();
            break;
    }
    return sigma;
}

Vector build_beta(int s, int p, const Matrix& sigma) {
    if (s < 1 || s > p) throw std::invalid_argument("build_beta: need 1 <= s <= p");
    Vector beta0 = Vector::Zero(p);
    for (int i = 0; i < s; ++i) beta0[i] = static_cast<double>(i + 1) / s;
    const double quad = beta0.dot(sigma * beta0);
    if (quad <= 0.0) throw std::runtime_error("build_beta: beta^T Sigma beta <= 0");
    return 3.0 / std::sqrt(quad) * beta0;
}

const Vector& CoefficientPath::at(int i) const {
    for (std::size_t k = 0; k < changepoints.size(); ++k)
        if (i <= changepoints[k]) return segments[k];
    return segments.back();
}

Vector CoefficientPath::average(const Interval& interval) const {
    check_interval(interval, n);
    Vector sum = Vector::Zero(segments.front().size());
    int seg = 0;
    int start = interval.lo + 1;  // 1-based labels
    while (start <= interval.hi) {
        while (seg < static_cast<int>(changepoints.size()) && start > changepoints[seg]) ++seg;
        const int seg_end =
            seg < static_cast<int>(changepoints.size()) ? changepoints[seg] : n;
        const int stop = std::min(seg_end, interval.hi);
        sum += (stop - start + 1) * segments[seg];
        start = stop + 1;
    }
    return sum / interval.size();
}

CoefficientPath coefficient_path(const ScenarioSpec& spec) {
    spec.validate();
    const Matrix sigma = build_sigma(spec.sigma_kind, spec.p);
    const Vector beta = build_beta(spec.s, spec.p, sigma);

    CoefficientPath path;
    path.n = spec.n;
    switch (spec.change_pattern.kind) {
        case ChangePattern::Kind::None:
            path.segments = {beta};
            break;
        case ChangePattern::Kind::SingleAt: {
            const int eta = static_cast<int>(std::floor(spec.n * spec.change_pattern.frac));
            if (eta < 1 || eta >= spec.n)
                throw std::invalid_argument("change location outside (0, n)");
            path.segments = {beta, (1.0 + spec.change_pattern.kappa) * beta};
            path.changepoints = {eta};
            break;
        }
        case ChangePattern::Kind::EpidemicThirds: {
            const int eta1 = spec.n / 3, eta2 = 2 * spec.n / 3;
            if (eta1 < 1 || eta2 <= eta1 || eta2 >= spec.n)
                throw std::invalid_argument("n too small for epidemic thirds");
            path.segments = {beta, (1.0 + spec.change_pattern.kappa) * beta, beta};
            path.changepoints = {eta1, eta2};
            break;
        }
    }
    return path;
}

namespace {

// Gaussian innovations with marginal covariance Sigma under all dependence
// modes; AR starts from the stationary law, MA uses a lag-0 warmup draw.
Matrix draw_covariates(std::mt19937_64& rng, int n, const Matrix& chol_l, Dependence dep) {
    const int p = static_cast<int>(chol_l.rows());
    Matrix x(n, p);
    switch (dep) {
        case Dependence::Independent: {
            for (int i = 0; i < n; ++i)
                x.row(i) = (chol_l * normal_vector(rng, p)).transpose();
            break;
        }
        case Dependence::AR: {
            const double scale = std::sqrt(1.0 - kArCoef * kArCoef);
            x.row(0) = (chol_l * normal_vector(rng, p)).transpose();
            for (int i = 1; i < n; ++i)
                x.row(i) =
                    kArCoef * x.row(i - 1) + scale * (chol_l * normal_vector(rng, p)).transpose();
            break;
        }
        case Dependence::MA: {
            const double scale = 1.0 / std::sqrt(1.0 + kMaCoef * kMaCoef);
            Vector prev = chol_l * normal_vector(rng, p);
            for (int i = 0; i < n; ++i) {
                Vector innov = chol_l * normal_vector(rng, p);
                x.row(i) = (scale * (innov + kMaCoef * prev)).transpose();
                prev = std::move(innov);
            }
            break;
        }
    }
    return x;
}

Vector draw_noise(std::mt19937_64& rng, int n, double sigma_eps, Dependence dep) {
    Vector eps(n);
    switch (dep) {
        case Dependence::Independent:
            eps = normal_vector(rng, n, sigma_eps);
            break;
        case Dependence::AR: {
            const double scale = std::sqrt(1.0 - kArCoef * kArCoef);
            std::normal_distribution<double> gauss(0.0, sigma_eps);
            eps[0] = gauss(rng);
            for (int i = 1; i < n; ++i) eps[i] = kArCoef * eps[i - 1] + scale * gauss(rng);
            break;
        }
        case Dependence::MA: {
            const double scale = 1.0 / std::sqrt(1.0 + kMaCoef * kMaCoef);
            std::normal_distribution<double> gauss(0.0, sigma_eps);
            double prev = gauss(rng);
            for (int i = 0; i < n; ++i) {
                const double innov = gauss(rng);
                eps[i] = scale * (innov + kMaCoef * prev);
                prev = innov;
            }
            break;
        }
    }
    return eps;
}

}  // namespace

GeneratedSample generate(const ScenarioSpec& spec) {
    CoefficientPath truth = coefficient_path(spec);
    const Matrix sigma = build_sigma(spec.sigma_kind, spec.p);

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("generate: covariance Cholesky failed");
    const Matrix chol_l = llt.matrixL();

    auto rng = make_rng(spec.seed);
    Matrix x = draw_covariates(rng, spec.n, chol_l, spec.dependence);
    const Vector eps = draw_noise(rng, spec.n, spec.sigma_eps, spec.dependence);

    Vector y(spec.n);
    for (int i = 1; i <= spec.n; ++i) y[i - 1] = x.row(i - 1).dot(truth.at(i)) + eps[i - 1];

    return GeneratedSample{Dataset(std::move(y), std::move(x)), std::move(truth)};
}

namespace {

nlohmann::json change_pattern_json(const ChangePattern& cp) {
    switch (cp.kind) {
        case ChangePattern::Kind::None: return {{"kind", "None"}};
        case ChangePattern::Kind::SingleAt:
            return {{"kind", "SingleAt"}, {"frac", cp.frac}, {"kappa", cp.kappa}};
        case ChangePattern::Kind::EpidemicThirds:
            return {{"kind", "EpidemicThirds"}, {"kappa", cp.kappa}};
    }
    throw std::logic_error("unknown ChangePattern kind");
}

ChangePattern change_pattern_from_json(const nlohmann::json& j) {
    if (j.is_string() && j.get<std::string>() == "None") return ChangePattern::none();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "None") return ChangePattern::none();
    if (kind == "SingleAt")
        return ChangePattern::single_at(j.value("frac", 0.5), j.at("kappa").get<double>());
    if (kind == "EpidemicThirds")
        return ChangePattern::epidemic_thirds(j.at("kappa").get<double>());
    throw std::invalid_argument("unknown change_pattern kind: " + kind);
}

}  // namespace

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
    return {{"n", spec.n},
            {"p", spec.p},
            {"s", spec.s},
            {"sigma_kind", sigma_kind_name(spec.sigma_kind)},
            {"dependence", dependence_name(spec.dependence)},
            {"change_pattern", change_pattern_json(spec.change_pattern)},
            {"sigma_eps", spec.sigma_eps},
            {"seed", spec.seed}};
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
    ScenarioSpec spec;
    spec.n = j.at("n").get<int>();
    spec.p = j.at("p").get<int>();
    spec.s = j.at("s").get<int>();
    spec.sigma_kind = sigma_kind_from_name(j.at("sigma_kind").get<std::string>());
    spec.dependence = dependence_from_name(j.at("dependence").get<std::string>());
    if (j.contains("change_pattern"))
        spec.change_pattern = change_pattern_from_json(j.at("change_pattern"));
    spec.sigma_eps = j.value("sigma_eps", 1.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.validate();
    return spec;
}

ScenarioSpec scenario_from_json_text(const std::string& text) {
    return scenario_from_json(nlohmann::json::parse(text));
}

std::string scenario_to_json_text(const ScenarioSpec& spec) {
    return scenario_to_json(spec).dump(2);
}

}  // namespace qfcusum
