// Python bindings for the main operations: datasets, interval Lasso, the
// QF-CUSUM scan, calibration, data generation, and the experiment harness.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qfcusum/calibration.hpp"
#include "qfcusum/data.hpp"
#include "qfcusum/datagen.hpp"
#include "qfcusum/diagnostics.hpp"
#include "qfcusum/harness.hpp"
#include "qfcusum/lasso.hpp"
#include "qfcusum/scan.hpp"

namespace py = pybind11;
using namespace qfcusum;

PYBIND11_MODULE(_qfcusum, m) {
    m.doc() = "QF-CUSUM change-point testing for high-dimensional linear models";

    py::register_exception<ParseError>(m, "ParseError");

    py::class_<Interval>(m, "Interval")
        .def(py::init<int, int>(), py::arg("lo"), py::arg("hi"))
        .def_readwrite("lo", &Interval::lo)
        .def_readwrite("hi", &Interval::hi)
        .def("size", &Interval::size)
        .def("__repr__", [](const Interval& i) {
            return "Interval(" + std::to_string(i.lo) + ", " + std::to_string(i.hi) + "]";
        });

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<Vector, Matrix>(), py::arg("y"), py::arg("x"))
        .def_property_readonly("y", &Dataset::y)
        .def_property_readonly("x", &Dataset::x)
        .def_property_readonly("n", &Dataset::n)
        .def_property_readonly("p", &Dataset::p);

    m.def("load_csv", &load_csv, py::arg("path"), py::arg("has_header") = false);
    m.def("save_csv", &save_csv, py::arg("data"), py::arg("path"), py::arg("header") = "");

    py::class_<CovarianceEstimate>(m, "CovarianceEstimate")
        .def_readonly("sigma_hat", &CovarianceEstimate::sigma_hat)
        .def_readonly("interval", &CovarianceEstimate::interval);
    m.def("sample_covariance", &sample_covariance, py::arg("data"), py::arg("interval"));

    py::class_<LassoConfig>(m, "LassoConfig")
        .def(py::init<>())
        .def_readwrite("lambda_", &LassoConfig::lambda)
        .def_readwrite("tol", &LassoConfig::tol)
        .def_readwrite("max_iter", &LassoConfig::max_iter)
        .def_readwrite("warm_start", &LassoConfig::warm_start);

    py::class_<IntervalLassoFit>(m, "IntervalLassoFit")
        .def_readonly("beta_hat", &IntervalLassoFit::beta_hat)
        .def_readonly("interval", &IntervalLassoFit::interval)
        .def_readonly("lambda_", &IntervalLassoFit::lambda)
        .def_readonly("iterations", &IntervalLassoFit::iterations)
        .def_readonly("converged", &IntervalLassoFit::converged)
        .def_readonly("objective", &IntervalLassoFit::objective);

    m.def("soft_threshold", &soft_threshold, py::arg("z"), py::arg("gamma"));
    m.def("fit_interval_lasso", &fit_interval_lasso, py::arg("data"), py::arg("interval"),
          py::arg("config") = LassoConfig{});
    m.def("lambda_max", &lambda_max, py::arg("data"), py::arg("interval"));
    m.def("lambda_path", &lambda_path, py::arg("data"), py::arg("interval"),
          py::arg("n_lambda"));

    py::class_<CrossValidationResult>(m, "CrossValidationResult")
        .def_readonly("lambda_star", &CrossValidationResult::lambda_star)
        .def_readonly("lambda_1se", &CrossValidationResult::lambda_1se)
        .def_readonly("cv_curve", &CrossValidationResult::cv_curve)
        .def_readonly("cv_se", &CrossValidationResult::cv_se);
    m.def("cross_validate_lambda", &cross_validate_lambda, py::arg("data"),
          py::arg("interval"), py::arg("folds"), py::arg("n_lambda"), py::arg("seed"),
          py::arg("blocked_folds") = false, py::arg("fit_tol") = 1e-5,
          py::arg("fit_max_iter") = 1000);

    py::class_<ScanConfig>(m, "ScanConfig")
        .def(py::init<>())
        .def_readwrite("zeta", &ScanConfig::zeta)
        .def_readwrite("stride", &ScanConfig::stride)
        .def_readwrite("sigma_eps", &ScanConfig::sigma_eps)
        .def_readwrite("sigma_xi", &ScanConfig::sigma_xi)
        .def_readwrite("xi_seed", &ScanConfig::xi_seed)
        .def_readwrite("lambda_", &ScanConfig::lambda)
        .def_readwrite("tol", &ScanConfig::tol)
        .def_readwrite("max_iter", &ScanConfig::max_iter)
        .def_readwrite("warm_start", &ScanConfig::warm_start);

    py::class_<ScanResult>(m, "ScanResult")
        .def_readonly("grid", &ScanResult::grid)
        .def_readonly("s_n", &ScanResult::s_n)
        .def_readonly("t_n", &ScanResult::t_n)
        .def_readonly("max_stat", &ScanResult::max_stat)
        .def_readonly("argmax_t", &ScanResult::argmax_t)
        .def_readonly("xi", &ScanResult::xi);

    m.def("bias_corrected_qf", &bias_corrected_qf, py::arg("data"), py::arg("t"),
          py::arg("fit_left"), py::arg("fit_right"));
    m.def("goodness_of_fit", &goodness_of_fit, py::arg("data"), py::arg("t"),
          py::arg("fit_left"), py::arg("fit_right"));
    m.def("randomized_statistic", &randomized_statistic, py::arg("data"), py::arg("t"),
          py::arg("fit_left"), py::arg("fit_right"), py::arg("xi"));
    m.def("scan", &scan, py::arg("data"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("localize", &localize, py::arg("data"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("scan_result_to_json", &scan_result_to_json, py::arg("result"), py::arg("config"));

    py::class_<CriticalValueTable>(m, "CriticalValueTable")
        .def_readonly("zeta", &CriticalValueTable::zeta)
        .def_readonly("grid_points", &CriticalValueTable::grid_points)
        .def_readonly("reps", &CriticalValueTable::reps)
        .def_readonly("seed", &CriticalValueTable::seed)
        .def_readonly("quantiles", &CriticalValueTable::quantiles)
        .def_readonly("digest", &CriticalValueTable::digest)
        .def_readonly("sup_draws", &CriticalValueTable::sup_draws)
        .def("quantile", &CriticalValueTable::quantile, py::arg("alpha"));
    m.def("simulate_critical_values", &simulate_critical_values, py::arg("zeta"),
          py::arg("alphas"), py::arg("grid_points") = 2000, py::arg("reps") = 100000,
          py::arg("seed") = 0, py::arg("threads") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("save_table", &save_table, py::arg("table"), py::arg("path"));
    m.def("load_table", &load_table, py::arg("path"));

    py::class_<NuisanceEstimates>(m, "NuisanceEstimates")
        .def(py::init<>())
        .def_readwrite("lambda_", &NuisanceEstimates::lambda)
        .def_readwrite("s_hat", &NuisanceEstimates::s_hat)
        .def_readwrite("sigma_eps_hat", &NuisanceEstimates::sigma_eps_hat)
        .def_readwrite("sigma_xi", &NuisanceEstimates::sigma_xi)
        .def_readwrite("zeta", &NuisanceEstimates::zeta);
    m.def("estimate_nuisance", &estimate_nuisance, py::arg("data"), py::arg("zeta") = 0.15,
          py::arg("folds") = 10, py::arg("seed") = 0, py::arg("blocked_folds") = false,
          py::call_guard<py::gil_scoped_release>());

    py::class_<TestOutcome>(m, "TestOutcome")
        .def_readonly("max_stat", &TestOutcome::max_stat)
        .def_readonly("critical_value", &TestOutcome::critical_value)
        .def_readonly("alpha", &TestOutcome::alpha)
        .def_readonly("reject", &TestOutcome::reject)
        .def_readonly("p_value", &TestOutcome::p_value)
        .def_readonly("argmax_t", &TestOutcome::argmax_t)
        .def_readonly("nuisance", &TestOutcome::nuisance);
    m.def("run_test", &run_test, py::arg("data"), py::arg("zeta"), py::arg("alpha"),
          py::arg("table"), py::arg("seed"),
          py::arg("overrides") = std::optional<NuisanceEstimates>{},
          py::call_guard<py::gil_scoped_release>());
    m.def("test_outcome_to_json", &test_outcome_to_json, py::arg("outcome"), py::arg("seed"));

    py::enum_<SigmaKind>(m, "SigmaKind")
        .value("Toeplitz", SigmaKind::Toeplitz)
        .value("CompoundSymmetric", SigmaKind::CompoundSymmetric)
        .value("Identity", SigmaKind::Identity);
    py::enum_<Dependence>(m, "Dependence")
        .value("Independent", Dependence::Independent)
        .value("AR", Dependence::AR)
        .value("MA", Dependence::MA);

    py::class_<ChangePattern>(m, "ChangePattern")
        .def(py::init<>())
        .def_static("none", &ChangePattern::none)
        .def_static("single_at", &ChangePattern::single_at, py::arg("frac"), py::arg("kappa"))
        .def_static("epidemic_thirds", &ChangePattern::epidemic_thirds, py::arg("kappa"))
        .def_readwrite("frac", &ChangePattern::frac)
        .def_readwrite("kappa", &ChangePattern::kappa);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("n", &ScenarioSpec::n)
        .def_readwrite("p", &ScenarioSpec::p)
        .def_readwrite("s", &ScenarioSpec::s)
        .def_readwrite("sigma_kind", &ScenarioSpec::sigma_kind)
        .def_readwrite("dependence", &ScenarioSpec::dependence)
        .def_readwrite("change_pattern", &ScenarioSpec::change_pattern)
        .def_readwrite("sigma_eps", &ScenarioSpec::sigma_eps)
        .def_readwrite("seed", &ScenarioSpec::seed)
        .def("id", &ScenarioSpec::id);

    py::class_<CoefficientPath>(m, "CoefficientPath")
        .def_readonly("segments", &CoefficientPath::segments)
        .def_readonly("changepoints", &CoefficientPath::changepoints)
        .def("at", &CoefficientPath::at, py::arg("i"))
        .def("average", &CoefficientPath::average, py::arg("interval"));

    py::class_<GeneratedSample>(m, "GeneratedSample")
        .def_readonly("data", &GeneratedSample::data)
        .def_readonly("truth", &GeneratedSample::truth)
        .def_property_readonly("true_changepoints", &GeneratedSample::true_changepoints);

    m.def("build_sigma", &build_sigma, py::arg("kind"), py::arg("p"));
    m.def("build_beta", &build_beta, py::arg("s"), py::arg("p"), py::arg("sigma"));
    m.def("generate", &generate, py::arg("spec"));
    m.def("scenario_from_json_text", &scenario_from_json_text, py::arg("text"));
    m.def("scenario_to_json_text", &scenario_to_json_text, py::arg("spec"));

    py::class_<AlternativeDiagnostics>(m, "AlternativeDiagnostics")
        .def_readonly("mu_t", &AlternativeDiagnostics::mu_t)
        .def_readonly("sigma2_t", &AlternativeDiagnostics::sigma2_t)
        .def_readonly("psi_l", &AlternativeDiagnostics::psi_l)
        .def_readonly("psi_r", &AlternativeDiagnostics::psi_r);
    m.def("alternative_diagnostics", &alternative_diagnostics, py::arg("scenario"),
          py::arg("t"), py::arg("sigma_xi"));

    py::enum_<ExperimentMode>(m, "ExperimentMode")
        .value("Size", ExperimentMode::Size)
        .value("Power", ExperimentMode::Power)
        .value("Localize", ExperimentMode::Localize);

    py::class_<ExperimentPlan>(m, "ExperimentPlan")
        .def(py::init<>())
        .def_readwrite("scenarios", &ExperimentPlan::scenarios)
        .def_readwrite("reps", &ExperimentPlan::reps)
        .def_readwrite("alpha", &ExperimentPlan::alpha)
        .def_readwrite("zeta", &ExperimentPlan::zeta)
        .def_readwrite("master_seed", &ExperimentPlan::master_seed)
        .def_readwrite("mode", &ExperimentPlan::mode)
        .def_readwrite("stride", &ExperimentPlan::stride);

    py::class_<ScenarioResult>(m, "ScenarioResult")
        .def_readonly("scenario_id", &ScenarioResult::scenario_id)
        .def_readonly("scenario", &ScenarioResult::scenario)
        .def_readonly("reps_completed", &ScenarioResult::reps_completed)
        .def_readonly("failures", &ScenarioResult::failures)
        .def_readonly("rejection_rate", &ScenarioResult::rejection_rate)
        .def_readonly("mc_standard_error", &ScenarioResult::mc_standard_error)
        .def_readonly("mean_runtime_s", &ScenarioResult::mean_runtime_s)
        .def_readonly("max_stats", &ScenarioResult::max_stats)
        .def_readonly("eta_fracs", &ScenarioResult::eta_fracs);

    py::class_<ExperimentReport>(m, "ExperimentReport")
        .def_readonly("plan", &ExperimentReport::plan)
        .def_readonly("rows", &ExperimentReport::rows)
        .def_readonly("table_digest", &ExperimentReport::table_digest)
        .def_readonly("wall_time_s", &ExperimentReport::wall_time_s);

    m.def("run_experiment", &run_experiment, py::arg("plan"), py::arg("table"),
          py::arg("threads") = 0, py::arg("echo_progress") = false,
          py::call_guard<py::gil_scoped_release>());
    m.def("write_report_csv", &write_report_csv, py::arg("report"), py::arg("path"));
    m.def("write_report_json", &write_report_json, py::arg("report"), py::arg("path"));
    m.def("load_plan", &load_plan, py::arg("path"));
    m.def("plan_from_json_text", &plan_from_json_text, py::arg("text"));
    m.def("plan_to_json_text", &plan_to_json_text, py::arg("plan"));
}
