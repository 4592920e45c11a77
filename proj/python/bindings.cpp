#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sparsets/dantzig.hpp"
#include "sparsets/diagnostics.hpp"
#include "sparsets/errors.hpp"
#include "sparsets/harness.hpp"
#include "sparsets/json_io.hpp"
#include "sparsets/procsim.hpp"
#include "sparsets/scorelab.hpp"
#include "sparsets/simplex.hpp"
#include "sparsets/twostep.hpp"

namespace py = pybind11;
using namespace sparsets;

namespace {

py::dict series_dict(const procsim::SeriesSample& s) {
  py::dict d;
  d["values"] = s.values;
  d["lag_buffer"] = s.lag_buffer;
  d["delta"] = s.delta ? py::cast(*s.delta) : py::none();
  d["kind"] = s.kind == procsim::SeriesKind::counts ? "counts" : "reals";
  return d;
}

scorelab::ModelTag parse_tag(const std::string& name) {
  if (name == "regression") return scorelab::ModelTag::regression;
  if (name == "inar") return scorelab::ModelTag::inar;
  if (name == "diffusion") return scorelab::ModelTag::diffusion;
  throw ConfigError("model must be regression, inar or diffusion");
}

scorelab::DesignData make_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                 bool has_intercept, const std::string& model, double delta) {
  if (design.rows() != response.size()) throw DimensionError("design and response rows differ");
  scorelab::DesignData d;
  d.design = design;
  d.response = response;
  d.has_intercept = has_intercept;
  d.tag = parse_tag(model);
  d.delta = delta;
  return d;
}

py::dict fit_dict(const dantzig::DantzigFit& fit) {
  py::dict d;
  d["theta_hat"] = fit.theta_hat;
  d["lambda"] = fit.lambda;
  d["objective"] = fit.l1_objective;
  d["slack"] = fit.feasibility_slack;
  d["iterations"] = fit.iterations;
  d["status"] = dantzig::to_string(fit.status);
  return d;
}

py::dict normality_dict(const diagnostics::NormalityReport& r) {
  py::dict d;
  d["statistic"] = r.statistic;
  d["p_value"] = r.p_value;
  d["test"] = diagnostics::to_string(r.test);
  d["dimension"] = r.dimension;
  d["n"] = r.n;
  d["degrees_of_freedom"] = r.degrees_of_freedom;
  return d;
}

py::dict finfty_dict(const diagnostics::FInftyEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["method"] = diagnostics::to_string(e.method);
  d["samples"] = e.samples;
  d["support"] = e.support;
  return d;
}

io::Json parse_config(const std::string& text) {
  try {
    return io::Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-step Dantzig selector estimation for sparse time-series models";

  static py::exception<Error> base_error(m, "SparsetsError");
  static py::exception<ConfigError> config_error(m, "ConfigError", base_error.ptr());
  static py::exception<NumericError> numeric_error(m, "NumericError", base_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    } catch (const NumericError& e) {
      PyErr_SetString(numeric_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(base_error.ptr(), e.what());
    }
  });

  m.def(
      "simulate_inar",
      [](double mu_eps, const Eigen::VectorXd& alpha, int n, std::uint64_t seed, int burn_in) {
        procsim::InarSpec spec;
        spec.mu_eps = mu_eps;
        spec.alpha = alpha;
        spec.burn_in = burn_in;
        return series_dict(procsim::simulate_inar(spec, n, seed));
      },
      py::arg("mu_eps"), py::arg("alpha"), py::arg("n"), py::arg("seed"), py::arg("burn_in") = 1000);

  m.def(
      "simulate_minar1",
      [](const Eigen::VectorXd& eta, const Eigen::MatrixXd& a, int n, std::uint64_t seed, int burn_in) {
        procsim::Minar1Spec spec;
        spec.eta = eta;
        spec.a_matrix = a;
        spec.burn_in = burn_in;
        return series_dict(procsim::simulate_minar1(spec, n, seed));
      },
      py::arg("eta"), py::arg("a_matrix"), py::arg("n"), py::arg("seed"), py::arg("burn_in") = 1000);

  m.def(
      "simulate_ou",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& sigma, double delta, int n_steps,
         std::uint64_t seed, int substeps, std::optional<Eigen::VectorXd> initial_state) {
        procsim::OuSpec spec;
        spec.a_matrix = a;
        spec.sigma_diag = sigma;
        spec.delta = delta;
        spec.n_steps = n_steps;
        spec.substeps = substeps;
        spec.initial_state = std::move(initial_state);
        return series_dict(procsim::simulate_ou(spec, seed));
      },
      py::arg("a_matrix"), py::arg("sigma_diag"), py::arg("delta"), py::arg("n_steps"), py::arg("seed"),
      py::arg("substeps") = 10, py::arg("initial_state") = py::none());

  m.def(
      "simulate_hawkes",
      [](double eta, std::vector<double> breakpoints, std::vector<double> values, double horizon,
         std::uint64_t seed) {
        procsim::HawkesSpec spec;
        spec.eta = eta;
        spec.breakpoints = std::move(breakpoints);
        spec.values = std::move(values);
        spec.horizon = horizon;
        return procsim::simulate_hawkes(spec, seed);
      },
      py::arg("eta"), py::arg("breakpoints"), py::arg("values"), py::arg("horizon"), py::arg("seed"));

  m.def(
      "bin_counts",
      [](const std::vector<double>& events, double delta, double horizon) {
        return Eigen::VectorXd(procsim::bin_counts(events, delta, horizon).values.col(0));
      },
      py::arg("events"), py::arg("delta"), py::arg("horizon"));

  m.def("solve_lyapunov", &procsim::solve_lyapunov, py::arg("a"), py::arg("q"),
        py::arg("max_block") = 8);

  m.def(
      "inar_design",
      [](const Eigen::VectorXd& values, const Eigen::VectorXd& lag_buffer, int order) {
        procsim::SeriesSample s;
        s.kind = procsim::SeriesKind::counts;
        s.values = values;
        s.lag_buffer = lag_buffer;
        const auto d = scorelab::inar_design(s, order);
        return py::make_tuple(d.design, d.response);
      },
      py::arg("values"), py::arg("lag_buffer"), py::arg("order"));

  m.def(
      "solve_lp",
      [](const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
        const auto r = lp::solve_lp(c, a, b);
        py::dict d;
        d["status"] = lp::to_string(r.status);
        d["x"] = r.x;
        d["objective"] = r.objective;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("c"), py::arg("a"), py::arg("b"), "min c^T x s.t. A x <= b, x >= 0");

  m.def(
      "solve_dantzig",
      [](const Eigen::MatrixXd& gram, const Eigen::VectorXd& moment, double lambda) {
        scorelab::LinearScoreSystem sys;
        sys.gram = gram;
        sys.moment = moment;
        return fit_dict(dantzig::solve_dantzig(sys, lambda));
      },
      py::arg("gram"), py::arg("moment"), py::arg("lam"),
      "argmin ||theta||_1 s.t. ||moment - gram theta||_inf <= lam");

  m.def(
      "fit_first_step",
      [](const Eigen::MatrixXd& design, const Eigen::VectorXd& response, double lambda,
         bool has_intercept, bool centered, const std::string& model, double delta) {
        return fit_dict(dantzig::fit_first_step(
            make_design(design, response, has_intercept, model, delta), lambda, centered));
      },
      py::arg("design"), py::arg("response"), py::arg("lam"), py::arg("has_intercept") = false,
      py::arg("centered") = true, py::arg("model") = "regression", py::arg("delta") = 1.0);

  m.def(
      "cross_validate_lambda",
      [](const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
         std::optional<std::vector<double>> grid, int folds, bool has_intercept, bool centered,
         const std::string& model, double delta) {
        const auto data = make_design(design, response, has_intercept, model, delta);
        const auto g = grid ? *grid : dantzig::default_lambda_grid(data, centered);
        const auto r = dantzig::cross_validate_lambda(data, g, folds, centered);
        py::dict d;
        d["grid"] = r.grid;
        d["cv_loss"] = r.cv_loss;
        d["chosen_lambda"] = r.chosen_lambda;
        d["folds"] = r.folds;
        return d;
      },
      py::arg("design"), py::arg("response"), py::arg("grid") = py::none(), py::arg("folds") = 5,
      py::arg("has_intercept") = false, py::arg("centered") = true, py::arg("model") = "regression",
      py::arg("delta") = 1.0);

  m.def(
      "two_step_fit",
      [](const Eigen::MatrixXd& design, const Eigen::VectorXd& response, double lambda, double tau,
         bool has_intercept, bool centered, const std::string& model, double delta,
         std::optional<std::vector<int>> reference_support) {
        twostep::TwoStepOptions options;
        options.lambda = lambda;
        options.tau = tau;
        options.centered = centered;
        options.reference_support = std::move(reference_support);
        const auto fit = twostep::two_step_fit(
            make_design(design, response, has_intercept, model, delta), options);
        py::dict d;
        d["first_step"] = fit_dict(fit.first_step);
        d["support"] = fit.support.indices;
        d["theta_tilde"] = fit.theta_tilde;
        d["asymp_cov"] = fit.asymp_cov;
        d["nuisance_kind"] = twostep::to_string(fit.nuisance.kind);
        d["nuisance"] = fit.nuisance.values;
        d["selection_flag"] = fit.selection_flag ? py::cast(*fit.selection_flag) : py::none();
        d["empty_model"] = fit.empty_model;
        d["floored_rows"] = fit.floored_rows;
        return d;
      },
      py::arg("design"), py::arg("response"), py::arg("lam"), py::arg("tau") = 0.05,
      py::arg("has_intercept") = false, py::arg("centered") = true, py::arg("model") = "regression",
      py::arg("delta") = 1.0, py::arg("reference_support") = py::none());

  m.def(
      "shapiro_wilk", [](const Eigen::VectorXd& x) { return normality_dict(diagnostics::shapiro_wilk(x)); },
      py::arg("sample"));
  m.def(
      "royston_test", [](const Eigen::MatrixXd& x) { return normality_dict(diagnostics::royston_test(x)); },
      py::arg("sample"));
  m.def(
      "estimate_f_infinity",
      [](const Eigen::MatrixXd& mat, const std::vector<int>& support, int n_samples, std::uint64_t seed,
         int refine_steps) {
        return finfty_dict(diagnostics::estimate_f_infinity(mat, support, n_samples, seed, refine_steps));
      },
      py::arg("m"), py::arg("support"), py::arg("n_samples"), py::arg("seed"), py::arg("refine_steps") = 40);
  m.def(
      "f_infinity_grid",
      [](const Eigen::MatrixXd& mat, const std::vector<int>& support, int resolution) {
        return finfty_dict(diagnostics::f_infinity_grid(mat, support, resolution));
      },
      py::arg("m"), py::arg("support"), py::arg("resolution") = 401);

  m.def(
      "run_case",
      [](const std::string& config_json, int jobs) {
        const auto config = io::case_config_from_json(parse_config(config_json));
        harness::CaseReport report;
        {
          py::gil_scoped_release release;
          report = harness::run_case(config, jobs);
        }
        return io::dump(io::to_json(report));
      },
      py::arg("config_json"), py::arg("jobs") = 1, "Runs a case config (JSON text); returns the report JSON");
  m.def(
      "run_hawkes_support",
      [](const std::string& config_json, int jobs) {
        const auto config = io::hawkes_config_from_json(parse_config(config_json));
        harness::HawkesReport report;
        {
          py::gil_scoped_release release;
          report = harness::run_hawkes_support(config, jobs);
        }
        return io::dump(io::to_json(report));
      },
      py::arg("config_json"), py::arg("jobs") = 1);
}
