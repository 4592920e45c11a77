#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sparsets/dantzig.hpp"
#include "sparsets/diagnostics.hpp"
#include "sparsets/errors.hpp"
#include "sparsets/harness.hpp"
#include "sparsets/json_io.hpp"
#include "sparsets/procsim.hpp"
#include "sparsets/scorelab.hpp"
#include "sparsets/twostep.hpp"

namespace {

using sparsets::io::Json;
namespace harness = sparsets::harness;
namespace io = sparsets::io;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<double> lambda;
  std::optional<double> tau;
  std::string out;
  std::string hist;
  std::string records;
  int jobs = 1;
  std::string series;
  std::optional<int> order;
  std::optional<int> n;
};

void emit(const Json& value, const std::string& out) {
  if (out.empty()) std::cout << io::dump(value);
  else io::write_json_file(value, out);
}

Json load_config(const CommonFlags& f) {
  if (f.config.empty()) throw sparsets::ConfigError("--config is required");
  return io::read_json_file(f.config);
}

// simulate: {"model": {...spec...}, "n": int, "seed": int, "delta": hawkes bin width}
// or a case config, whose model is simulated for n steps (hawkes: over its horizon).
int cmd_simulate(const CommonFlags& f) {
  Json cfg = load_config(f);
  if (f.out.empty()) throw sparsets::ConfigError("simulate needs --out <series.csv>");
  std::uint64_t seed = 0;
  if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_integer()) throw sparsets::ConfigError("seed must be an integer");
    seed = cfg.at("seed").get<std::uint64_t>();
    cfg.erase("seed");
  }
  if (f.seed) seed = *f.seed;
  if (f.n) cfg["n"] = *f.n;

  sparsets::procsim::SeriesSample series;
  if (cfg.contains("case") && cfg.at("case") == "hawkes") {
    cfg.erase("n");
    const harness::HawkesConfig c = io::hawkes_config_from_json(cfg);
    series = sparsets::procsim::bin_counts(sparsets::procsim::simulate_hawkes(c.spec, seed), c.delta,
                                           c.spec.horizon);
  } else if (cfg.contains("case")) {
    const harness::CaseConfig c = io::case_config_from_json(cfg);
    switch (c.model) {
      case harness::ModelKind::inar:
        series = sparsets::procsim::simulate_inar(c.inar, c.n, seed);
        break;
      case harness::ModelKind::minar1:
        series = sparsets::procsim::simulate_minar1(c.minar1, c.n, seed);
        break;
      case harness::ModelKind::ou: {
        auto spec = c.ou;
        spec.n_steps = c.n;
        series = sparsets::procsim::simulate_ou(spec, seed);
        break;
      }
    }
  } else {
    if (!cfg.contains("model") || !cfg.at("model").is_object() || !cfg.at("model").contains("type")) {
      throw sparsets::ConfigError("simulate config needs a \"model\" object with a \"type\"");
    }
    const Json& m = cfg.at("model");
    const std::string type = m.at("type").is_string() ? m.at("type").get<std::string>() : "";
    const int n = cfg.contains("n") && cfg.at("n").is_number_integer() ? cfg.at("n").get<int>() : 1000;
    if (type == "inar") {
      series = sparsets::procsim::simulate_inar(io::inar_spec_from_json(m), n, seed);
    } else if (type == "minar1") {
      series = sparsets::procsim::simulate_minar1(io::minar1_spec_from_json(m), n, seed);
    } else if (type == "ou") {
      auto spec = io::ou_spec_from_json(m);
      if (cfg.contains("n")) spec.n_steps = n;
      series = sparsets::procsim::simulate_ou(spec, seed);
    } else if (type == "hawkes") {
      const auto spec = io::hawkes_spec_from_json(m);
      if (!cfg.contains("delta") || !cfg.at("delta").is_number()) {
        throw sparsets::ConfigError("hawkes simulation needs a bin width \"delta\"");
      }
      series = sparsets::procsim::bin_counts(sparsets::procsim::simulate_hawkes(spec, seed),
                                             cfg.at("delta").get<double>(), spec.horizon);
    } else {
      throw sparsets::ConfigError("model type must be inar, minar1, ou or hawkes");
    }
  }
  sparsets::procsim::write_series_csv(series, f.out);
  return kExitOk;
}

struct FitInput {
  sparsets::scorelab::DesignData data;
  harness::LambdaMode lambda;
  double tau = 0.05;
  bool centered = true;
  Json description;
};

// fit / cv: {"series": path, "model": "inar"|"var1"|"diffusion", "order": p,
// "target": j, "lambda": {...}, "tau": real, "centered": bool}
FitInput load_fit_input(const CommonFlags& f) {
  Json cfg = f.config.empty() ? Json::object() : io::read_json_file(f.config);
  if (!f.series.empty()) cfg["series"] = f.series;
  if (f.order) cfg["order"] = *f.order;
  if (!cfg.contains("series") || !cfg.at("series").is_string()) {
    throw sparsets::ConfigError("a series file is required (--series or \"series\")");
  }
  const std::string path = cfg.at("series").get<std::string>();
  const std::string model =
      cfg.contains("model") && cfg.at("model").is_string() ? cfg.at("model").get<std::string>() : "inar";
  const int target = cfg.contains("target") && cfg.at("target").is_number_integer() ? cfg.at("target").get<int>() : 0;

  FitInput in;
  const auto series = sparsets::procsim::read_series_csv(path);
  if (model == "inar") {
    if (!cfg.contains("order") || !cfg.at("order").is_number_integer()) {
      throw sparsets::ConfigError("inar fits need an integer order");
    }
    in.data = sparsets::scorelab::inar_design(series, cfg.at("order").get<int>());
  } else if (model == "var1") {
    in.data = sparsets::scorelab::var1_row_design(series, target);
  } else if (model == "diffusion") {
    in.data = sparsets::scorelab::diffusion_row_design(series, target);
  } else {
    throw sparsets::ConfigError("model must be inar, var1 or diffusion");
  }
  in.centered = in.data.has_intercept;
  if (cfg.contains("centered")) {
    if (!cfg.at("centered").is_boolean()) throw sparsets::ConfigError("centered must be a boolean");
    in.centered = cfg.at("centered").get<bool>();
  }
  if (cfg.contains("lambda")) in.lambda = io::lambda_mode_from_json(cfg.at("lambda"));
  if (f.lambda) {
    in.lambda.kind = harness::LambdaMode::Kind::fixed;
    in.lambda.value = *f.lambda;
    in.lambda.validate();
  }
  if (cfg.contains("tau")) {
    if (!cfg.at("tau").is_number()) throw sparsets::ConfigError("tau must be a number");
    in.tau = cfg.at("tau").get<double>();
  }
  if (f.tau) in.tau = *f.tau;
  in.description = {{"series", path},
                    {"model", model},
                    {"rows", in.data.rows()},
                    {"columns", in.data.cols()},
                    {"has_intercept", in.data.has_intercept},
                    {"centered", in.centered}};
  return in;
}

std::vector<double> cv_grid(const FitInput& in) {
  if (!in.lambda.grid.empty()) {
    auto grid = in.lambda.grid;
    std::sort(grid.begin(), grid.end());
    return grid;
  }
  return sparsets::dantzig::default_lambda_grid(in.data, in.centered, in.lambda.grid_count,
                                                in.lambda.grid_lo, in.lambda.grid_hi);
}

int cmd_fit(const CommonFlags& f) {
  const FitInput in = load_fit_input(f);
  Json out;
  out["schema"] = io::kSchemaVersion;
  out["kind"] = "fit";
  out["input"] = in.description;
  double lambda = 0.0;
  if (in.lambda.kind == harness::LambdaMode::Kind::cv) {
    const auto report = sparsets::dantzig::cross_validate_lambda(in.data, cv_grid(in),
                                                                 in.lambda.folds, in.centered);
    lambda = report.chosen_lambda;
    out["cv"] = io::to_json(report);
  } else {
    lambda = harness::choose_lambda(in.data, in.lambda, in.centered);
  }
  sparsets::twostep::TwoStepOptions options;
  options.lambda = lambda;
  options.tau = in.tau;
  options.centered = in.centered;
  const auto fit = sparsets::twostep::two_step_fit(in.data, options);
  out["lambda"] = lambda;
  out["tau"] = in.tau;
  out["first_step"] = io::to_json(fit.first_step);
  out["two_step"] = io::to_json(fit);
  out["two_step"].erase("first_step");
  emit(out, f.out);
  return kExitOk;
}

int cmd_cv(const CommonFlags& f) {
  const FitInput in = load_fit_input(f);
  const auto report =
      sparsets::dantzig::cross_validate_lambda(in.data, cv_grid(in), in.lambda.folds, in.centered);
  Json out;
  out["schema"] = io::kSchemaVersion;
  out["kind"] = "cv";
  out["input"] = in.description;
  out["cv"] = io::to_json(report);
  emit(out, f.out);
  return kExitOk;
}

int cmd_experiment(const CommonFlags& f) {
  Json cfg = load_config(f);
  if (f.seed) cfg["base_seed"] = *f.seed;
  if (f.reps) cfg["reps"] = *f.reps;
  if (f.lambda) cfg["lambda"] = Json{{"mode", "fixed"}, {"value", *f.lambda}};
  if (f.tau) cfg["tau"] = *f.tau;
  const harness::CaseConfig config = io::case_config_from_json(cfg);
  const harness::CaseReport report = harness::run_case(config, f.jobs);
  emit(io::to_json(report), f.out);
  if (!f.hist.empty()) {
    std::vector<double> stats;
    for (const auto& r : report.records) {
      if (!r.failed && std::isfinite(r.proj_stat)) stats.push_back(r.proj_stat);
    }
    harness::emit_histogram(stats, config.hist_bins, f.hist);
  }
  if (!f.records.empty()) harness::write_records_csv(report.records, f.records);
  return kExitOk;
}

// finfty: {"matrix": [[...]], "support": [...], "samples": int, "seed": int,
// "refine_steps": int, "method": "sampling"|"grid", "resolution": int}
// or "series"/"order" in place of "matrix" to use the INAR design gram.
int cmd_finfty(const CommonFlags& f) {
  Json cfg = f.config.empty() ? Json::object() : io::read_json_file(f.config);
  if (!f.series.empty()) cfg["series"] = f.series;
  if (f.order) cfg["order"] = *f.order;
  auto get_int = [&](const char* key, int fallback) {
    if (!cfg.contains(key)) return fallback;
    if (!cfg.at(key).is_number_integer()) throw sparsets::ConfigError(std::string(key) + " must be an integer");
    return cfg.at(key).get<int>();
  };

  Eigen::MatrixXd m;
  if (cfg.contains("matrix")) {
    const Json& rows = cfg.at("matrix");
    if (!rows.is_array() || rows.empty()) throw sparsets::ConfigError("matrix must be an array of rows");
    m.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].is_array() || rows[i].size() != rows.size()) {
        throw sparsets::ConfigError("matrix must be square");
      }
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (!rows[i][j].is_number()) throw sparsets::ConfigError("matrix entries must be numbers");
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
      }
    }
  } else if (cfg.contains("series")) {
    if (!cfg.at("series").is_string()) throw sparsets::ConfigError("series must be a path");
    const auto series = sparsets::procsim::read_series_csv(cfg.at("series").get<std::string>());
    m = sparsets::scorelab::score_from_design(
            sparsets::scorelab::inar_design(series, get_int("order", 1)))
            .gram;
  } else {
    throw sparsets::ConfigError("finfty needs \"matrix\" or \"series\"");
  }
  std::vector<int> support;
  if (cfg.contains("support")) {
    if (!cfg.at("support").is_array()) throw sparsets::ConfigError("support must be an array");
    for (const auto& v : cfg.at("support")) {
      if (!v.is_number_integer()) throw sparsets::ConfigError("support entries must be integers");
      support.push_back(v.get<int>());
    }
  }
  const std::string method =
      cfg.contains("method") && cfg.at("method").is_string() ? cfg.at("method").get<std::string>() : "sampling";
  std::uint64_t seed = cfg.contains("seed") && cfg.at("seed").is_number_integer()
                           ? cfg.at("seed").get<std::uint64_t>()
                           : 1;
  if (f.seed) seed = *f.seed;

  sparsets::diagnostics::FInftyEstimate estimate;
  if (method == "grid") {
    estimate = sparsets::diagnostics::f_infinity_grid(m, support, get_int("resolution", 401));
  } else if (method == "sampling") {
    estimate = sparsets::diagnostics::estimate_f_infinity(m, support, get_int("samples", 2000), seed,
                                                          get_int("refine_steps", 40));
  } else {
    throw sparsets::ConfigError("method must be sampling or grid");
  }
  Json out;
  out["schema"] = io::kSchemaVersion;
  out["kind"] = "finfty";
  out["estimate"] = io::to_json(estimate);
  emit(out, f.out);
  return kExitOk;
}

int cmd_hawkes(const CommonFlags& f) {
  Json cfg = f.config.empty() ? Json::object() : io::read_json_file(f.config);
  if (f.seed) cfg["base_seed"] = *f.seed;
  if (f.reps) cfg["reps"] = *f.reps;
  if (f.lambda) cfg["lambda"] = Json{{"mode", "fixed"}, {"value", *f.lambda}};
  if (f.tau) cfg["tau"] = *f.tau;
  const harness::HawkesConfig config = io::hawkes_config_from_json(cfg);
  emit(io::to_json(harness::run_hawkes_support(config, f.jobs)), f.out);
  return kExitOk;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const sparsets::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const sparsets::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sparsets::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sparsets::DimensionError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sparsets::StationarityError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step Dantzig selector estimation for sparse time-series models"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--out", flags.out, "output path (JSON or CSV); stdout when omitted");
  };
  auto add_run = [&](CLI::App* sub) {
    sub->add_option("--seed", flags.seed, "base seed");
    sub->add_option("--reps", flags.reps, "number of replications")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", flags.lambda, "fixed lambda (overrides the config)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--tau", flags.tau, "support threshold")->check(CLI::NonNegativeNumber);
    sub->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  auto add_series = [&](CLI::App* sub) {
    sub->add_option("--series", flags.series, "series CSV (t,x1[,x2,...])");
    sub->add_option("--order", flags.order, "INAR order")->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "simulate a series from a spec or case config");
  add_common(simulate);
  simulate->add_option("--seed", flags.seed, "simulation seed");
  simulate->add_option("--n", flags.n, "series length")->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "two-step fit of one series");
  add_common(fit);
  add_series(fit);
  fit->add_option("--lambda", flags.lambda, "fixed lambda (default: cross-validated)")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--tau", flags.tau, "support threshold")->check(CLI::NonNegativeNumber);

  auto* cv = app.add_subcommand("cv", "cross-validate lambda on one series");
  add_common(cv);
  add_series(cv);

  auto* experiment = app.add_subcommand("experiment", "Monte Carlo replication of a case");
  add_common(experiment);
  add_run(experiment);
  experiment->add_option("--hist", flags.hist, "histogram CSV of the projected statistic");
  experiment->add_option("--records", flags.records, "per-replication CSV");

  auto* finfty = app.add_subcommand("finfty", "F-infinity compatibility diagnostic");
  add_common(finfty);
  add_series(finfty);
  finfty->add_option("--seed", flags.seed, "sampling seed");

  auto* hawkes = app.add_subcommand("hawkes-support", "Hawkes kernel support recovery");
  add_common(hawkes);
  add_run(hawkes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*simulate) return guarded([&] { return cmd_simulate(flags); });
  if (*fit) return guarded([&] { return cmd_fit(flags); });
  if (*cv) return guarded([&] { return cmd_cv(flags); });
  if (*experiment) return guarded([&] { return cmd_experiment(flags); });
  if (*finfty) return guarded([&] { return cmd_finfty(flags); });
  if (*hawkes) return guarded([&] { return cmd_hawkes(flags); });
  return kExitConfig;
}
