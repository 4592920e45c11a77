#include "sparsets/json_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "sparsets/errors.hpp"

namespace sparsets::io {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

Json int_array(const std::vector<int>& v) {
  Json out = Json::array();
  for (int x : v) out.push_back(x);
  return out;
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!names.count(item.key())) throw ConfigError("unknown field '" + item.key() + "' in " + where);
  }
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing field '" + std::string(key) + "' in " + where);
  return j.at(key);
}

double as_double(const Json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

int as_int(const Json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(what + " is out of range");
  }
  return static_cast<int>(x);
}

std::uint64_t as_seed(const Json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(what + " must be a nonnegative integer");
}

bool as_bool(const Json& v, const std::string& what) {
  if (!v.is_boolean()) throw ConfigError(what + " must be true or false");
  return v.get<bool>();
}

double get_double(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? as_double(j.at(key), key) : fallback;
}

int get_int(const Json& j, const char* key, int fallback) {
  return j.contains(key) ? as_int(j.at(key), key) : fallback;
}

Eigen::VectorXd as_vector(const Json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_double(v[i], what);
  return out;
}

std::vector<double> as_std_vector(const Json& v, const std::string& what) {
  const Eigen::VectorXd x = as_vector(v, what);
  return {x.data(), x.data() + x.size()};
}

Eigen::MatrixXd as_matrix(const Json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw ConfigError(what + " must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].is_array() ? v[0].size() : 0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(what + " rows must be arrays of equal length");
    }
    out.row(i) = as_vector(row, what).transpose();
  }
  return out;
}

// a_matrix, or a_block repeated `blocks` times along the diagonal.
Eigen::MatrixXd drift_matrix(const Json& j, const std::string& where) {
  if (j.contains("a_matrix")) {
    if (j.contains("a_block")) throw ConfigError(where + ": give a_matrix or a_block, not both");
    return as_matrix(j.at("a_matrix"), "a_matrix");
  }
  const Eigen::MatrixXd block = as_matrix(require(j, "a_block", where), "a_block");
  const int blocks = as_int(require(j, "blocks", where), "blocks");
  if (blocks < 1) throw ConfigError("blocks must be >= 1");
  if (block.rows() != block.cols()) throw ConfigError("a_block must be square");
  return procsim::block_diagonal(block, blocks);
}

Eigen::VectorXd broadcast(const Json& v, Eigen::Index size, const std::string& what) {
  if (v.is_number()) return Eigen::VectorXd::Constant(size, as_double(v, what));
  return as_vector(v, what);
}

template <typename Spec>
Spec validated(Spec spec, const char* what) {
  try {
    spec.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
  return spec;
}

Json normality_or_null(const std::optional<diagnostics::NormalityReport>& r) {
  return r ? to_json(*r) : Json(nullptr);
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

std::string dump(const Json& value) { return value.dump(2) + "\n"; }

void write_json_file(const Json& value, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open output file: " + path);
  os << dump(value);
  if (!os) throw Error("failed writing output file: " + path);
}

procsim::InarSpec inar_spec_from_json(const Json& j) {
  check_keys(j, {"type", "mu_eps", "alpha", "burn_in"}, "inar spec");
  procsim::InarSpec spec;
  spec.mu_eps = as_double(require(j, "mu_eps", "inar spec"), "mu_eps");
  spec.alpha = as_vector(require(j, "alpha", "inar spec"), "alpha");
  spec.burn_in = get_int(j, "burn_in", spec.burn_in);
  return validated(spec, "inar spec");
}

procsim::Minar1Spec minar1_spec_from_json(const Json& j) {
  check_keys(j, {"type", "eta", "a_matrix", "a_block", "blocks", "burn_in"}, "minar1 spec");
  procsim::Minar1Spec spec;
  spec.a_matrix = drift_matrix(j, "minar1 spec");
  spec.eta = broadcast(require(j, "eta", "minar1 spec"), spec.a_matrix.rows(), "eta");
  spec.burn_in = get_int(j, "burn_in", spec.burn_in);
  return validated(spec, "minar1 spec");
}

procsim::OuSpec ou_spec_from_json(const Json& j) {
  check_keys(j, {"type", "a_matrix", "a_block", "blocks", "sigma_diag", "delta", "n_steps",
                 "substeps", "initial_state"},
             "ou spec");
  procsim::OuSpec spec;
  spec.a_matrix = drift_matrix(j, "ou spec");
  spec.sigma_diag = j.contains("sigma_diag")
                        ? broadcast(j.at("sigma_diag"), spec.a_matrix.rows(), "sigma_diag")
                        : Eigen::VectorXd::Ones(spec.a_matrix.rows());
  spec.delta = get_double(j, "delta", spec.delta);
  spec.n_steps = get_int(j, "n_steps", spec.n_steps);
  spec.substeps = get_int(j, "substeps", spec.substeps);
  if (j.contains("initial_state") && !j.at("initial_state").is_null()) {
    spec.initial_state = as_vector(j.at("initial_state"), "initial_state");
  }
  return validated(spec, "ou spec");
}

procsim::HawkesSpec hawkes_spec_from_json(const Json& j) {
  check_keys(j, {"type", "eta", "breakpoints", "values", "horizon"}, "hawkes spec");
  procsim::HawkesSpec spec;
  spec.eta = get_double(j, "eta", spec.eta);
  if (j.contains("breakpoints")) spec.breakpoints = as_std_vector(j.at("breakpoints"), "breakpoints");
  if (j.contains("values")) spec.values = as_std_vector(j.at("values"), "values");
  spec.horizon = get_double(j, "horizon", spec.horizon);
  return validated(spec, "hawkes spec");
}

Json to_json(const procsim::InarSpec& spec) {
  Json j;
  j["type"] = "inar";
  j["mu_eps"] = number(spec.mu_eps);
  j["alpha"] = vector_json(spec.alpha);
  j["burn_in"] = spec.burn_in;
  return j;
}

Json to_json(const procsim::Minar1Spec& spec) {
  Json j;
  j["type"] = "minar1";
  j["eta"] = vector_json(spec.eta);
  j["a_matrix"] = matrix_json(spec.a_matrix);
  j["burn_in"] = spec.burn_in;
  return j;
}

Json to_json(const procsim::OuSpec& spec) {
  Json j;
  j["type"] = "ou";
  j["a_matrix"] = matrix_json(spec.a_matrix);
  j["sigma_diag"] = vector_json(spec.sigma_diag);
  j["delta"] = number(spec.delta);
  j["n_steps"] = spec.n_steps;
  j["substeps"] = spec.substeps;
  j["initial_state"] = spec.initial_state ? vector_json(*spec.initial_state) : Json(nullptr);
  return j;
}

Json to_json(const procsim::HawkesSpec& spec) {
  Json j;
  j["type"] = "hawkes";
  j["eta"] = number(spec.eta);
  j["breakpoints"] = spec.breakpoints;
  j["values"] = spec.values;
  j["horizon"] = number(spec.horizon);
  return j;
}

Json to_json(const scorelab::LinearScoreSystem& sys) {
  Json j;
  j["model"] = scorelab::to_string(sys.model_tag);
  j["dim"] = sys.dim();
  j["n_eff"] = sys.n_eff;
  j["gram"] = matrix_json(sys.gram);
  j["moment"] = vector_json(sys.moment);
  return j;
}

Json to_json(const scorelab::WeightedScoreSystem& sys) {
  Json j;
  j["support"] = int_array(sys.support);
  j["n_eff"] = sys.n_eff;
  j["gram_w"] = matrix_json(sys.gram_w);
  j["moment_w"] = vector_json(sys.moment_w);
  j["weight_min"] = number(sys.weight_min);
  j["weight_max"] = number(sys.weight_max);
  j["floored_rows"] = sys.floored_rows;
  return j;
}

Json to_json(const dantzig::DantzigFit& fit) {
  Json j;
  j["theta_hat"] = vector_json(fit.theta_hat);
  j["lambda"] = number(fit.lambda);
  j["objective"] = number(fit.l1_objective);
  j["slack"] = number(fit.feasibility_slack);
  j["status"] = dantzig::to_string(fit.status);
  j["iterations"] = fit.iterations;
  return j;
}

Json to_json(const dantzig::CvReport& report) {
  Json j;
  j["folds"] = report.folds;
  j["grid"] = Json::array();
  j["cv_loss"] = Json::array();
  for (double g : report.grid) j["grid"].push_back(number(g));
  for (double l : report.cv_loss) j["cv_loss"].push_back(number(l));
  j["chosen_lambda"] = number(report.chosen_lambda);
  return j;
}

Json to_json(const twostep::NuisanceEstimate& nuisance) {
  Json j;
  j["kind"] = twostep::to_string(nuisance.kind);
  j["values"] = vector_json(nuisance.values);
  j["support"] = int_array(nuisance.support);
  return j;
}

Json to_json(const twostep::TwoStepFit& fit) {
  Json j;
  j["first_step"] = to_json(fit.first_step);
  j["support"] = int_array(fit.support.indices);
  j["threshold"] = number(fit.support.threshold);
  Json pairs = Json::array();
  for (int idx : fit.support.indices) pairs.push_back(Json::array({idx, number(fit.theta_tilde[idx])}));
  j["theta_tilde"] = pairs;
  j["dim"] = fit.theta_tilde.size();
  j["nuisance"] = to_json(fit.nuisance);
  j["cov"] = matrix_json(fit.asymp_cov);
  j["selection_flag"] = fit.selection_flag ? Json(*fit.selection_flag) : Json(nullptr);
  j["empty_model"] = fit.empty_model;
  j["weight_min"] = number(fit.weight_min);
  j["weight_max"] = number(fit.weight_max);
  j["floored_rows"] = fit.floored_rows;
  return j;
}

Json to_json(const diagnostics::FInftyEstimate& estimate) {
  Json j;
  j["value"] = number(estimate.value);
  j["method"] = diagnostics::to_string(estimate.method);
  j["bound"] = estimate.method == diagnostics::FInftyEstimate::Method::cone_sampling
                   ? "upper bound on the infimum"
                   : "grid minimum";
  j["samples"] = estimate.samples;
  j["support"] = int_array(estimate.support);
  return j;
}

Json to_json(const diagnostics::NormalityReport& report) {
  Json j;
  j["test"] = diagnostics::to_string(report.test);
  j["statistic"] = number(report.statistic);
  j["p_value"] = number(report.p_value);
  j["dimension"] = report.dimension;
  j["n"] = report.n;
  if (report.test == diagnostics::NormalityReport::Test::royston_h) {
    j["degrees_of_freedom"] = number(report.degrees_of_freedom);
  }
  return j;
}

harness::LambdaMode lambda_mode_from_json(const Json& j) {
  harness::LambdaMode mode;
  if (j.is_number()) {
    mode.kind = harness::LambdaMode::Kind::fixed;
    mode.value = as_double(j, "lambda");
    mode.validate();
    return mode;
  }
  check_keys(j, {"mode", "value", "c", "grid", "grid_count", "grid_lo", "grid_hi", "folds"},
             "lambda");
  const Json& kind = require(j, "mode", "lambda");
  if (!kind.is_string()) throw ConfigError("lambda.mode must be a string");
  const auto name = kind.get<std::string>();
  if (name == "fixed") {
    mode.kind = harness::LambdaMode::Kind::fixed;
    mode.value = as_double(require(j, "value", "lambda"), "lambda.value");
  } else if (name == "rate") {
    mode.kind = harness::LambdaMode::Kind::rate;
    mode.value = as_double(require(j, "c", "lambda"), "lambda.c");
  } else if (name == "cv") {
    mode.kind = harness::LambdaMode::Kind::cv;
    if (j.contains("grid")) mode.grid = as_std_vector(j.at("grid"), "lambda.grid");
    mode.grid_count = get_int(j, "grid_count", mode.grid_count);
    mode.grid_lo = get_double(j, "grid_lo", mode.grid_lo);
    mode.grid_hi = get_double(j, "grid_hi", mode.grid_hi);
    mode.folds = get_int(j, "folds", mode.folds);
  } else {
    throw ConfigError("lambda.mode must be fixed, cv or rate");
  }
  mode.validate();
  return mode;
}

Json to_json(const harness::LambdaMode& mode) {
  Json j;
  j["mode"] = harness::to_string(mode.kind);
  switch (mode.kind) {
    case harness::LambdaMode::Kind::fixed: j["value"] = number(mode.value); break;
    case harness::LambdaMode::Kind::rate: j["c"] = number(mode.value); break;
    case harness::LambdaMode::Kind::cv:
      j["folds"] = mode.folds;
      if (mode.grid.empty()) {
        j["grid_count"] = mode.grid_count;
        j["grid_lo"] = number(mode.grid_lo);
        j["grid_hi"] = number(mode.grid_hi);
      } else {
        j["grid"] = mode.grid;
      }
      break;
  }
  return j;
}

namespace {

Json model_json(const harness::CaseConfig& c) {
  switch (c.model) {
    case harness::ModelKind::inar: return to_json(c.inar);
    case harness::ModelKind::minar1: return to_json(c.minar1);
    case harness::ModelKind::ou: {
      Json j = to_json(c.ou);
      j.erase("n_steps");  // set by n
      return j;
    }
  }
  return nullptr;
}

void read_model(const Json& m, harness::CaseConfig& c) {
  if (!m.is_object()) throw ConfigError("model must be a JSON object");
  const Json& type = require(m, "type", "model");
  if (!type.is_string()) throw ConfigError("model.type must be a string");
  const auto name = type.get<std::string>();
  if (name == "inar") {
    c.model = harness::ModelKind::inar;
    c.inar = inar_spec_from_json(m);
    c.p = static_cast<int>(c.inar.alpha.size());
  } else if (name == "minar1") {
    c.model = harness::ModelKind::minar1;
    c.minar1 = minar1_spec_from_json(m);
    c.p = static_cast<int>(c.minar1.eta.size());
  } else if (name == "ou") {
    if (m.contains("n_steps")) throw ConfigError("ou model in a case config takes its length from n");
    c.model = harness::ModelKind::ou;
    c.ou = ou_spec_from_json(m);
    c.p = static_cast<int>(c.ou.a_matrix.rows());
    c.centered = false;
  } else {
    throw ConfigError("case model type must be inar, minar1 or ou");
  }
}

}  // namespace

harness::CaseConfig case_config_from_json(const Json& j) {
  check_keys(j, {"schema", "case", "n", "p", "reps", "base_seed", "lambda", "tau", "centered",
                 "hist_bins", "target", "delta", "model"},
             "case config");
  if (j.contains("schema") && as_int(j.at("schema"), "schema") != kSchemaVersion) {
    throw ConfigError("unsupported schema version");
  }
  const Json& case_name = require(j, "case", "case config");
  if (!case_name.is_string()) throw ConfigError("case must be a string");
  const harness::CaseId id = harness::parse_case_id(case_name.get<std::string>());
  const int n = get_int(j, "n", 2000);

  harness::CaseConfig c;
  if (id == harness::CaseId::custom) {
    c.case_id = id;
    c.n = n;
    read_model(require(j, "model", "custom case"), c);
    if (j.contains("p") && as_int(j.at("p"), "p") != c.p) {
      throw ConfigError("p disagrees with the model dimension");
    }
    if (j.contains("delta")) {
      if (c.model != harness::ModelKind::ou) throw ConfigError("delta only applies to ou models");
      c.ou.delta = as_double(j.at("delta"), "delta");
    }
  } else {
    c = harness::builtin_case(id, n);
    if (id == harness::CaseId::ou) {
      const int p = get_int(j, "p", c.p);
      if (p < 4 || p % 4 != 0) throw ConfigError("ou case needs p a positive multiple of 4");
      c.p = p;
      c.ou.a_matrix = procsim::block_diagonal(
          harness::case_block() - Eigen::Matrix4d::Identity(), p / 4);
      c.ou.sigma_diag = Eigen::VectorXd::Ones(p);
      c.ou.delta = get_double(j, "delta", c.ou.delta);
    } else {
      if (j.contains("p") && as_int(j.at("p"), "p") != c.p) {
        throw ConfigError(std::string("p is fixed for ") + harness::to_string(id));
      }
      if (j.contains("delta")) throw ConfigError("delta only applies to the ou case");
    }
    if (j.contains("model") && model_json(c) != j.at("model")) {
      throw ConfigError(std::string("model parameters are fixed for ") + harness::to_string(id) +
                        "; use case custom");
    }
  }
  c.reps = get_int(j, "reps", c.reps);
  if (j.contains("base_seed")) c.base_seed = as_seed(j.at("base_seed"), "base_seed");
  if (j.contains("lambda")) c.lambda = lambda_mode_from_json(j.at("lambda"));
  c.tau = get_double(j, "tau", c.tau);
  if (j.contains("centered")) c.centered = as_bool(j.at("centered"), "centered");
  c.hist_bins = get_int(j, "hist_bins", c.hist_bins);
  c.target = get_int(j, "target", c.target);
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

Json to_json(const harness::CaseConfig& c) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["case"] = harness::to_string(c.case_id);
  j["n"] = c.n;
  j["p"] = c.p;
  j["reps"] = c.reps;
  j["base_seed"] = c.base_seed;
  j["lambda"] = to_json(c.lambda);
  j["tau"] = number(c.tau);
  j["centered"] = c.centered;
  j["hist_bins"] = c.hist_bins;
  j["target"] = c.target;
  if (c.model == harness::ModelKind::ou) j["delta"] = number(c.ou.delta);
  j["model"] = model_json(c);
  return j;
}

Json to_json(const harness::CaseReport& report) {
  const auto& s = report.summary;
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "case_report";
  j["config"] = to_json(report.config);
  j["theta_true"] = vector_json(report.theta_true);
  j["support_true"] = int_array(report.support_true);
  j["u"] = vector_json(report.u);

  Json summary;
  summary["reps"] = s.reps;
  summary["failures"] = s.failures;
  summary["successes"] = s.reps - s.failures;
  summary["selected"] = s.selected;
  summary["mean_linf_first"] = number(s.mean_linf_first);
  summary["mean_l2_first"] = number(s.mean_l2_first);
  summary["selection_proportion"] = number(s.selection_proportion);
  summary["mean_linf_two"] = number(s.mean_linf_two);
  summary["mean_l2_two"] = number(s.mean_l2_two);
  summary["mean_lambda"] = number(s.mean_lambda);
  summary["two_step_improves_linf"] = s.mean_linf_two <= s.mean_linf_first;
  summary["two_step_improves_l2"] = s.mean_l2_two <= s.mean_l2_first;
  summary["coverage_95"] = number(s.coverage);
  summary["proj_var_sample"] = number(s.proj_var_sample);
  summary["proj_var_plugin"] = number(s.proj_var_plugin);
  summary["royston_p"] = s.royston_selected ? number(s.royston_selected->p_value) : Json(nullptr);
  summary["royston"] = normality_or_null(s.royston_selected);
  summary["royston_with_intercept"] = normality_or_null(s.royston_with_intercept);
  summary["royston_all_reps"] = normality_or_null(s.royston_all);
  if (!s.royston_note.empty()) summary["royston_note"] = s.royston_note;
  j["summary"] = summary;

  Json records = Json::array();
  for (const auto& r : report.records) {
    Json rec;
    rec["rep"] = r.rep;
    rec["seed"] = r.seed;
    rec["lambda"] = number(r.lambda);
    rec["linf1"] = number(r.linf1);
    rec["l21"] = number(r.l21);
    rec["sel"] = r.sel;
    rec["linf2"] = number(r.linf2);
    rec["l22"] = number(r.l22);
    rec["proj_stat"] = number(r.proj_stat);
    rec["proj_var"] = number(r.proj_var);
    rec["covered"] = r.covered;
    rec["coverage_total"] = r.coverage_total;
    rec["theta_support"] = vector_json(r.theta_support);
    rec["failed"] = r.failed;
    if (r.failed) rec["error"] = r.error;
    records.push_back(rec);
  }
  j["records"] = records;
  return j;
}

harness::HawkesConfig hawkes_config_from_json(const Json& j) {
  check_keys(j, {"schema", "case", "reps", "base_seed", "lambda", "tau", "centered", "delta",
                 "order", "model"},
             "hawkes config");
  if (j.contains("schema") && as_int(j.at("schema"), "schema") != kSchemaVersion) {
    throw ConfigError("unsupported schema version");
  }
  if (j.contains("case") && (!j.at("case").is_string() || j.at("case").get<std::string>() != "hawkes")) {
    throw ConfigError("hawkes-support needs case \"hawkes\"");
  }
  harness::HawkesConfig c = harness::default_hawkes_config();
  if (j.contains("model")) {
    const Json& m = j.at("model");
    if (!m.is_object() || !m.contains("type") || m.at("type") != "hawkes") {
      throw ConfigError("hawkes config model must have type hawkes");
    }
    c.spec = hawkes_spec_from_json(m);
  }
  c.delta = get_double(j, "delta", c.delta);
  c.order = get_int(j, "order", c.order);
  c.reps = get_int(j, "reps", c.reps);
  if (j.contains("base_seed")) c.base_seed = as_seed(j.at("base_seed"), "base_seed");
  if (j.contains("lambda")) c.lambda = lambda_mode_from_json(j.at("lambda"));
  if (j.contains("tau") && !j.at("tau").is_null()) c.tau = as_double(j.at("tau"), "tau");
  if (j.contains("centered")) c.centered = as_bool(j.at("centered"), "centered");
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

Json to_json(const harness::HawkesConfig& c) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["case"] = "hawkes";
  j["reps"] = c.reps;
  j["base_seed"] = c.base_seed;
  j["lambda"] = to_json(c.lambda);
  j["tau"] = c.tau ? number(*c.tau) : Json(nullptr);
  j["centered"] = c.centered;
  j["delta"] = number(c.delta);
  j["order"] = c.order;
  j["model"] = to_json(c.spec);
  return j;
}

Json to_json(const harness::HawkesReport& report) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "hawkes_support_report";
  j["config"] = to_json(report.config);
  Json summary;
  summary["reps"] = static_cast<int>(report.records.size());
  summary["failures"] = report.failures;
  summary["threshold"] = number(report.config.threshold());
  summary["kernel_support"] = number(report.config.spec.kernel_support());
  summary["mean_s_hat"] = number(report.mean_s_hat);
  summary["median_tau_hat"] = number(report.median_tau_hat);
  summary["within_30pct"] = number(report.within_30pct);
  summary["zero_support_fraction"] = number(report.zero_support_fraction);
  summary["lag_counts"] = int_array(report.lag_counts);
  j["summary"] = summary;
  Json records = Json::array();
  for (const auto& r : report.records) {
    Json rec;
    rec["rep"] = r.rep;
    rec["seed"] = r.seed;
    rec["lambda"] = number(r.lambda);
    rec["s_hat"] = r.s_hat;
    rec["tau_hat"] = number(r.tau_hat);
    rec["lags"] = int_array(r.lags);
    rec["failed"] = r.failed;
    if (r.failed) rec["error"] = r.error;
    records.push_back(rec);
  }
  j["records"] = records;
  return j;
}

}  // namespace sparsets::io
