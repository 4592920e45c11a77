#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsets/diagnostics.hpp"
#include "sparsets/procsim.hpp"
#include "sparsets/scorelab.hpp"

namespace sparsets::harness {

enum class CaseId { case1, case2, case3, case4, ou, hawkes, custom };

const char* to_string(CaseId id);
CaseId parse_case_id(const std::string& name);

struct LambdaMode {
  // fixed: lambda = value. rate: lambda = value * sqrt(log p / n_eff).
  // cv: K-fold selection over `grid` when nonempty, otherwise over
  // grid_count log-spaced points in [grid_lo, grid_hi] * ||b||_inf.
  enum class Kind { fixed, cv, rate };

  Kind kind = Kind::cv;
  double value = 0.0;
  std::vector<double> grid;
  int grid_count = 20;
  double grid_lo = 0.01;
  double grid_hi = 1.0;
  int folds = 5;

  void validate() const;
};

const char* to_string(LambdaMode::Kind kind);

enum class ModelKind { inar, minar1, ou };

const char* to_string(ModelKind kind);

struct CaseConfig {
  CaseId case_id = CaseId::case1;
  // Observations used by the fit: series length for count models, number of
  // increments for diffusions.
  int n = 2000;
  // INAR order, or state dimension for the multivariate models.
  int p = 10;
  int reps = 200;
  LambdaMode lambda;
  double tau = 0.05;
  std::uint64_t base_seed = 20240601;
  bool centered = true;
  int hist_bins = 30;

  ModelKind model = ModelKind::inar;
  procsim::InarSpec inar;
  procsim::Minar1Spec minar1;
  procsim::OuSpec ou;
  // Estimated row of the multivariate models.
  int target = 0;

  void validate() const;
};

// Pinned parameters of the built-in scenarios. `n` only sets the default
// length; p follows the case (ou: state dimension, multiple of 4).
CaseConfig builtin_case(CaseId id, int n = 2000);

// A_i block shared by the multivariate count cases and the OU experiment.
Eigen::Matrix4d case_block();

// Truth over the design columns (intercept first when the design has one).
Eigen::VectorXd true_theta(const CaseConfig& config);
// Nonzero truth coordinates; always contains column 0 for intercept designs.
std::vector<int> true_support(const CaseConfig& config);
bool has_intercept(const CaseConfig& config);

// One replication's data in regression form.
scorelab::DesignData simulate_design(const CaseConfig& config, std::uint64_t seed);

// Unit projection vector over the slope coordinates (zero at the intercept),
// components of the raw draw uniform on [-1, 1].
Eigen::VectorXd projection_vector(const CaseConfig& config);

// Lambda for one replication under `mode`.
double choose_lambda(const scorelab::DesignData& data, const LambdaMode& mode, bool centered);

struct RepRecord {
  int rep = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  // Errors on the slope coordinates.
  double linf1 = 0.0;
  double l21 = 0.0;
  bool sel = false;
  double linf2 = 0.0;
  double l22 = 0.0;
  // sqrt(n_eff) u^T (theta_tilde - theta_0) and its plug-in variance.
  double proj_stat = 0.0;
  double proj_var = 0.0;
  int covered = 0;
  int coverage_total = 0;
  Eigen::VectorXd theta_support;  // theta_tilde on the true support
  bool failed = false;
  std::string error;
};

struct CaseSummary {
  int reps = 0;
  int failures = 0;
  int selected = 0;
  // Means over non-failed replications.
  double mean_linf_first = 0.0;
  double mean_l2_first = 0.0;
  double mean_linf_two = 0.0;
  double mean_l2_two = 0.0;
  double mean_lambda = 0.0;
  // selected / reps; failed replications count as unselected.
  double selection_proportion = 0.0;
  // Over replications with exact selection.
  double coverage = 0.0;
  double proj_var_sample = 0.0;
  double proj_var_plugin = 0.0;
  // Normality of theta_tilde on the true support over selected replications:
  // slope coordinates only, then with the intercept column, then slopes over
  // every non-failed replication. One slope column falls back to Shapiro-Wilk.
  std::optional<diagnostics::NormalityReport> royston_selected;
  std::optional<diagnostics::NormalityReport> royston_with_intercept;
  std::optional<diagnostics::NormalityReport> royston_all;
  std::string royston_note;
};

struct CaseReport {
  CaseConfig config;
  Eigen::VectorXd theta_true;
  std::vector<int> support_true;
  Eigen::VectorXd u;
  std::vector<RepRecord> records;  // ordered by rep
  CaseSummary summary;
};

RepRecord run_replication(const CaseConfig& config, const Eigen::VectorXd& u, int rep);

// Replications run on `jobs` workers; records and summary do not depend on it.
CaseReport run_case(const CaseConfig& config, int jobs = 1);

// `intercept` marks column 0 of theta_support as the intercept.
CaseSummary summarize(const std::vector<RepRecord>& records, bool intercept);

struct HawkesConfig {
  procsim::HawkesSpec spec;
  double delta = 0.1;
  int order = 20;
  int reps = 100;
  std::uint64_t base_seed = 20240601;
  LambdaMode lambda;
  // Threshold on the lag coefficients; defaults to delta / 2.
  std::optional<double> tau;
  bool centered = true;

  double threshold() const { return tau.value_or(0.5 * delta); }
  void validate() const;
};

// Kernel 0.8 on (0, 1], baseline 1, horizon 1000.
HawkesConfig default_hawkes_config();

struct HawkesRep {
  int rep = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int s_hat = 0;  // largest selected lag, 0 when none
  double tau_hat = 0.0;
  std::vector<int> lags;
  bool failed = false;
  std::string error;
};

struct HawkesReport {
  HawkesConfig config;
  std::vector<HawkesRep> records;
  int failures = 0;
  double mean_s_hat = 0.0;
  double median_tau_hat = 0.0;
  // Fraction of all replications with |tau_hat - support| <= 0.3 support.
  double within_30pct = 0.0;
  double zero_support_fraction = 0.0;
  // lag_counts[i - 1] = number of replications selecting lag i.
  std::vector<int> lag_counts;
};

HawkesRep run_hawkes_replication(const HawkesConfig& config, int rep);
HawkesReport run_hawkes_support(const HawkesConfig& config, int jobs = 1);

// Equal-width bins over [min, max]; a constant sample gets bins centred on
// the value with unit total width. Empty input writes only the header.
struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  int count = 0;
};
std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins);
void emit_histogram(const std::vector<double>& values, int bins, const std::string& path);

// CSV with columns rep,linf1,l21,sel,linf2,l22,proj_stat,failed.
void write_records_csv(const std::vector<RepRecord>& records, const std::string& path);

}  // namespace sparsets::harness
