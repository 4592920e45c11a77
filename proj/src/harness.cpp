#include "sparsets/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <thread>

#include "sparsets/dantzig.hpp"
#include "sparsets/errors.hpp"
#include "sparsets/rng.hpp"
#include "sparsets/twostep.hpp"

namespace sparsets::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Stream tag for the projection vector draw; keeps it apart from every rep seed.
constexpr std::uint64_t kProjectionStream = 0x5EEDF00DCAFEBEEFULL;

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  const int workers = std::max(1, std::min(jobs, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Sample variance (n - 1 denominator); NaN below two values.
double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return kNaN;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return kNaN;
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const auto mid = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

Eigen::VectorXd slopes_of(const Eigen::VectorXd& theta, bool intercept) {
  return intercept ? Eigen::VectorXd(theta.tail(theta.size() - 1)) : theta;
}

}  // namespace

const char* to_string(CaseId id) {
  switch (id) {
    case CaseId::case1: return "case1";
    case CaseId::case2: return "case2";
    case CaseId::case3: return "case3";
    case CaseId::case4: return "case4";
    case CaseId::ou: return "ou";
    case CaseId::hawkes: return "hawkes";
    case CaseId::custom: return "custom";
  }
  return "unknown";
}

CaseId parse_case_id(const std::string& name) {
  for (CaseId id : {CaseId::case1, CaseId::case2, CaseId::case3, CaseId::case4, CaseId::ou,
                    CaseId::hawkes, CaseId::custom}) {
    if (name == to_string(id)) return id;
  }
  throw ConfigError("unknown case '" + name + "'");
}

const char* to_string(LambdaMode::Kind kind) {
  switch (kind) {
    case LambdaMode::Kind::fixed: return "fixed";
    case LambdaMode::Kind::cv: return "cv";
    case LambdaMode::Kind::rate: return "rate";
  }
  return "unknown";
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::inar: return "inar";
    case ModelKind::minar1: return "minar1";
    case ModelKind::ou: return "ou";
  }
  return "unknown";
}

void LambdaMode::validate() const {
  switch (kind) {
    case Kind::fixed:
      if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError("fixed lambda must be >= 0");
      break;
    case Kind::rate:
      if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError("rate constant must be > 0");
      break;
    case Kind::cv:
      if (folds < 2) throw ConfigError("cross-validation needs folds >= 2");
      if (grid.empty()) {
        if (grid_count < 1 || !(grid_lo > 0.0) || !(grid_hi >= grid_lo)) {
          throw ConfigError("relative lambda grid needs count >= 1 and 0 < lo <= hi");
        }
      } else {
        for (double g : grid) {
          if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("lambda grid values must be >= 0");
        }
      }
      break;
  }
}

Eigen::Matrix4d case_block() {
  Eigen::Matrix4d a;
  a << 0.3, 0.2, 0.2, 0.2,
       0.2, 0.3, 0.2, 0.2,
       0.0, 0.2, 0.3, 0.2,
       0.0, 0.0, 0.2, 0.3;
  return a;
}

CaseConfig builtin_case(CaseId id, int n) {
  CaseConfig c;
  c.case_id = id;
  c.n = n;
  switch (id) {
    case CaseId::case1:
    case CaseId::case2: {
      c.p = id == CaseId::case1 ? 10 : 20;
      c.model = ModelKind::inar;
      c.inar.mu_eps = 0.5;
      c.inar.alpha = Eigen::VectorXd::Zero(c.p);
      c.inar.alpha.head(4) << 0.3, 0.2, 0.2, 0.2;
      break;
    }
    case CaseId::case3:
    case CaseId::case4: {
      c.p = id == CaseId::case3 ? 100 : 200;
      c.model = ModelKind::minar1;
      c.minar1.eta = Eigen::VectorXd::Constant(c.p, 0.5);
      c.minar1.a_matrix = procsim::block_diagonal(case_block(), c.p / 4);
      break;
    }
    case CaseId::ou: {
      c.p = 20;
      c.model = ModelKind::ou;
      c.centered = false;
      c.ou.a_matrix =
          procsim::block_diagonal(case_block() - Eigen::Matrix4d::Identity(), c.p / 4);
      c.ou.sigma_diag = Eigen::VectorXd::Ones(c.p);
      c.ou.delta = 0.05;
      c.ou.substeps = 10;
      c.lambda.kind = LambdaMode::Kind::rate;
      c.lambda.value = 1.0;
      break;
    }
    case CaseId::hawkes:
      throw ConfigError("the hawkes case is run by hawkes-support");
    case CaseId::custom:
      throw ConfigError("custom cases have no built-in parameters");
  }
  return c;
}

void CaseConfig::validate() const {
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  if (hist_bins < 1) throw ConfigError("hist_bins must be >= 1");
  if (case_id == CaseId::hawkes) throw ConfigError("the hawkes case is run by hawkes-support");
  lambda.validate();
  switch (model) {
    case ModelKind::inar:
      inar.validate();
      if (inar.alpha.size() != p) throw ConfigError("p must equal the INAR order");
      break;
    case ModelKind::minar1:
      minar1.validate();
      if (minar1.eta.size() != p) throw ConfigError("p must equal the INAR(1) dimension");
      if (target < 0 || target >= p) throw ConfigError("target row out of range");
      break;
    case ModelKind::ou:
      ou.validate();
      if (ou.a_matrix.rows() != p) throw ConfigError("p must equal the OU dimension");
      if (target < 0 || target >= p) throw ConfigError("target row out of range");
      break;
  }
  if (lambda.kind == LambdaMode::Kind::cv && n < 2 * lambda.folds) {
    throw ConfigError("n is too small for the requested number of folds");
  }
}

bool has_intercept(const CaseConfig& config) { return config.model != ModelKind::ou; }

Eigen::VectorXd true_theta(const CaseConfig& config) {
  switch (config.model) {
    case ModelKind::inar: {
      Eigen::VectorXd theta(config.p + 1);
      theta << config.inar.mu_eps, config.inar.alpha;
      return theta;
    }
    case ModelKind::minar1: {
      Eigen::VectorXd theta(config.p + 1);
      theta << config.minar1.eta[config.target],
          config.minar1.a_matrix.row(config.target).transpose();
      return theta;
    }
    case ModelKind::ou:
      return config.ou.a_matrix.row(config.target).transpose();
  }
  return {};
}

std::vector<int> true_support(const CaseConfig& config) {
  const Eigen::VectorXd theta = true_theta(config);
  const bool intercept = has_intercept(config);
  std::vector<int> out;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if ((intercept && j == 0) || theta[j] != 0.0) out.push_back(static_cast<int>(j));
  }
  return out;
}

scorelab::DesignData simulate_design(const CaseConfig& config, std::uint64_t seed) {
  switch (config.model) {
    case ModelKind::inar:
      return scorelab::inar_design(procsim::simulate_inar(config.inar, config.n, seed), config.p);
    case ModelKind::minar1:
      return scorelab::var1_row_design(procsim::simulate_minar1(config.minar1, config.n, seed),
                                       config.target);
    case ModelKind::ou: {
      procsim::OuSpec spec = config.ou;
      spec.n_steps = config.n;
      return scorelab::diffusion_row_design(procsim::simulate_ou(spec, seed), config.target);
    }
  }
  throw ConfigError("unsupported model");
}

Eigen::VectorXd projection_vector(const CaseConfig& config) {
  const bool intercept = has_intercept(config);
  const auto width = static_cast<Eigen::Index>(config.p + (intercept ? 1 : 0));
  Xoshiro256pp rng(config.base_seed ^ kProjectionStream);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(width);
  for (Eigen::Index j = intercept ? 1 : 0; j < width; ++j) u[j] = 2.0 * rng.uniform() - 1.0;
  return u / u.norm();
}

double choose_lambda(const scorelab::DesignData& data, const LambdaMode& mode, bool centered) {
  switch (mode.kind) {
    case LambdaMode::Kind::fixed:
      return mode.value;
    case LambdaMode::Kind::rate: {
      const double p = static_cast<double>(data.cols() - (data.has_intercept ? 1 : 0));
      return mode.value * std::sqrt(std::log(std::max(p, 2.0)) / data.information_scale());
    }
    case LambdaMode::Kind::cv: {
      std::vector<double> grid = mode.grid;
      if (grid.empty()) {
        grid = dantzig::default_lambda_grid(data, centered, mode.grid_count, mode.grid_lo,
                                            mode.grid_hi);
      } else {
        std::sort(grid.begin(), grid.end());
      }
      return dantzig::cross_validate_lambda(data, grid, mode.folds, centered).chosen_lambda;
    }
  }
  return 0.0;
}

RepRecord run_replication(const CaseConfig& config, const Eigen::VectorXd& u, int rep) {
  RepRecord rec;
  rec.rep = rep;
  rec.seed = derive_seed(config.base_seed, static_cast<std::uint64_t>(rep));
  const bool intercept = has_intercept(config);
  const Eigen::VectorXd theta0 = true_theta(config);
  const std::vector<int> support0 = true_support(config);
  try {
    const scorelab::DesignData data = simulate_design(config, rec.seed);
    rec.lambda = choose_lambda(data, config.lambda, config.centered);

    twostep::TwoStepOptions options;
    options.lambda = rec.lambda;
    options.tau = config.tau;
    options.centered = config.centered;
    options.reference_support = support0;
    const twostep::TwoStepFit fit = twostep::two_step_fit(data, options);

    const Eigen::VectorXd truth = slopes_of(theta0, intercept);
    const auto first = diagnostics::selection_and_errors(
        slopes_of(fit.first_step.theta_hat, intercept), truth, {}, {});
    const auto second =
        diagnostics::selection_and_errors(slopes_of(fit.theta_tilde, intercept), truth, {}, {});
    rec.linf1 = first.linf_error;
    rec.l21 = first.l2_error;
    rec.linf2 = second.linf_error;
    rec.l22 = second.l2_error;
    rec.sel = fit.selection_flag.value_or(false);

    const double scale = std::sqrt(data.information_scale());
    rec.proj_stat = twostep::project_statistic(fit, u, theta0, scale);
    rec.proj_var = scale * scale * twostep::projected_variance(fit, u);

    rec.theta_support.resize(static_cast<Eigen::Index>(support0.size()));
    for (std::size_t k = 0; k < support0.size(); ++k) {
      rec.theta_support[static_cast<Eigen::Index>(k)] = fit.theta_tilde[support0[k]];
    }
    if (rec.sel) {
      // Support equals the true support, so asymp_cov is indexed like support0.
      for (std::size_t k = 0; k < support0.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double half = 1.959963984540054 * std::sqrt(std::max(0.0, fit.asymp_cov(kk, kk)));
        rec.covered += std::abs(fit.theta_tilde[support0[k]] - theta0[support0[k]]) <= half ? 1 : 0;
        ++rec.coverage_total;
      }
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.sel = false;
    rec.error = e.what();
    rec.linf1 = rec.l21 = rec.linf2 = rec.l22 = kNaN;
    rec.proj_stat = rec.proj_var = kNaN;
    rec.covered = rec.coverage_total = 0;
    rec.theta_support.resize(0);
  }
  return rec;
}

CaseSummary summarize(const std::vector<RepRecord>& records, bool intercept) {
  CaseSummary s;
  s.reps = static_cast<int>(records.size());
  std::vector<double> linf1, l21, linf2, l22, lambdas, stats_sel, vars_sel;
  std::vector<const RepRecord*> ok;
  std::vector<const RepRecord*> selected;
  int covered = 0;
  int total = 0;
  for (const RepRecord& r : records) {
    if (r.failed) {
      ++s.failures;
      continue;
    }
    ok.push_back(&r);
    linf1.push_back(r.linf1);
    l21.push_back(r.l21);
    linf2.push_back(r.linf2);
    l22.push_back(r.l22);
    lambdas.push_back(r.lambda);
    if (r.sel) {
      selected.push_back(&r);
      stats_sel.push_back(r.proj_stat);
      vars_sel.push_back(r.proj_var);
      covered += r.covered;
      total += r.coverage_total;
    }
  }
  s.selected = static_cast<int>(selected.size());
  s.mean_linf_first = mean_of(linf1);
  s.mean_l2_first = mean_of(l21);
  s.mean_linf_two = mean_of(linf2);
  s.mean_l2_two = mean_of(l22);
  s.mean_lambda = mean_of(lambdas);
  s.selection_proportion = s.reps > 0 ? static_cast<double>(s.selected) / s.reps : 0.0;
  s.coverage = total > 0 ? static_cast<double>(covered) / total : kNaN;
  s.proj_var_sample = sample_variance(stats_sel);
  s.proj_var_plugin = mean_of(vars_sel);

  auto royston = [&](const std::vector<const RepRecord*>& rows, Eigen::Index first,
                     const char* label) -> std::optional<diagnostics::NormalityReport> {
    if (rows.empty()) return std::nullopt;
    const auto d = rows.front()->theta_support.size() - first;
    if (d < 1) return std::nullopt;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m.row(static_cast<Eigen::Index>(i)) = rows[i]->theta_support.tail(d).transpose();
    }
    try {
      if (d == 1) return diagnostics::shapiro_wilk(m.col(0));
      return diagnostics::royston_test(m);
    } catch (const std::exception& e) {
      if (!s.royston_note.empty()) s.royston_note += "; ";
      s.royston_note += std::string(label) + ": " + e.what();
      return std::nullopt;
    }
  };
  const Eigen::Index first = intercept ? 1 : 0;
  s.royston_selected = royston(selected, first, "selected");
  if (intercept) s.royston_with_intercept = royston(selected, 0, "with_intercept");
  s.royston_all = royston(ok, first, "all");
  return s;
}

CaseReport run_case(const CaseConfig& config, int jobs) {
  config.validate();
  CaseReport report;
  report.config = config;
  report.theta_true = true_theta(config);
  report.support_true = true_support(config);
  report.u = projection_vector(config);
  report.records.resize(static_cast<std::size_t>(config.reps));
  parallel_for(config.reps, jobs, [&](int r) {
    report.records[static_cast<std::size_t>(r)] = run_replication(config, report.u, r);
  });
  report.summary = summarize(report.records, has_intercept(config));
  return report;
}

void HawkesConfig::validate() const {
  spec.validate();
  if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
  if (order < 1) throw ConfigError("order must be >= 1");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (!(threshold() >= 0.0)) throw ConfigError("tau must be >= 0");
  lambda.validate();
  const int needed = static_cast<int>(std::ceil(spec.kernel_support() / delta - 1e-9));
  if (order < needed) {
    throw ConfigError("order " + std::to_string(order) + " cannot reach the kernel support; need >= " +
                      std::to_string(needed));
  }
  const auto bins = static_cast<int>(std::ceil(spec.horizon / delta - 1e-9));
  if (bins - order < 2 * lambda.folds) throw ConfigError("horizon too short for delta and order");
}

HawkesConfig default_hawkes_config() {
  HawkesConfig c;
  c.spec.eta = 1.0;
  c.spec.breakpoints = {0.0, 1.0};
  c.spec.values = {0.8};
  c.spec.horizon = 1000.0;
  return c;
}

HawkesRep run_hawkes_replication(const HawkesConfig& config, int rep) {
  HawkesRep rec;
  rec.rep = rep;
  rec.seed = derive_seed(config.base_seed, static_cast<std::uint64_t>(rep));
  try {
    const auto events = procsim::simulate_hawkes(config.spec, rec.seed);
    const procsim::SeriesSample binned =
        procsim::bin_counts(events, config.delta, config.spec.horizon);
    // The first `order` bins serve as the lag buffer.
    procsim::SeriesSample series;
    series.kind = procsim::SeriesKind::counts;
    series.delta = config.delta;
    series.lag_buffer = binned.values.topRows(config.order);
    series.values = binned.values.bottomRows(binned.length() - config.order);
    const scorelab::DesignData data = scorelab::inar_design(series, config.order);

    rec.lambda = choose_lambda(data, config.lambda, config.centered);
    const dantzig::DantzigFit fit = dantzig::fit_first_step(data, rec.lambda, config.centered);
    if (fit.status != dantzig::FitStatus::optimal) {
      throw NumericError(std::string("Dantzig fit ended with status ") + dantzig::to_string(fit.status));
    }
    const auto support = dantzig::threshold_support(fit, config.threshold());
    for (int j : support.indices) {
      if (j > 0) rec.lags.push_back(j);
    }
    rec.s_hat = rec.lags.empty() ? 0 : rec.lags.back();
    rec.tau_hat = rec.s_hat * config.delta;
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.lags.clear();
    rec.s_hat = 0;
    rec.tau_hat = kNaN;
  }
  return rec;
}

HawkesReport run_hawkes_support(const HawkesConfig& config, int jobs) {
  config.validate();
  HawkesReport report;
  report.config = config;
  report.records.resize(static_cast<std::size_t>(config.reps));
  parallel_for(config.reps, jobs, [&](int r) {
    report.records[static_cast<std::size_t>(r)] = run_hawkes_replication(config, r);
  });

  report.lag_counts.assign(static_cast<std::size_t>(config.order), 0);
  const double support = config.spec.kernel_support();
  std::vector<double> s_hats, tau_hats;
  int within = 0;
  int zero = 0;
  for (const HawkesRep& r : report.records) {
    if (r.failed) {
      ++report.failures;
      continue;
    }
    s_hats.push_back(r.s_hat);
    tau_hats.push_back(r.tau_hat);
    if (r.s_hat == 0) ++zero;
    if (std::abs(r.tau_hat - support) <= 0.3 * support + 1e-12) ++within;
    for (int lag : r.lags) ++report.lag_counts[static_cast<std::size_t>(lag - 1)];
  }
  const double reps = static_cast<double>(config.reps);
  report.mean_s_hat = mean_of(s_hats);
  report.median_tau_hat = median_of(tau_hats);
  report.within_30pct = within / reps;
  report.zero_support_fraction = zero / reps;
  return report;
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  std::vector<HistogramBin> out;
  if (values.empty()) return out;
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError("histogram input contains non-finite values");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  out.resize(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) {
    out[static_cast<std::size_t>(k)].left = lo + k * width;
    out[static_cast<std::size_t>(k)].right = k + 1 == bins ? hi : lo + (k + 1) * width;
  }
  for (double v : values) {
    auto k = static_cast<int>(std::floor((v - lo) / width));
    k = std::clamp(k, 0, bins - 1);
    ++out[static_cast<std::size_t>(k)].count;
  }
  return out;
}

void emit_histogram(const std::vector<double>& values, int bins, const std::string& path) {
  const auto table = histogram(values, bins);
  std::ofstream os(path);
  if (!os) throw Error("cannot open histogram file: " + path);
  os << std::setprecision(17);
  os << "bin_left,bin_right,count\n";
  for (const auto& b : table) os << b.left << ',' << b.right << ',' << b.count << '\n';
  if (!os) throw Error("failed writing histogram file: " + path);
}

void write_records_csv(const std::vector<RepRecord>& records, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open records file: " + path);
  os << std::setprecision(17);
  os << "rep,linf1,l21,sel,linf2,l22,proj_stat,failed\n";
  auto num = [&](double v) -> std::ostream& {
    if (std::isfinite(v)) os << v;
    else os << "nan";
    return os;
  };
  for (const auto& r : records) {
    os << r.rep << ',';
    num(r.linf1) << ',';
    num(r.l21) << ',' << (r.sel ? 1 : 0) << ',';
    num(r.linf2) << ',';
    num(r.l22) << ',';
    num(r.proj_stat) << ',' << (r.failed ? 1 : 0) << '\n';
  }
  if (!os) throw Error("failed writing records file: " + path);
}

}  // namespace sparsets::harness
