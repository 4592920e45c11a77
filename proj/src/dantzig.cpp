#include "sparsets/dantzig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sparsets/errors.hpp"

namespace sparsets::dantzig {

const char* to_string(FitStatus status) {
  switch (status) {
    case FitStatus::optimal: return "optimal";
    case FitStatus::infeasible: return "infeasible";
    case FitStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

DantzigFit solve_dantzig(const scorelab::LinearScoreSystem& sys, double lambda,
                         const SolveOptions& options) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be a finite nonnegative number");
  }
  const auto p = sys.dim();
  if (sys.gram.rows() != p || sys.gram.cols() != p) {
    throw DimensionError("score system gram/moment dimensions disagree");
  }

  // theta = u - v with u, v >= 0; the two row blocks encode
  // -lambda <= b - A theta <= lambda.
  Eigen::MatrixXd constraints(2 * p, 2 * p);
  constraints << sys.gram, -sys.gram, -sys.gram, sys.gram;
  Eigen::VectorXd bounds(2 * p);
  bounds << sys.moment.array() + lambda, lambda - sys.moment.array();
  const Eigen::VectorXd cost = Eigen::VectorXd::Ones(2 * p);

  lp::LpOptions lp_options;
  lp_options.max_iterations =
      options.max_iterations > 0 ? options.max_iterations : static_cast<int>(50 * 4 * p);
  const lp::LpResult result = lp::solve_lp(cost, constraints, bounds, lp_options);

  DantzigFit fit;
  fit.lambda = lambda;
  fit.iterations = result.iterations;
  switch (result.status) {
    case lp::LpStatus::optimal: fit.status = FitStatus::optimal; break;
    case lp::LpStatus::infeasible: fit.status = FitStatus::infeasible; break;
    case lp::LpStatus::iteration_limit: fit.status = FitStatus::iteration_limit; break;
    case lp::LpStatus::unbounded:
      throw NumericError("Dantzig LP reported unbounded; the l1 objective is bounded below");
  }
  fit.theta_hat = result.x.head(p) - result.x.tail(p);
  fit.l1_objective = fit.theta_hat.lpNorm<1>();
  const Eigen::VectorXd residual = scorelab::eval_score(sys, fit.theta_hat);
  fit.feasibility_slack = lambda - (p > 0 ? residual.lpNorm<Eigen::Infinity>() : 0.0);
  return fit;
}

namespace {

DantzigFit fit_centered(const scorelab::CenteredSystem& centered, double lambda,
                        const SolveOptions& options) {
  DantzigFit fit = solve_dantzig(centered.system, lambda, options);
  const Eigen::VectorXd slopes = fit.theta_hat;
  fit.theta_hat.resize(slopes.size() + 1);
  fit.theta_hat[0] = centered.intercept_for(slopes);
  fit.theta_hat.tail(slopes.size()) = slopes;
  return fit;
}

bool use_centering(const scorelab::DesignData& data, bool centered) {
  return centered && data.has_intercept;
}

}  // namespace

DantzigFit fit_first_step(const scorelab::DesignData& data, double lambda, bool centered,
                          const SolveOptions& options) {
  if (use_centering(data, centered)) {
    return fit_centered(scorelab::centered_score(data), lambda, options);
  }
  return solve_dantzig(scorelab::score_from_design(data), lambda, options);
}

SupportEstimate threshold_support(const Eigen::VectorXd& theta, double tau) {
  if (!(tau >= 0.0)) throw DomainError("threshold must be nonnegative");
  SupportEstimate out;
  out.threshold = tau;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (std::abs(theta[j]) > tau) out.indices.push_back(static_cast<int>(j));
  }
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw DomainError("log_spaced needs count >= 1 and 0 < lo <= hi");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (std::log(hi) - std::log(lo)) / (count - 1);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = std::exp(std::log(lo) + k * step);
  out.back() = hi;
  return out;
}

std::vector<double> default_lambda_grid(const scorelab::DesignData& data, bool centered, int count,
                                        double lo, double hi) {
  const Eigen::VectorXd moment = use_centering(data, centered)
                                     ? scorelab::centered_score(data).system.moment
                                     : scorelab::score_from_design(data).moment;
  double scale = moment.size() > 0 ? moment.lpNorm<Eigen::Infinity>() : 0.0;
  if (!(scale > 0.0)) scale = 1.0;
  return log_spaced(lo * scale, hi * scale, count);
}

CvReport cross_validate_lambda(const scorelab::DesignData& data, const std::vector<double>& grid,
                               int folds, bool centered, const SolveOptions& options) {
  if (grid.empty()) throw DomainError("cross-validation grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw DomainError("cross-validation grid must be sorted ascending");
  }
  if (folds < 2) throw DomainError("cross-validation needs at least two folds");
  const auto n = data.rows();
  if (n < 2 * folds) {
    throw DomainError("series of length " + std::to_string(n) + " is too short for " +
                      std::to_string(folds) + " folds");
  }

  CvReport report;
  report.grid = grid;
  report.folds = folds;
  report.cv_loss.assign(grid.size(), 0.0);
  const bool center = use_centering(data, centered);

  for (int k = 0; k < folds; ++k) {
    const Eigen::Index begin = n * k / folds;
    const Eigen::Index end = n * (k + 1) / folds;
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> test_rows;
    train_rows.reserve(static_cast<std::size_t>(n - (end - begin)));
    for (Eigen::Index r = 0; r < n; ++r) {
      (r >= begin && r < end ? test_rows : train_rows).push_back(r);
    }
    const scorelab::DesignData train = scorelab::select_rows(data, train_rows);
    const scorelab::DesignData test = scorelab::select_rows(data, test_rows);

    std::optional<scorelab::CenteredSystem> centered_sys;
    std::optional<scorelab::LinearScoreSystem> raw_sys;
    if (center) centered_sys = scorelab::centered_score(train);
    else raw_sys = scorelab::score_from_design(train);

    for (std::size_t g = 0; g < grid.size(); ++g) {
      const DantzigFit fit = center ? fit_centered(*centered_sys, grid[g], options)
                                    : solve_dantzig(*raw_sys, grid[g], options);
      double loss = std::numeric_limits<double>::infinity();
      if (fit.status == FitStatus::optimal) {
        loss = (test.response - test.design * fit.theta_hat).squaredNorm() /
               static_cast<double>(test.rows());
      }
      report.cv_loss[g] += loss / folds;
    }
  }

  const double best = *std::min_element(report.cv_loss.begin(), report.cv_loss.end());
  if (!std::isfinite(best)) throw NumericError("no grid value produced a feasible fit in every fold");
  const double tie = 1e-12 * std::max(1.0, std::abs(best));
  for (std::size_t g = grid.size(); g-- > 0;) {
    if (report.cv_loss[g] <= best + tie) {
      report.chosen_lambda = grid[g];
      break;
    }
  }
  return report;
}

}  // namespace sparsets::dantzig
