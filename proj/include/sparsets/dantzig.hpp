#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "sparsets/scorelab.hpp"
#include "sparsets/simplex.hpp"

namespace sparsets::dantzig {

enum class FitStatus { optimal, infeasible, iteration_limit };

const char* to_string(FitStatus status);

struct DantzigFit {
  Eigen::VectorXd theta_hat;
  double lambda = 0.0;
  double l1_objective = 0.0;
  // lambda - ||b - A theta_hat||_inf, measured on the system actually solved.
  double feasibility_slack = 0.0;
  int iterations = 0;
  FitStatus status = FitStatus::infeasible;
};

struct SupportEstimate {
  std::vector<int> indices;  // ascending
  double threshold = 0.0;

  bool operator==(const SupportEstimate& other) const { return indices == other.indices; }
};

struct CvReport {
  std::vector<double> grid;
  std::vector<double> cv_loss;
  double chosen_lambda = 0.0;
  int folds = 0;
};

struct SolveOptions {
  // 0 selects 50 * (4p).
  int max_iterations = 0;
};

// argmin ||theta||_1 subject to ||b - A theta||_inf <= lambda.
DantzigFit solve_dantzig(const scorelab::LinearScoreSystem& sys, double lambda,
                         const SolveOptions& options = {});

// Fits the first step on regression-form data. With `centered` (and an
// intercept column) the Dantzig program runs on the centered slopes and the
// intercept is recovered by least squares; otherwise on the raw system.
// theta_hat always spans every design column.
DantzigFit fit_first_step(const scorelab::DesignData& data, double lambda, bool centered = true,
                          const SolveOptions& options = {});

SupportEstimate threshold_support(const Eigen::VectorXd& theta, double tau);
inline SupportEstimate threshold_support(const DantzigFit& fit, double tau) {
  return threshold_support(fit.theta_hat, tau);
}

// `count` log-spaced values spanning [lo, hi] * ||b||_inf of the system the
// first step would solve.
std::vector<double> default_lambda_grid(const scorelab::DesignData& data, bool centered = true,
                                        int count = 20, double lo = 0.01, double hi = 1.0);
std::vector<double> log_spaced(double lo, double hi, int count);

// Contiguous-block K-fold cross-validation over the rows of `data` (time
// order preserved). Loss is the mean squared one-step-ahead prediction error
// on the held-out block; ties go to the larger lambda.
CvReport cross_validate_lambda(const scorelab::DesignData& data, const std::vector<double>& grid,
                               int folds = 5, bool centered = true,
                               const SolveOptions& options = {});

}  // namespace sparsets::dantzig
