#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "sparsets/dantzig.hpp"
#include "sparsets/nuisance.hpp"
#include "sparsets/procsim.hpp"
#include "sparsets/scorelab.hpp"

namespace sparsets::twostep {

struct TwoStepFit {
  dantzig::DantzigFit first_step;
  // Second-step index set: thresholded first step, plus column 0 when the
  // design carries an intercept.
  dantzig::SupportEstimate support;
  Eigen::VectorXd theta_tilde;  // exactly zero off support
  NuisanceEstimate nuisance;
  Eigen::MatrixXd asymp_cov;  // covariance of theta_tilde over support
  std::optional<bool> selection_flag;
  bool empty_model = false;
  double weight_min = 0.0;
  double weight_max = 0.0;
  Eigen::Index floored_rows = 0;
};

struct TwoStepOptions {
  double lambda = 0.0;
  double tau = 0.05;
  bool centered = true;
  double variance_floor = scorelab::kVarianceFloor;
  // The floor actually applied is max(variance_floor, relative_variance_floor
  // * mean fitted variance over the design rows).
  double relative_variance_floor = 0.1;
  // Replaces the estimated nuisance (oracle runs, sigma^2 = 1 plug-ins).
  std::optional<NuisanceEstimate> fixed_nuisance;
  std::optional<std::vector<int>> reference_support;
  dantzig::SolveOptions solver;
};

// Solves (1/n) sum Y Y^T h = (1/n) sum (X_t - theta^T Y)^2 Y on `support`.
NuisanceEstimate estimate_inar_nuisance(const scorelab::DesignData& data,
                                        const dantzig::SupportEstimate& support,
                                        const Eigen::VectorXd& theta_first);
NuisanceEstimate estimate_inar_nuisance(const procsim::SeriesSample& series, int order,
                                        const dantzig::SupportEstimate& support,
                                        const Eigen::VectorXd& theta_first);

// sigma^2 = (1/(n delta)) sum (X_{t_k} - X_{t_{k-1}})^2 on coordinate 0.
NuisanceEstimate estimate_diffusion_sigma2(const procsim::SeriesSample& path);
NuisanceEstimate estimate_diffusion_sigma2(const scorelab::DesignData& data);

// Mean squared residual of theta over the rows of `data`.
NuisanceEstimate estimate_constant_variance(const scorelab::DesignData& data,
                                            const Eigen::VectorXd& theta);

Eigen::VectorXd solve_weighted(const scorelab::WeightedScoreSystem& sys);

TwoStepFit two_step_fit(const scorelab::DesignData& data, const TwoStepOptions& options);

// scale * u^T (theta_tilde - theta_true); u must have unit Euclidean norm.
double project_statistic(const TwoStepFit& fit, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& theta_true, double scale);

// u^T Sigma u over the support, i.e. the plug-in variance of u^T theta_tilde.
double projected_variance(const TwoStepFit& fit, const Eigen::VectorXd& u);

}  // namespace sparsets::twostep
