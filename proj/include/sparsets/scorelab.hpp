#pragma once

#include <Eigen/Dense>

#include <vector>

#include "sparsets/nuisance.hpp"
#include "sparsets/procsim.hpp"

namespace sparsets::scorelab {

enum class ModelTag { regression, inar, diffusion };

const char* to_string(ModelTag tag);

// Regression form shared by every supported model: the score is
// psi(theta) = (1/n) sum_t z_t (y_t - theta^T z_t).
// INAR rows are z_t = (1, X_{t-1}, ..., X_{t-p}), y_t = X_t.
// Diffusion rows are z_t = Y_{t_{k-1}}, y_t = (X_{t_k} - X_{t_{k-1}}) / delta.
struct DesignData {
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  bool has_intercept = false;  // column 0 is identically 1
  ModelTag tag = ModelTag::regression;
  double delta = 1.0;

  Eigen::Index rows() const { return design.rows(); }
  Eigen::Index cols() const { return design.cols(); }
  // Normalizer of the information: n for time series, n * delta for diffusions.
  double information_scale() const {
    return tag == ModelTag::diffusion ? static_cast<double>(rows()) * delta
                                      : static_cast<double>(rows());
  }
};

// psi(theta) = moment - gram * theta.
struct LinearScoreSystem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd moment;
  Eigen::Index n_eff = 0;
  ModelTag model_tag = ModelTag::regression;

  Eigen::Index dim() const { return moment.size(); }
};

// Score over the non-intercept columns after centering design and response.
// The intercept is recovered as response_mean - theta^T column_means.
struct CenteredSystem {
  LinearScoreSystem system;
  Eigen::VectorXd column_means;
  double response_mean = 0.0;

  double intercept_for(const Eigen::VectorXd& slopes) const {
    return response_mean - column_means.dot(slopes);
  }
};

struct WeightedScoreSystem {
  Eigen::MatrixXd gram_w;
  Eigen::VectorXd moment_w;
  std::vector<int> support;
  double weight_min = 0.0;
  double weight_max = 0.0;
  // Rows whose variance was raised to the floor.
  Eigen::Index floored_rows = 0;
  Eigen::Index n_eff = 0;
};

DesignData regression_design(const Eigen::MatrixXd& covariates,
                             const Eigen::VectorXd& responses, bool add_intercept = false);
DesignData inar_design(const procsim::SeriesSample& series, int order);
// Row-wise regression of coordinate `target` of a multivariate count series on
// (1, Y_{t-1}).
DesignData var1_row_design(const procsim::SeriesSample& series, int target);
// `path` holds n+1 samples of X in column 0; covariates has n (or n+1) rows
// aligned at the left endpoints of the increments.
DesignData diffusion_design(const procsim::SeriesSample& path,
                            const Eigen::MatrixXd& covariate_path);
// Drift row `target` of a multivariate diffusion, covariates = full state.
DesignData diffusion_row_design(const procsim::SeriesSample& path, int target);

DesignData select_rows(const DesignData& data, const std::vector<Eigen::Index>& rows);

LinearScoreSystem score_from_design(const DesignData& data);
CenteredSystem centered_score(const DesignData& data);

LinearScoreSystem build_regression_score(const Eigen::MatrixXd& covariates,
                                         const Eigen::VectorXd& responses);
LinearScoreSystem build_inar_score(const procsim::SeriesSample& series, int order);
LinearScoreSystem build_diffusion_score(const procsim::SeriesSample& path,
                                        const Eigen::MatrixXd& covariate_path);

Eigen::VectorXd eval_score(const LinearScoreSystem& sys, const Eigen::VectorXd& theta);

inline constexpr double kVarianceFloor = 1e-8;

// Second-step system over `support` with weights 1 / max(sigma^2(z_t), floor).
WeightedScoreSystem build_weighted_system(const DesignData& data, const std::vector<int>& support,
                                          const twostep::NuisanceEstimate& nuisance,
                                          double variance_floor = kVarianceFloor);

}  // namespace sparsets::scorelab
