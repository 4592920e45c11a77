#include "sparsets/scorelab.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sparsets/errors.hpp"

namespace sparsets {

const char* twostep::to_string(twostep::NuisanceEstimate::Kind kind) {
  switch (kind) {
    case twostep::NuisanceEstimate::Kind::inar_linear_variance: return "inar_linear_variance";
    case twostep::NuisanceEstimate::Kind::diffusion_constant_sigma2: return "diffusion_constant_sigma2";
    case twostep::NuisanceEstimate::Kind::constant_variance: return "constant_variance";
  }
  return "unknown";
}

namespace scorelab {

const char* to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::regression: return "regression";
    case ModelTag::inar: return "inar";
    case ModelTag::diffusion: return "diffusion";
  }
  return "unknown";
}

namespace {

Eigen::MatrixXd symmetric_gram(const Eigen::MatrixXd& design) {
  const auto n = static_cast<double>(design.rows());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(design.cols(), design.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose(), 1.0 / n);
  return gram.selfadjointView<Eigen::Lower>();
}

}  // namespace

DesignData regression_design(const Eigen::MatrixXd& covariates,
                             const Eigen::VectorXd& responses, bool add_intercept) {
  if (covariates.rows() != responses.size()) {
    throw DimensionError("covariates have " + std::to_string(covariates.rows()) +
                         " rows but responses have " + std::to_string(responses.size()));
  }
  if (covariates.rows() < 1) throw DimensionError("regression needs at least one observation");
  DesignData out;
  out.tag = ModelTag::regression;
  out.response = responses;
  if (add_intercept) {
    out.design.resize(covariates.rows(), covariates.cols() + 1);
    out.design.col(0).setOnes();
    out.design.rightCols(covariates.cols()) = covariates;
    out.has_intercept = true;
  } else {
    out.design = covariates;
  }
  return out;
}

DesignData inar_design(const procsim::SeriesSample& series, int order) {
  if (order < 1) throw DomainError("INAR order must be positive");
  if (series.kind != procsim::SeriesKind::counts) {
    throw DomainError("INAR score requires a count series");
  }
  if (series.dim() != 1) throw DimensionError("INAR score requires a univariate series");
  if (series.lag_buffer.rows() < order) {
    throw DimensionError("lag buffer holds " + std::to_string(series.lag_buffer.rows()) +
                         " values but order " + std::to_string(order) + " was requested");
  }
  const auto n = series.length();
  if (n < 1) throw DimensionError("empty series");
  // full[k] = X_{k - order + 1}, so X_t for t = 1..n sits at full[t + order - 1].
  Eigen::VectorXd full(order + n);
  full.head(order) = series.lag_buffer.col(0).tail(order);
  full.tail(n) = series.values.col(0);

  DesignData out;
  out.tag = ModelTag::inar;
  out.has_intercept = true;
  out.design.resize(n, order + 1);
  out.response = series.values.col(0);
  out.design.col(0).setOnes();
  for (Eigen::Index t = 0; t < n; ++t) {
    for (int i = 1; i <= order; ++i) out.design(t, i) = full[t + order - i];
  }
  return out;
}

DesignData var1_row_design(const procsim::SeriesSample& series, int target) {
  const auto p = series.dim();
  if (target < 0 || target >= p) throw DimensionError("target coordinate out of range");
  if (series.lag_buffer.rows() < 1 || series.lag_buffer.cols() != p) {
    throw DimensionError("row-wise VAR(1) design needs a one-row lag buffer");
  }
  const auto n = series.length();
  DesignData out;
  out.tag = ModelTag::inar;
  out.has_intercept = true;
  out.design.resize(n, p + 1);
  out.design.col(0).setOnes();
  out.design.block(0, 1, 1, p) = series.lag_buffer.bottomRows(1);
  if (n > 1) out.design.block(1, 1, n - 1, p) = series.values.topRows(n - 1);
  out.response = series.values.col(target);
  return out;
}

DesignData diffusion_design(const procsim::SeriesSample& path,
                            const Eigen::MatrixXd& covariate_path) {
  if (!path.delta || !(*path.delta > 0.0)) {
    throw DomainError("diffusion score requires a positive sampling interval");
  }
  const auto n = path.length() - 1;
  if (n < 1) throw DimensionError("diffusion path needs at least two samples");
  if (covariate_path.rows() != n && covariate_path.rows() != n + 1) {
    throw DimensionError("covariate path must have n or n+1 rows for n increments");
  }
  DesignData out;
  out.tag = ModelTag::diffusion;
  out.delta = *path.delta;
  out.design = covariate_path.topRows(n);
  const auto x = path.values.col(0);
  out.response = (x.tail(n) - x.head(n)) / out.delta;
  return out;
}

DesignData diffusion_row_design(const procsim::SeriesSample& path, int target) {
  if (target < 0 || target >= path.dim()) throw DimensionError("target coordinate out of range");
  procsim::SeriesSample row = path;
  row.values = path.values.col(target);
  return diffusion_design(row, path.values);
}

DesignData select_rows(const DesignData& data, const std::vector<Eigen::Index>& rows) {
  DesignData out;
  out.has_intercept = data.has_intercept;
  out.tag = data.tag;
  out.delta = data.delta;
  out.design.resize(static_cast<Eigen::Index>(rows.size()), data.cols());
  out.response.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    if (r < 0 || r >= data.rows()) throw DimensionError("row index out of range");
    out.design.row(static_cast<Eigen::Index>(i)) = data.design.row(r);
    out.response[static_cast<Eigen::Index>(i)] = data.response[r];
  }
  return out;
}

LinearScoreSystem score_from_design(const DesignData& data) {
  if (data.rows() != data.response.size()) throw DimensionError("design/response length mismatch");
  if (data.rows() < 1) throw DimensionError("empty design");
  LinearScoreSystem sys;
  sys.gram = symmetric_gram(data.design);
  sys.moment = data.design.transpose() * data.response / static_cast<double>(data.rows());
  sys.n_eff = data.rows();
  sys.model_tag = data.tag;
  return sys;
}

CenteredSystem centered_score(const DesignData& data) {
  if (!data.has_intercept) throw DomainError("centering requires an intercept column");
  if (data.rows() < 1) throw DimensionError("empty design");
  const auto q = data.cols() - 1;
  CenteredSystem out;
  out.column_means = data.design.rightCols(q).colwise().mean().transpose();
  out.response_mean = data.response.mean();
  const Eigen::MatrixXd centered = data.design.rightCols(q).rowwise() - out.column_means.transpose();
  const Eigen::VectorXd y = data.response.array() - out.response_mean;
  out.system.gram = symmetric_gram(centered);
  out.system.moment = centered.transpose() * y / static_cast<double>(data.rows());
  out.system.n_eff = data.rows();
  out.system.model_tag = data.tag;
  return out;
}

LinearScoreSystem build_regression_score(const Eigen::MatrixXd& covariates,
                                         const Eigen::VectorXd& responses) {
  return score_from_design(regression_design(covariates, responses));
}

LinearScoreSystem build_inar_score(const procsim::SeriesSample& series, int order) {
  return score_from_design(inar_design(series, order));
}

LinearScoreSystem build_diffusion_score(const procsim::SeriesSample& path,
                                        const Eigen::MatrixXd& covariate_path) {
  return score_from_design(diffusion_design(path, covariate_path));
}

Eigen::VectorXd eval_score(const LinearScoreSystem& sys, const Eigen::VectorXd& theta) {
  if (theta.size() != sys.dim()) {
    throw DimensionError("theta has length " + std::to_string(theta.size()) +
                         ", score system has dimension " + std::to_string(sys.dim()));
  }
  return sys.moment - sys.gram * theta;
}

WeightedScoreSystem build_weighted_system(const DesignData& data, const std::vector<int>& support,
                                          const twostep::NuisanceEstimate& nuisance,
                                          double variance_floor) {
  if (support.empty()) throw DomainError("weighted system needs a nonempty support");
  if (!(variance_floor > 0.0)) throw NuisanceError("variance floor must be positive");
  if (nuisance.kind == twostep::NuisanceEstimate::Kind::inar_linear_variance &&
      nuisance.values.size() != data.cols()) {
    throw DimensionError("linear variance vector does not match design width");
  }
  const auto n = data.rows();
  const auto s = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd restricted(n, s);
  for (Eigen::Index j = 0; j < s; ++j) {
    const int col = support[static_cast<std::size_t>(j)];
    if (col < 0 || col >= data.cols()) throw DimensionError("support index out of range");
    restricted.col(j) = data.design.col(col);
  }

  WeightedScoreSystem out;
  out.support = support;
  out.n_eff = n;
  Eigen::VectorXd weights(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double variance = nuisance.variance(data.design.row(t));
    if (!std::isfinite(variance)) throw NuisanceError("non-finite plug-in variance");
    if (variance < variance_floor) {
      variance = variance_floor;
      ++out.floored_rows;
    }
    weights[t] = 1.0 / variance;
  }
  out.weight_min = weights.minCoeff();
  out.weight_max = weights.maxCoeff();

  const Eigen::MatrixXd scaled = restricted.array().colwise() * weights.array().sqrt();
  out.gram_w = symmetric_gram(scaled);
  out.moment_w = restricted.transpose() * weights.cwiseProduct(data.response) /
                 static_cast<double>(n);
  return out;
}

}  // namespace scorelab
}  // namespace sparsets
