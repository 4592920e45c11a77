#include "sparsets/twostep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsets/errors.hpp"

namespace sparsets::twostep {

namespace {

Eigen::MatrixXd restrict_columns(const Eigen::MatrixXd& design, const std::vector<int>& support) {
  Eigen::MatrixXd out(design.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    const int col = support[j];
    if (col < 0 || col >= design.cols()) throw DimensionError("support index out of range");
    out.col(static_cast<Eigen::Index>(j)) = design.col(col);
  }
  return out;
}

Eigen::VectorXd restrict_entries(const Eigen::VectorXd& v, const std::vector<int>& support) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) out[static_cast<Eigen::Index>(j)] = v[support[j]];
  return out;
}

// First-step coefficients on `support`, zero elsewhere. With a centered fit
// the intercept is re-fitted by least squares given the retained slopes.
Eigen::VectorXd selected_first_step(const scorelab::DesignData& data,
                                    const Eigen::VectorXd& theta_hat,
                                    const std::vector<int>& support, bool centered) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(theta_hat.size());
  for (int j : support) out[j] = theta_hat[j];
  if (centered && data.has_intercept) {
    const Eigen::VectorXd means = data.design.colwise().mean().transpose();
    out[0] = data.response.mean() - means.tail(means.size() - 1).dot(out.tail(out.size() - 1));
  }
  return out;
}

double effective_floor(const scorelab::DesignData& data, const NuisanceEstimate& nuisance,
                       const TwoStepOptions& options) {
  if (!(options.variance_floor > 0.0) || !(options.relative_variance_floor >= 0.0)) {
    throw DomainError("variance floors must be positive");
  }
  double mean_variance = 0.0;
  for (Eigen::Index t = 0; t < data.rows(); ++t) mean_variance += nuisance.variance(data.design.row(t));
  mean_variance /= static_cast<double>(std::max<Eigen::Index>(1, data.rows()));
  return std::max(options.variance_floor, options.relative_variance_floor * mean_variance);
}

}  // namespace

NuisanceEstimate estimate_inar_nuisance(const scorelab::DesignData& data,
                                        const dantzig::SupportEstimate& support,
                                        const Eigen::VectorXd& theta_first) {
  if (support.indices.empty()) throw DomainError("nuisance estimation needs a nonempty support");
  if (theta_first.size() != data.cols()) throw DimensionError("theta length must match design width");
  const Eigen::MatrixXd restricted = restrict_columns(data.design, support.indices);
  const Eigen::VectorXd theta_t = restrict_entries(theta_first, support.indices);
  const Eigen::VectorXd residual = data.response - restricted * theta_t;
  const double n = static_cast<double>(data.rows());

  const Eigen::MatrixXd gram = restricted.transpose() * restricted / n;
  const Eigen::VectorXd rhs = restricted.transpose() * residual.array().square().matrix() / n;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
  qr.setThreshold(1e-12);
  if (qr.rank() < gram.rows()) {
    throw RankError("restricted gram for the nuisance equation is singular (rank " +
                    std::to_string(qr.rank()) + " < " + std::to_string(gram.rows()) + ")");
  }
  const Eigen::VectorXd h_t = qr.solve(rhs);

  NuisanceEstimate out;
  out.kind = NuisanceEstimate::Kind::inar_linear_variance;
  out.values = Eigen::VectorXd::Zero(data.cols());
  for (std::size_t j = 0; j < support.indices.size(); ++j) {
    out.values[support.indices[j]] = h_t[static_cast<Eigen::Index>(j)];
  }
  out.support = support.indices;
  return out;
}

NuisanceEstimate estimate_inar_nuisance(const procsim::SeriesSample& series, int order,
                                        const dantzig::SupportEstimate& support,
                                        const Eigen::VectorXd& theta_first) {
  return estimate_inar_nuisance(scorelab::inar_design(series, order), support, theta_first);
}

NuisanceEstimate estimate_diffusion_sigma2(const procsim::SeriesSample& path) {
  if (!path.delta || !(*path.delta > 0.0)) throw DomainError("diffusion path needs a positive delta");
  const auto n = path.length() - 1;
  if (n < 1) throw DimensionError("diffusion path needs at least two samples");
  const auto x = path.values.col(0);
  const double qv = (x.tail(n) - x.head(n)).squaredNorm();
  const double sigma2 = qv / (static_cast<double>(n) * *path.delta);
  if (!(sigma2 > 0.0)) throw NuisanceError("constant path: quadratic variation is zero");
  return NuisanceEstimate::constant(sigma2, NuisanceEstimate::Kind::diffusion_constant_sigma2);
}

NuisanceEstimate estimate_diffusion_sigma2(const scorelab::DesignData& data) {
  if (data.tag != scorelab::ModelTag::diffusion) throw DomainError("design is not a diffusion design");
  // response = increment / delta, so increment^2 / delta = delta * response^2
  const double sigma2 = data.delta * data.response.squaredNorm() / static_cast<double>(data.rows());
  if (!(sigma2 > 0.0)) throw NuisanceError("constant path: quadratic variation is zero");
  return NuisanceEstimate::constant(sigma2, NuisanceEstimate::Kind::diffusion_constant_sigma2);
}

NuisanceEstimate estimate_constant_variance(const scorelab::DesignData& data,
                                            const Eigen::VectorXd& theta) {
  if (theta.size() != data.cols()) throw DimensionError("theta length must match design width");
  const double sigma2 = (data.response - data.design * theta).squaredNorm() /
                        static_cast<double>(data.rows());
  return NuisanceEstimate::constant(sigma2);
}

Eigen::VectorXd solve_weighted(const scorelab::WeightedScoreSystem& sys) {
  const auto s = sys.moment_w.size();
  if (sys.gram_w.rows() != s || sys.gram_w.cols() != s) {
    throw DimensionError("weighted system dimensions disagree");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sys.gram_w);
  if (llt.info() != Eigen::Success) {
    throw RankError("weighted gram is not positive definite");
  }
  Eigen::VectorXd theta = llt.solve(sys.moment_w);
  const double tolerance = 1e-8 * (1.0 + sys.moment_w.lpNorm<Eigen::Infinity>());
  Eigen::VectorXd residual = sys.gram_w * theta - sys.moment_w;
  if (residual.lpNorm<Eigen::Infinity>() > tolerance) {
    theta -= llt.solve(residual);
    residual = sys.gram_w * theta - sys.moment_w;
    if (residual.lpNorm<Eigen::Infinity>() > tolerance) {
      throw RankError("weighted gram is too ill-conditioned for an accurate solve");
    }
  }
  return theta;
}

TwoStepFit two_step_fit(const scorelab::DesignData& data, const TwoStepOptions& options) {
  TwoStepFit out;
  out.first_step = dantzig::fit_first_step(data, options.lambda, options.centered, options.solver);
  if (out.first_step.status != dantzig::FitStatus::optimal) {
    throw NumericError(std::string("first-step Dantzig fit ended with status ") +
                       dantzig::to_string(out.first_step.status));
  }

  out.support = dantzig::threshold_support(out.first_step.theta_hat, options.tau);
  auto& indices = out.support.indices;
  if (data.has_intercept && (indices.empty() || indices.front() != 0)) {
    indices.insert(indices.begin(), 0);
  }
  if (options.reference_support) {
    std::vector<int> reference = *options.reference_support;
    std::sort(reference.begin(), reference.end());
    out.selection_flag = reference == indices;
  }

  out.theta_tilde = Eigen::VectorXd::Zero(data.cols());
  if (indices.empty()) {
    out.empty_model = true;
    out.nuisance = options.fixed_nuisance.value_or(NuisanceEstimate{});
    return out;
  }

  const Eigen::VectorXd theta_sel =
      selected_first_step(data, out.first_step.theta_hat, indices, options.centered);
  if (options.fixed_nuisance) {
    out.nuisance = *options.fixed_nuisance;
  } else {
    switch (data.tag) {
      case scorelab::ModelTag::inar:
        out.nuisance = estimate_inar_nuisance(data, out.support, theta_sel);
        break;
      case scorelab::ModelTag::diffusion:
        out.nuisance = estimate_diffusion_sigma2(data);
        break;
      case scorelab::ModelTag::regression:
        out.nuisance = estimate_constant_variance(data, theta_sel);
        break;
    }
  }

  const scorelab::WeightedScoreSystem weighted = scorelab::build_weighted_system(
      data, indices, out.nuisance, effective_floor(data, out.nuisance, options));
  out.weight_min = weighted.weight_min;
  out.weight_max = weighted.weight_max;
  out.floored_rows = weighted.floored_rows;

  const Eigen::VectorXd theta_t = solve_weighted(weighted);
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out.theta_tilde[indices[j]] = theta_t[static_cast<Eigen::Index>(j)];
  }
  const auto s = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd cov = Eigen::LLT<Eigen::MatrixXd>(weighted.gram_w)
                            .solve(Eigen::MatrixXd::Identity(s, s)) /
                        data.information_scale();
  out.asymp_cov = 0.5 * (cov + cov.transpose());
  return out;
}

double project_statistic(const TwoStepFit& fit, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& theta_true, double scale) {
  if (u.size() != fit.theta_tilde.size() || theta_true.size() != fit.theta_tilde.size()) {
    throw DimensionError("projection vector and truth must match theta length");
  }
  if (std::abs(u.norm() - 1.0) > 1e-12) throw DomainError("projection vector must have unit norm");
  return scale * u.dot(fit.theta_tilde - theta_true);
}

double projected_variance(const TwoStepFit& fit, const Eigen::VectorXd& u) {
  if (u.size() != fit.theta_tilde.size()) throw DimensionError("projection vector length mismatch");
  if (fit.empty_model) return 0.0;
  const Eigen::VectorXd u_t = restrict_entries(u, fit.support.indices);
  return u_t.dot(fit.asymp_cov * u_t);
}

}  // namespace sparsets::twostep
