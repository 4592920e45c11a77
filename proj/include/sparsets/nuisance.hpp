#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sparsets::twostep {

// Plug-in conditional-variance model used to weight the second step.
struct NuisanceEstimate {
  enum class Kind {
    // sigma^2(Y) = h^T Y over the design row (INAR / count regression).
    inar_linear_variance,
    // sigma^2 constant, from the quadratic variation of the increments.
    diffusion_constant_sigma2,
    // sigma^2 constant, from mean squared residuals (plain regression).
    constant_variance,
  };

  Kind kind = Kind::constant_variance;
  // Linear kind: h over all design columns, zero off `support`.
  // Constant kinds: a single entry holding sigma^2.
  Eigen::VectorXd values;
  std::vector<int> support;

  double variance(const Eigen::Ref<const Eigen::RowVectorXd>& design_row) const {
    if (kind == Kind::inar_linear_variance) return design_row.dot(values);
    return values[0];
  }

  static NuisanceEstimate constant(double sigma2, Kind kind = Kind::constant_variance) {
    NuisanceEstimate out;
    out.kind = kind;
    out.values = Eigen::VectorXd::Constant(1, sigma2);
    return out;
  }
};

const char* to_string(NuisanceEstimate::Kind kind);

}  // namespace sparsets::twostep
