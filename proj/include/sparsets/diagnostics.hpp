#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace sparsets::diagnostics {

struct FInftyEstimate {
  enum class Method { cone_sampling, grid_oracle };

  // For cone_sampling an upper bound on the infimum (a found minimum).
  double value = 0.0;
  Method method = Method::cone_sampling;
  int samples = 0;
  std::vector<int> support;
};

const char* to_string(FInftyEstimate::Method method);

// inf over v in the cone {||v_{T^c}||_1 <= ||v_T||_1}, v != 0, of
// |v^T M v| / (||v_T||_1 ||v||_inf), searched by random cone directions.
// For positive semidefinite M the sign cell of v_T hit by each draw is
// minimized exactly (once per cell); otherwise random local refinement runs
// around every new running minimum. The value is always the ratio of a cone
// member and, for a fixed seed, nonincreasing in n_samples.
FInftyEstimate estimate_f_infinity(const Eigen::MatrixXd& m, const std::vector<int>& support,
                                   int n_samples, std::uint64_t seed, int refine_steps = 40);

// Exhaustive search over a uniform grid of the cube [-1, 1]^p (p <= 3).
FInftyEstimate f_infinity_grid(const Eigen::MatrixXd& m, const std::vector<int>& support,
                               int resolution = 401);

struct NormalityReport {
  enum class Test { shapiro_wilk, royston_h };

  double statistic = 0.0;
  double p_value = 1.0;
  Test test = Test::shapiro_wilk;
  int dimension = 1;
  int n = 0;
  // Royston only: equivalent degrees of freedom of the chi-square reference.
  double degrees_of_freedom = 0.0;
};

const char* to_string(NormalityReport::Test test);

// Shapiro-Wilk W with Royston's (1995) coefficient and p-value
// approximations; valid for 3 <= n <= 5000.
NormalityReport shapiro_wilk(const Eigen::VectorXd& sample);

// Royston's H test of multivariate normality on the rows of `sample`.
NormalityReport royston_test(const Eigen::MatrixXd& sample);

struct MetricRecord {
  double linf_error = 0.0;
  double l2_error = 0.0;
  bool exact_support = false;
};

MetricRecord selection_and_errors(const Eigen::VectorXd& theta_est,
                                  const Eigen::VectorXd& theta_true,
                                  const std::vector<int>& support_est,
                                  const std::vector<int>& support_true);

}  // namespace sparsets::diagnostics
