#include <doctest.h>

#include <cmath>
#include <random>

#include "sparsets/errors.hpp"
#include "sparsets/harness.hpp"
#include "sparsets/procsim.hpp"
#include "sparsets/rng.hpp"
#include "sparsets/twostep.hpp"

using namespace sparsets;
using namespace sparsets::twostep;

namespace {

procsim::SeriesSample count_series(const std::vector<double>& lags, const std::vector<double>& x) {
  procsim::SeriesSample s;
  s.kind = procsim::SeriesKind::counts;
  s.lag_buffer = Eigen::Map<const Eigen::VectorXd>(lags.data(), static_cast<Eigen::Index>(lags.size()));
  s.values = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return s;
}

// Gaussian elimination with partial pivoting on an augmented matrix.
Eigen::VectorXd elimination_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const auto n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    }
    a.row(k).swap(a.row(piv));
    std::swap(b[k], b[piv]);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (Eigen::Index j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Eigen::VectorXd x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (Eigen::Index j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

scorelab::WeightedScoreSystem weighted_from(const Eigen::MatrixXd& gram, const Eigen::VectorXd& moment) {
  scorelab::WeightedScoreSystem w;
  w.gram_w = gram;
  w.moment_w = moment;
  for (Eigen::Index j = 0; j < moment.size(); ++j) w.support.push_back(static_cast<int>(j));
  w.n_eff = 1;
  return w;
}

harness::CaseConfig case1() { return harness::builtin_case(harness::CaseId::case1); }

}  // namespace

TEST_CASE("inar nuisance: intercept-only support gives the mean squared residual") {
  const auto s = count_series({1}, {2, 0, 3, 1, 4});
  const auto d = scorelab::inar_design(s, 1);
  const Eigen::Vector2d theta(1.5, 0.0);
  dantzig::SupportEstimate support;
  support.indices = {0};
  const auto h = estimate_inar_nuisance(d, support, theta);
  const double msr = (0.25 + 2.25 + 2.25 + 0.25 + 6.25) / 5.0;
  CHECK(h.values[0] == doctest::Approx(msr).epsilon(1e-14));
  CHECK(h.values[1] == 0.0);
  CHECK(h.kind == NuisanceEstimate::Kind::inar_linear_variance);
}

TEST_CASE("inar nuisance: hand-solved two by two normal equations") {
  // Lag X_0 = 1, series (2, 0, 3, 1, 4): rows (1, x) with x = (1, 2, 0, 3, 1).
  const auto s = count_series({1}, {2, 0, 3, 1, 4});
  const Eigen::Vector2d theta(0.5, 0.5);
  dantzig::SupportEstimate support;
  support.indices = {0, 1};
  const auto h = estimate_inar_nuisance(s, 1, support, theta);
  // Squared residuals r^2 = (2-1)^2, (0-1.5)^2, (3-0.5)^2, (1-2)^2, (4-1)^2.
  const double r2[] = {1.0, 2.25, 6.25, 1.0, 9.0};
  const double x[] = {1, 2, 0, 3, 1};
  double sx = 0, sxx = 0, sr = 0, sxr = 0;
  for (int t = 0; t < 5; ++t) {
    sx += x[t];
    sxx += x[t] * x[t];
    sr += r2[t];
    sxr += x[t] * r2[t];
  }
  const double det = 5.0 * sxx - sx * sx;
  const double h0 = (sxx * sr - sx * sxr) / det;
  const double h1 = (5.0 * sxr - sx * sr) / det;
  CHECK(std::abs(h.values[0] - h0) < 1e-10);
  CHECK(std::abs(h.values[1] - h1) < 1e-10);
}

TEST_CASE("inar nuisance: Poisson variance equals the mean structure") {
  auto config = case1();
  const Eigen::VectorXd theta = harness::true_theta(config);
  dantzig::SupportEstimate support;
  support.indices = harness::true_support(config);
  Eigen::VectorXd mean_h = Eigen::VectorXd::Zero(theta.size());
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    const auto s = procsim::simulate_inar(config.inar, 10000, derive_seed(5, r));
    mean_h += estimate_inar_nuisance(s, 10, support, theta).values / reps;
  }
  for (int j : support.indices) CHECK(std::abs(mean_h[j] - theta[j]) < 0.05 + 0.1 * theta[j]);
}

TEST_CASE("inar nuisance: singular restricted gram") {
  const auto s = count_series({0}, {0, 0, 0, 0});
  dantzig::SupportEstimate support;
  support.indices = {0, 1};
  CHECK_THROWS_AS(estimate_inar_nuisance(s, 1, support, Eigen::Vector2d::Zero()), RankError);
  support.indices.clear();
  CHECK_THROWS_AS(estimate_inar_nuisance(s, 1, support, Eigen::Vector2d::Zero()), DomainError);
}

TEST_CASE("diffusion sigma2: alternating increments") {
  procsim::SeriesSample path;
  path.delta = 0.04;
  path.values.resize(11, 1);
  path.values(0, 0) = 0.0;
  for (int k = 1; k <= 10; ++k) path.values(k, 0) = path.values(k - 1, 0) + (k % 2 ? 0.2 : -0.2);
  const auto est = estimate_diffusion_sigma2(path);
  CHECK(est.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.kind == NuisanceEstimate::Kind::diffusion_constant_sigma2);
  path.values.setConstant(1.0);
  CHECK_THROWS_AS(estimate_diffusion_sigma2(path), NuisanceError);
}

TEST_CASE("diffusion sigma2: OU quadratic variation") {
  procsim::OuSpec spec;
  spec.a_matrix = -Eigen::MatrixXd::Identity(1, 1);
  spec.delta = 0.01;
  spec.n_steps = 10000;
  spec.sigma_diag = Eigen::VectorXd::Ones(1);
  CHECK(std::abs(estimate_diffusion_sigma2(procsim::simulate_ou(spec, 71)).values[0] - 1.0) < 0.05);
  spec.sigma_diag = Eigen::VectorXd::Constant(1, 2.0);
  const double s2 = estimate_diffusion_sigma2(procsim::simulate_ou(spec, 72)).values[0];
  CHECK(std::abs(s2 - 4.0) < 0.05 * 4.0);
}

TEST_CASE("solve_weighted: diagonal and elimination oracle") {
  const auto diag = solve_weighted(weighted_from(Eigen::Vector3d(2, 4, 5).asDiagonal(),
                                                 Eigen::Vector3d(1, 2, -10)));
  CHECK(diag[0] == doctest::Approx(0.5));
  CHECK(diag[1] == doctest::Approx(0.5));
  CHECK(diag[2] == doctest::Approx(-2.0));

  Xoshiro256pp rng(81);
  std::normal_distribution<double> g;
  for (int k = 0; k < 10; ++k) {
    const int s = 2 + k;
    Eigen::MatrixXd z(3 * s, s);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = g(rng);
    Eigen::VectorXd m(s);
    for (int j = 0; j < s; ++j) m[j] = g(rng);
    const Eigen::MatrixXd spd = z.transpose() * z / (3.0 * s);
    const auto sys = weighted_from(spd, m);
    const Eigen::VectorXd theta = solve_weighted(sys);
    CHECK((theta - elimination_solve(spd, m)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((spd * theta - m).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + m.cwiseAbs().maxCoeff()));
  }
  CHECK_THROWS_AS(solve_weighted(weighted_from(Eigen::Matrix2d::Zero(), Eigen::Vector2d::Ones())),
                  RankError);
}

TEST_CASE("two-step: unit weights reproduce restricted least squares") {
  Xoshiro256pp rng(91);
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(300, 5);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = g(rng);
  Eigen::VectorXd theta0(5);
  theta0 << 1.0, 0.0, -0.8, 0.0, 0.0;
  Eigen::VectorXd y = z * theta0;
  for (Eigen::Index t = 0; t < y.size(); ++t) y[t] += 0.1 * g(rng);
  const auto d = scorelab::regression_design(z, y);
  TwoStepOptions opt;
  opt.lambda = 0.02;
  opt.tau = 0.1;
  opt.fixed_nuisance = NuisanceEstimate::constant(1.0);
  const auto fit = two_step_fit(d, opt);
  REQUIRE(fit.support.indices == std::vector<int>{0, 2});
  Eigen::MatrixXd zs(300, 2);
  zs << z.col(0), z.col(2);
  const Eigen::VectorXd ols = (zs.transpose() * zs).ldlt().solve(zs.transpose() * y);
  CHECK(std::abs(fit.theta_tilde[0] - ols[0]) < 1e-12);
  CHECK(std::abs(fit.theta_tilde[2] - ols[1]) < 1e-12);
}

TEST_CASE("two-step: noiseless regression is exact on the support") {
  Xoshiro256pp rng(92);
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(100, 6);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = g(rng);
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(6);
  theta0[1] = 0.7;
  theta0[4] = -0.4;
  const auto d = scorelab::regression_design(z, z * theta0);
  TwoStepOptions opt;
  opt.lambda = 0.01;
  opt.fixed_nuisance = NuisanceEstimate::constant(1.0);
  opt.reference_support = std::vector<int>{4, 1};
  const auto fit = two_step_fit(d, opt);
  REQUIRE(fit.selection_flag.has_value());
  CHECK(*fit.selection_flag);
  CHECK((fit.theta_tilde - theta0).cwiseAbs().maxCoeff() < 1e-12);
  for (int j : {0, 2, 3, 5}) CHECK(fit.theta_tilde[j] == 0.0);
}

TEST_CASE("two-step: empty support yields the empty model") {
  Xoshiro256pp rng(93);
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(50, 3);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = g(rng);
  Eigen::VectorXd y(50);
  for (Eigen::Index t = 0; t < 50; ++t) y[t] = g(rng);
  TwoStepOptions opt;
  opt.lambda = 100.0;
  const auto fit = two_step_fit(scorelab::regression_design(z, y), opt);
  CHECK(fit.empty_model);
  CHECK(fit.support.indices.empty());
  CHECK(fit.theta_tilde.isZero(0.0));
  CHECK(projected_variance(fit, Eigen::Vector3d(1, 0, 0)) == 0.0);
}

TEST_CASE("two-step: INAR fit structure and score residual") {
  auto config = case1();
  const auto d = harness::simulate_design(config, 1234);
  TwoStepOptions opt;
  opt.lambda = 0.12;
  opt.reference_support = harness::true_support(config);
  const auto fit = two_step_fit(d, opt);
  REQUIRE(!fit.support.indices.empty());
  CHECK(fit.support.indices.front() == 0);
  for (Eigen::Index j = 0; j < fit.theta_tilde.size(); ++j) {
    if (!std::binary_search(fit.support.indices.begin(), fit.support.indices.end(), static_cast<int>(j))) {
      CHECK(fit.theta_tilde[j] == 0.0);
    }
  }
  CHECK(fit.asymp_cov == fit.asymp_cov.transpose());
  CHECK(Eigen::LLT<Eigen::MatrixXd>(fit.asymp_cov).info() == Eigen::Success);

  // The weighted score vanishes at theta_tilde under the weights actually used.
  const auto w = scorelab::build_weighted_system(d, fit.support.indices, fit.nuisance,
                                                 1.0 / fit.weight_max);
  Eigen::VectorXd t(fit.support.indices.size());
  for (std::size_t j = 0; j < fit.support.indices.size(); ++j) t[j] = fit.theta_tilde[fit.support.indices[j]];
  CHECK((w.moment_w - w.gram_w * t).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + w.moment_w.cwiseAbs().maxCoeff()));
}

TEST_CASE("two-step: estimated nuisance approaches the oracle nuisance") {
  auto config = case1();
  const Eigen::VectorXd theta = harness::true_theta(config);
  NuisanceEstimate oracle;
  oracle.kind = NuisanceEstimate::Kind::inar_linear_variance;
  oracle.values = theta;
  oracle.support = harness::true_support(config);
  double max_gap = 0.0;
  for (int r = 0; r < 5; ++r) {
    const auto s = procsim::simulate_inar(config.inar, 40000, derive_seed(3, r));
    const auto d = scorelab::inar_design(s, 10);
    TwoStepOptions opt;
    opt.lambda = 0.06;
    const auto est = two_step_fit(d, opt);
    opt.fixed_nuisance = oracle;
    const auto orc = two_step_fit(d, opt);
    REQUIRE(est.support.indices == orc.support.indices);
    max_gap = std::max(max_gap, (est.theta_tilde - orc.theta_tilde).tail(10).cwiseAbs().maxCoeff());
  }
  CHECK(max_gap < 0.01);
}

TEST_CASE("two-step: weighting does not inflate the sampling covariance") {
  auto config = case1();
  const Eigen::VectorXd theta = harness::true_theta(config);
  const auto truth = harness::true_support(config);
  std::vector<Eigen::VectorXd> weighted;
  std::vector<Eigen::VectorXd> unweighted;
  for (int r = 0; r < 200; ++r) {
    const auto d = harness::simulate_design(config, derive_seed(17, r));
    TwoStepOptions opt;
    opt.lambda = 0.12;
    opt.reference_support = truth;
    const auto w = two_step_fit(d, opt);
    if (!*w.selection_flag) continue;
    opt.fixed_nuisance = NuisanceEstimate::constant(1.0);
    const auto u = two_step_fit(d, opt);
    weighted.push_back(w.theta_tilde.segment(1, 4));
    unweighted.push_back(u.theta_tilde.segment(1, 4));
  }
  REQUIRE(weighted.size() > 100);
  auto trace_and_se = [](const std::vector<Eigen::VectorXd>& xs) {
    const double m = static_cast<double>(xs.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    for (const auto& x : xs) mean += x / m;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(4);
    for (const auto& x : xs) var += (x - mean).cwiseAbs2() / (m - 1.0);
    return std::pair<double, double>(var.sum(), std::sqrt(2.0 * var.squaredNorm() / (m - 1.0)));
  };
  const auto [tw, sew] = trace_and_se(weighted);
  const auto [tu, seu] = trace_and_se(unweighted);
  CHECK(tw <= tu + 3.0 * std::sqrt(sew * sew + seu * seu));
}

TEST_CASE("project_statistic") {
  TwoStepFit fit;
  fit.theta_tilde = Eigen::Vector3d(0.5, 0.0, -0.2);
  fit.support.indices = {0, 2};
  fit.asymp_cov = Eigen::Matrix2d::Identity();
  const Eigen::Vector3d truth(0.5, 0.0, -0.2);
  const Eigen::Vector3d u = Eigen::Vector3d(1, 2, 2) / 3.0;
  CHECK(project_statistic(fit, u, truth, 10.0) == 0.0);
  CHECK(project_statistic(fit, Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0.4, 0, 0), 5.0) == 0.0);
  CHECK(project_statistic(fit, Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0.4, 0, 0), 4.0) ==
        doctest::Approx(0.4));
  CHECK(projected_variance(fit, u) == doctest::Approx(5.0 / 9.0));
  CHECK_THROWS_AS(project_statistic(fit, Eigen::Vector3d(1, 1, 0), truth, 1.0), DomainError);
}
