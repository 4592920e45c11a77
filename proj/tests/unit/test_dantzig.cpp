#include <doctest.h>

#include <cmath>
#include <random>

#include "sparsets/dantzig.hpp"
#include "sparsets/errors.hpp"
#include "sparsets/procsim.hpp"
#include "sparsets/rng.hpp"
#include "sparsets/simplex.hpp"
#include "support/lp_oracle.hpp"

using namespace sparsets;
using namespace sparsets::dantzig;

namespace {

scorelab::LinearScoreSystem make_system(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  scorelab::LinearScoreSystem sys;
  sys.gram = a;
  sys.moment = b;
  sys.n_eff = 1;
  return sys;
}

// Gram of `rows` standard normal observations in p dimensions, plus a moment
// vector; rows < p gives a singular gram.
scorelab::LinearScoreSystem random_system(int p, int rows, Xoshiro256pp& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(rows, p);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = g(rng);
  Eigen::VectorXd b(p);
  for (int j = 0; j < p; ++j) b[j] = g(rng);
  return make_system(z.transpose() * z / rows, b);
}

}  // namespace

TEST_CASE("solve_lp: textbook maximization") {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6.
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 1;
  const auto r = lp::solve_lp(Eigen::Vector2d(-1, -1), a, Eigen::Vector2d(4, 6));
  REQUIRE(r.status == lp::LpStatus::optimal);
  CHECK(r.x[0] == doctest::Approx(1.6));
  CHECK(r.x[1] == doctest::Approx(1.2));
  CHECK(r.objective == doctest::Approx(-2.8));
}

TEST_CASE("solve_lp: negative right-hand side needs phase one") {
  // min x + y s.t. x + y >= 2, x <= 3.
  Eigen::MatrixXd a(2, 2);
  a << -1, -1, 1, 0;
  const auto r = lp::solve_lp(Eigen::Vector2d(1, 1), a, Eigen::Vector2d(-2, 3));
  REQUIRE(r.status == lp::LpStatus::optimal);
  CHECK(r.objective == doctest::Approx(2.0));
}

TEST_CASE("solve_lp: infeasible and unbounded") {
  const auto inf = lp::solve_lp(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 1),
                                Eigen::VectorXd::Constant(1, -1.0));
  CHECK(inf.status == lp::LpStatus::infeasible);
  const auto unb = lp::solve_lp(-Eigen::VectorXd::Ones(1), -Eigen::MatrixXd::Ones(1, 1),
                                Eigen::VectorXd::Ones(1));
  CHECK(unb.status == lp::LpStatus::unbounded);
}

TEST_CASE("dantzig: origin is optimal once lambda covers the moment") {
  const auto sys = make_system(Eigen::Matrix2d::Identity(), Eigen::Vector2d(0.3, -0.7));
  const auto fit = solve_dantzig(sys, 0.7);
  REQUIRE(fit.status == FitStatus::optimal);
  CHECK(fit.theta_hat.isZero(0.0));
  CHECK(fit.l1_objective == 0.0);
}

TEST_CASE("dantzig: lambda zero with identity gram returns the moment") {
  const auto sys = make_system(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1.0, -2.0));
  const auto fit = solve_dantzig(sys, 0.0);
  REQUIRE(fit.status == FitStatus::optimal);
  CHECK(fit.theta_hat[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.theta_hat[1] == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("dantzig: two-dimensional instance against vertex enumeration") {
  Eigen::Matrix2d a;
  a << 2, 1, 1, 2;
  const Eigen::Vector2d b(1, 1);
  const auto fit = solve_dantzig(make_system(a, b), 0.25);
  REQUIRE(fit.status == FitStatus::optimal);
  const auto oracle = testsupport::dantzig_vertex_oracle(a, b, 0.25);
  REQUIRE(oracle.has_value());
  CHECK(*oracle == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(fit.l1_objective - *oracle) < 1e-6);
}

TEST_CASE("dantzig: random small instances agree with vertex enumeration") {
  Xoshiro256pp rng(2024);
  int infeasible = 0;
  for (int k = 0; k < 60; ++k) {
    const int p = 1 + k % 4;
    const int rows = (k % 5 == 0) ? std::max(1, p - 1) : 2 * p + 3;
    const auto sys = random_system(p, rows, rng);
    const double lambda = sys.moment.cwiseAbs().maxCoeff() * rng.uniform() * 0.9;
    const auto fit = solve_dantzig(sys, lambda);
    const auto oracle = testsupport::dantzig_vertex_oracle(sys.gram, sys.moment, lambda);
    if (!oracle) {
      ++infeasible;
      CHECK(fit.status == FitStatus::infeasible);
      continue;
    }
    REQUIRE(fit.status == FitStatus::optimal);
    CHECK(std::abs(fit.l1_objective - *oracle) < 1e-6);
    CHECK(fit.feasibility_slack >= -1e-8);
  }
  CHECK(infeasible < 60);
}

TEST_CASE("dantzig: infeasible when the moment leaves the range of a singular gram") {
  Eigen::Matrix2d a;
  a << 1, 0, 0, 0;
  const auto fit = solve_dantzig(make_system(a, Eigen::Vector2d(0.0, 1.0)), 0.5);
  CHECK(fit.status == FitStatus::infeasible);
}

TEST_CASE("dantzig: feasibility, minimality and monotonicity") {
  Xoshiro256pp rng(99);
  std::normal_distribution<double> g;
  for (int k = 0; k < 15; ++k) {
    const int p = 3 + k % 6;
    const auto sys = random_system(p, 4 * p, rng);
    const double bmax = sys.moment.cwiseAbs().maxCoeff();
    const Eigen::VectorXd ls = sys.gram.ldlt().solve(sys.moment);

    double previous = std::numeric_limits<double>::infinity();
    for (double frac : {0.0, 0.05, 0.2, 0.5, 0.9, 1.0}) {
      const double lambda = frac * bmax;
      const auto fit = solve_dantzig(sys, lambda);
      REQUIRE(fit.status == FitStatus::optimal);
      CHECK((sys.moment - sys.gram * fit.theta_hat).cwiseAbs().maxCoeff() <= lambda + 1e-8);
      CHECK(fit.l1_objective == doctest::Approx(fit.theta_hat.lpNorm<1>()).epsilon(1e-10));
      CHECK(fit.l1_objective <= ls.lpNorm<1>() + 1e-8);
      CHECK(fit.l1_objective <= previous + 1e-8);
      previous = fit.l1_objective;

      // Perturbations of the least-squares point that stay feasible.
      for (int t = 0; t < 5; ++t) {
        Eigen::VectorXd d(p);
        for (int j = 0; j < p; ++j) d[j] = g(rng);
        const double r = (sys.gram * d).cwiseAbs().maxCoeff();
        if (r == 0.0) continue;
        const Eigen::VectorXd feasible = ls + d * (lambda / r) * rng.uniform();
        CHECK(fit.l1_objective <= feasible.lpNorm<1>() + 1e-8);
      }
    }
  }
}

TEST_CASE("dantzig: deterministic output and argument checks") {
  Xoshiro256pp rng(5);
  const auto sys = random_system(6, 20, rng);
  const auto a = solve_dantzig(sys, 0.1);
  const auto b = solve_dantzig(sys, 0.1);
  CHECK(a.theta_hat == b.theta_hat);
  CHECK(a.iterations == b.iterations);
  CHECK_THROWS_AS(solve_dantzig(sys, -1.0), DomainError);
  SolveOptions tight;
  tight.max_iterations = 1;
  CHECK(solve_dantzig(sys, 0.0, tight).status == FitStatus::iteration_limit);
}

TEST_CASE("threshold_support: strict inequality") {
  CHECK(threshold_support(Eigen::Vector3d::Zero(), 0.05).indices.empty());
  const auto s = threshold_support(Eigen::Vector3d(0.3, 0.05, -0.2), 0.05);
  CHECK(s.indices == std::vector<int>{0, 2});
  CHECK(s.threshold == 0.05);
  CHECK_THROWS_AS(threshold_support(Eigen::Vector3d::Zero(), -1.0), DomainError);
}

TEST_CASE("log_spaced grid") {
  const auto g = log_spaced(0.01, 1.0, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(0.01));
  CHECK(g[1] == doctest::Approx(0.1));
  CHECK(g[2] == 1.0);
}

TEST_CASE("fit_first_step: centered pipeline recovers a noiseless intercept model") {
  Xoshiro256pp rng(8);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(200, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
  const Eigen::Vector4d slopes(1.0, 0.0, -0.5, 0.0);
  const Eigen::VectorXd y = (x * slopes).array() + 2.0;
  const auto d = scorelab::regression_design(x, y, true);
  const auto fit = fit_first_step(d, 0.0, true);
  REQUIRE(fit.status == FitStatus::optimal);
  REQUIRE(fit.theta_hat.size() == 5);
  CHECK(fit.theta_hat[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK((fit.theta_hat.tail(4) - slopes).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("cross_validate_lambda: single grid point") {
  procsim::InarSpec spec;
  spec.mu_eps = 1.0;
  spec.alpha = Eigen::Vector3d(0.3, 0.0, 0.0);
  const auto d = scorelab::inar_design(procsim::simulate_inar(spec, 200, 3), 3);
  const auto cv = cross_validate_lambda(d, {0.05}, 5);
  CHECK(cv.chosen_lambda == 0.05);
  CHECK(cv.cv_loss.size() == 1);
  CHECK(cv.folds == 5);
  CHECK_THROWS_AS(cross_validate_lambda(d, {}, 5), DomainError);
  CHECK_THROWS_AS(cross_validate_lambda(d, {0.2, 0.1}, 5), DomainError);
  CHECK_THROWS_AS(cross_validate_lambda(d, {0.1}, 1), DomainError);
}

TEST_CASE("cross_validate_lambda: chosen value attains the minimum loss") {
  procsim::InarSpec spec;
  spec.mu_eps = 0.5;
  spec.alpha = Eigen::VectorXd::Zero(6);
  spec.alpha.head(2) << 0.4, 0.2;
  const auto d = scorelab::inar_design(procsim::simulate_inar(spec, 600, 4), 6);
  const auto grid = default_lambda_grid(d);
  const auto cv = cross_validate_lambda(d, grid, 5);
  const double best = *std::min_element(cv.cv_loss.begin(), cv.cv_loss.end());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g] == cv.chosen_lambda) CHECK(cv.cv_loss[g] <= best * (1.0 + 1e-12));
    if (grid[g] > cv.chosen_lambda) CHECK(cv.cv_loss[g] > best);
  }
}

TEST_CASE("cross_validate_lambda: null data prefers large lambda") {
  // I.i.d. Poisson counts: no lag carries signal. "Large" means the upper
  // quarter of the 20-point grid, i.e. at least 0.3 ||b||_inf.
  procsim::InarSpec spec;
  spec.mu_eps = 2.0;
  spec.alpha = Eigen::VectorXd::Zero(5);
  int large = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const auto d = scorelab::inar_design(procsim::simulate_inar(spec, 400, derive_seed(31, r)), 5);
    const auto grid = default_lambda_grid(d);
    const auto cv = cross_validate_lambda(d, grid, 5);
    if (cv.chosen_lambda >= grid[15]) ++large;
  }
  CHECK(large >= 80);
}
