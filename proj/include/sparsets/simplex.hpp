#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sparsets::lp {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status);

struct LpOptions {
  // 0 selects 50 * (structural + slack columns).
  int max_iterations = 0;
  double pivot_tolerance = 1e-9;
  double cost_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  // Column index of every basic variable at termination; slack j is
  // column x.size() + j.
  std::vector<int> basis;
};

// Dense two-phase primal simplex on the full tableau for
//   min c^T x  s.t.  A x <= b,  x >= 0,
// with entries of b of any sign. Entering and leaving variables follow
// Bland's rule (lowest eligible index), so pivoting cannot cycle and the
// returned vertex is a deterministic function of the input.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const LpOptions& options = {});

}  // namespace sparsets::lp
