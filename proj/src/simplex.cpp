#include "sparsets/simplex.hpp"

#include <cmath>
#include <limits>

#include "sparsets/errors.hpp"

namespace sparsets::lp {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class SimplexTableau {
 public:
  SimplexTableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const LpOptions& options)
      : m_(a.rows()), n_(a.cols()), options_(options) {
    artificials_ = static_cast<Eigen::Index>((b.array() < 0.0).count());
    columns_ = n_ + m_ + artificials_;
    rhs_ = columns_;
    table_ = Tableau::Zero(m_ + 1, columns_ + 1);
    basis_.resize(static_cast<std::size_t>(m_));
    Eigen::Index next_artificial = n_ + m_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = b[i] < 0.0 ? -1.0 : 1.0;
      table_.row(i).head(n_) = sign * a.row(i);
      table_(i, n_ + i) = sign;
      table_(i, rhs_) = sign * b[i];
      if (sign < 0.0) {
        table_(i, next_artificial) = 1.0;
        basis_[static_cast<std::size_t>(i)] = static_cast<int>(next_artificial++);
      } else {
        basis_[static_cast<std::size_t>(i)] = static_cast<int>(n_ + i);
      }
    }
  }

  // Infeasible when the phase-1 optimum leaves a positive artificial sum.
  LpStatus phase_one(int& iterations, int max_iterations, double scale) {
    if (artificials_ == 0) return LpStatus::optimal;
    auto objective = table_.row(m_);
    objective.setZero();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (is_artificial(basis_[static_cast<std::size_t>(i)])) objective -= table_.row(i);
    }
    objective.segment(n_ + m_, artificials_).setZero();
    const LpStatus status = iterate(columns_, iterations, max_iterations);
    if (status != LpStatus::optimal) return status;
    if (-table_(m_, rhs_) > options_.feasibility_tolerance * scale) return LpStatus::infeasible;
    drive_out_artificials();
    return LpStatus::optimal;
  }

  LpStatus phase_two(const Eigen::VectorXd& c, int& iterations, int max_iterations) {
    auto objective = table_.row(m_);
    objective.setZero();
    objective.head(n_) = c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      if (j < n_ && c[j] != 0.0) objective -= c[j] * table_.row(i);
    }
    return iterate(n_ + m_, iterations, max_iterations);
  }

  // Basic solution recomputed from the original constraint columns, which
  // removes round-off accumulated over the pivots.
  Eigen::VectorXd solution(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) const {
    Eigen::VectorXd from_tableau = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) from_tableau[j] = std::max(0.0, table_(i, rhs_));
    }
    Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m_, m_);
    for (Eigen::Index k = 0; k < m_; ++k) {
      const int j = basis_[static_cast<std::size_t>(k)];
      if (j < n_) {
        basis_matrix.col(k) = a.col(j);
      } else if (j < n_ + m_) {
        basis_matrix(j - n_, k) = 1.0;
      } else {
        return from_tableau;  // a redundant row kept its artificial
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    const Eigen::VectorXd values = lu.solve(b);
    if (!values.allFinite()) return from_tableau;
    Eigen::VectorXd refined = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index k = 0; k < m_; ++k) {
      const int j = basis_[static_cast<std::size_t>(k)];
      if (values[k] < -1e-7 * (1.0 + std::abs(table_(k, rhs_)))) return from_tableau;
      if (j < n_) refined[j] = std::max(0.0, values[k]);
    }
    return refined;
  }

  const std::vector<int>& basis() const { return basis_; }

 private:
  bool is_artificial(int j) const { return j >= n_ + m_; }

  LpStatus iterate(Eigen::Index allowed_columns, int& iterations, int max_iterations) {
    for (;;) {
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < allowed_columns; ++j) {
        if (table_(m_, j) < -options_.cost_tolerance) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return LpStatus::optimal;
      if (iterations >= max_iterations) return LpStatus::iteration_limit;

      Eigen::Index leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double coef = table_(i, entering);
        if (coef <= options_.pivot_tolerance) continue;
        const double ratio = std::max(0.0, table_(i, rhs_)) / coef;
        if (leaving < 0) {
          leaving = i;
          best_ratio = ratio;
          continue;
        }
        const double tie = 1e-12 * std::max(1.0, best_ratio);
        const bool tied = std::abs(ratio - best_ratio) <= tie;
        if ((!tied && ratio < best_ratio) ||
            (tied && basis_[static_cast<std::size_t>(i)] <
                         basis_[static_cast<std::size_t>(leaving)])) {
          leaving = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
      if (leaving < 0) return LpStatus::unbounded;
      pivot(leaving, entering);
      ++iterations;
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    table_.row(row) /= table_(row, col);
    table_(row, col) = 1.0;
    const auto pivot_row = table_.row(row);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double factor = table_(i, col);
      if (factor == 0.0) continue;
      table_.row(i) -= factor * pivot_row;
      table_(i, col) = 0.0;
    }
    basis_[static_cast<std::size_t>(row)] = static_cast<int>(col);
  }

  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      for (Eigen::Index j = 0; j < n_ + m_; ++j) {
        if (std::abs(table_(i, j)) > options_.pivot_tolerance) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::Index artificials_ = 0;
  Eigen::Index columns_ = 0;
  Eigen::Index rhs_ = 0;
  LpOptions options_;
  Tableau table_;
  std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const LpOptions& options) {
  if (a.rows() != b.size() || a.cols() != c.size()) {
    throw DimensionError("solve_lp: inconsistent dimensions");
  }
  const int max_iterations = options.max_iterations > 0
                                 ? options.max_iterations
                                 : static_cast<int>(50 * (a.cols() + a.rows()));
  const double scale = 1.0 + (b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0);

  SimplexTableau tableau(a, b, options);
  LpResult result;
  result.status = tableau.phase_one(result.iterations, max_iterations, scale);
  if (result.status == LpStatus::optimal) {
    result.status = tableau.phase_two(c, result.iterations, max_iterations);
  }
  result.basis = tableau.basis();
  if (result.status == LpStatus::optimal || result.status == LpStatus::iteration_limit) {
    result.x = tableau.solution(a, b);
  } else {
    result.x = Eigen::VectorXd::Zero(a.cols());
  }
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace sparsets::lp
