#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sparsets::procsim {

enum class SeriesKind { counts, reals };

// Observed path. Rows of `values` are time points, columns coordinates.
// `lag_buffer` holds the pre-sample rows X_{1-p}, ..., X_0 in time order.
struct SeriesSample {
  Eigen::MatrixXd values;
  Eigen::MatrixXd lag_buffer;
  std::optional<double> delta;
  SeriesKind kind = SeriesKind::reals;

  Eigen::Index length() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

// Poisson INAR(p): X_t | past ~ Poisson(mu_eps + sum_i alpha_i X_{t-i}).
struct InarSpec {
  double mu_eps = 0.0;
  Eigen::VectorXd alpha;
  int burn_in = 1000;

  void validate() const;
  double stationary_mean() const;
};

// Multivariate Poisson INAR(1): Y_t | past ~ Poisson(eta + A Y_{t-1}) coordinatewise.
struct Minar1Spec {
  Eigen::VectorXd eta;
  Eigen::MatrixXd a_matrix;
  int burn_in = 1000;

  void validate() const;
};

// dY = A Y dt + diag(sigma) dW sampled every `delta`.
struct OuSpec {
  Eigen::MatrixXd a_matrix;
  Eigen::VectorXd sigma_diag;
  double delta = 0.05;
  int n_steps = 1000;
  int substeps = 10;
  // Overrides the stationary N(0, V) start when set.
  std::optional<Eigen::VectorXd> initial_state;

  void validate() const;
};

// Piecewise-constant excitation kernel: a(t) = values[k] on
// (breakpoints[k], breakpoints[k+1]], zero outside (0, breakpoints.back()].
struct HawkesSpec {
  double eta = 1.0;
  std::vector<double> breakpoints{0.0, 1.0};
  std::vector<double> values{0.0};
  double horizon = 100.0;

  void validate() const;
  double kernel_integral() const;
  double kernel_support() const { return breakpoints.back(); }
  double kernel_at(double t) const;
  double kernel_max() const;
};

SeriesSample simulate_inar(const InarSpec& spec, int n, std::uint64_t seed);
SeriesSample simulate_minar1(const Minar1Spec& spec, int n, std::uint64_t seed);

// Returns n_steps + 1 rows sampled at t_k = k * delta, k = 0..n_steps.
SeriesSample simulate_ou(const OuSpec& spec, std::uint64_t seed);

std::vector<double> simulate_hawkes(const HawkesSpec& spec, std::uint64_t seed);

// X_k = #{events in (k delta, (k+1) delta]}, k = 0..ceil(horizon/delta)-1.
SeriesSample bin_counts(const std::vector<double>& events, double delta,
                        double horizon);

// Solves A V + V A^T + Q = 0 for block-diagonal A, block by block through the
// Kronecker-sum linear system. Blocks are the connected components of the
// sparsity pattern of A and may not exceed `max_block` rows.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                               int max_block = 8);

// Index sets of the diagonal blocks of A (connected components of A + A^T != 0).
std::vector<std::vector<int>> diagonal_blocks(const Eigen::MatrixXd& a);

// Block-diagonal matrix with `copies` repetitions of `block`.
Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& block, int copies);

// CSV with header `t,x1,...`; lag buffer rows carry negative t.
void write_series_csv(const SeriesSample& series, const std::string& path);
SeriesSample read_series_csv(const std::string& path);

}  // namespace sparsets::procsim
