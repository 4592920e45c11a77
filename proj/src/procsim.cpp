#include "sparsets/procsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "sparsets/errors.hpp"
#include "sparsets/rng.hpp"

namespace sparsets::procsim {

namespace {

// Counts above this are treated as an explosion of the recursion.
constexpr double kMaxIntensity = 1e12;

long long draw_poisson(Xoshiro256pp& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean) || mean > kMaxIntensity) {
    throw DomainError("poisson intensity out of range: " + std::to_string(mean));
  }
  if (mean == 0.0) return 0;
  std::poisson_distribution<long long> dist(mean);
  return dist(rng);
}

bool is_nonnegative_integer(double x) {
  return x >= 0.0 && std::floor(x) == x;
}

}  // namespace

void InarSpec::validate() const {
  if (!(mu_eps >= 0.0)) throw DomainError("mu_eps must be nonnegative");
  if (alpha.size() == 0) throw DomainError("alpha must have at least one lag");
  if ((alpha.array() < 0.0).any()) throw DomainError("alpha entries must be nonnegative");
  if (alpha.sum() >= 1.0) {
    throw StationarityError("INAR spec is not stationary: sum(alpha) = " +
                            std::to_string(alpha.sum()) + " >= 1");
  }
  if (burn_in < 0) throw DomainError("burn_in must be nonnegative");
}

double InarSpec::stationary_mean() const { return mu_eps / (1.0 - alpha.sum()); }

void Minar1Spec::validate() const {
  const auto p = eta.size();
  if (p == 0) throw DomainError("eta must be nonempty");
  if (a_matrix.rows() != p || a_matrix.cols() != p) {
    throw DimensionError("a_matrix must be p x p with p = eta.size()");
  }
  if ((eta.array() < 0.0).any() || (a_matrix.array() < 0.0).any()) {
    throw DomainError("eta and a_matrix must be nonnegative");
  }
  if (a_matrix.rowwise().sum().maxCoeff() >= 1.0) {
    throw StationarityError("multivariate INAR(1) spec: max row sum of A must be < 1");
  }
  if (burn_in < 0) throw DomainError("burn_in must be nonnegative");
}

void OuSpec::validate() const {
  const auto d = a_matrix.rows();
  if (d == 0 || a_matrix.cols() != d) throw DimensionError("a_matrix must be square");
  if (sigma_diag.size() != d) throw DimensionError("sigma_diag length must match a_matrix");
  if ((sigma_diag.array() <= 0.0).any()) throw DomainError("sigma_diag entries must be positive");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (n_steps < 1) throw DomainError("n_steps must be positive");
  if (substeps < 1) throw DomainError("substeps must be positive");
  if (initial_state && initial_state->size() != d) {
    throw DimensionError("initial_state length must match a_matrix");
  }
  for (const auto& block : diagonal_blocks(a_matrix)) {
    const auto b = static_cast<Eigen::Index>(block.size());
    Eigen::MatrixXd sub(b, b);
    for (Eigen::Index i = 0; i < b; ++i)
      for (Eigen::Index j = 0; j < b; ++j) sub(i, j) = a_matrix(block[i], block[j]);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(sub, false);
    if (solver.info() != Eigen::Success) throw NumericError("eigenvalue solve failed");
    if ((solver.eigenvalues().real().array() >= 0.0).any()) {
      throw StationarityError("OU drift matrix has an eigenvalue with nonnegative real part");
    }
  }
}

void HawkesSpec::validate() const {
  if (!(eta > 0.0)) throw DomainError("hawkes baseline eta must be positive");
  if (!(horizon > 0.0)) throw DomainError("hawkes horizon must be positive");
  if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size()) {
    throw DimensionError("hawkes kernel needs breakpoints.size() == values.size() + 1 >= 2");
  }
  if (breakpoints.front() != 0.0) throw DomainError("hawkes kernel breakpoints must start at 0");
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    if (!(breakpoints[k + 1] > breakpoints[k])) {
      throw DomainError("hawkes kernel breakpoints must be strictly increasing");
    }
  }
  for (double v : values) {
    if (!(v >= 0.0)) throw DomainError("hawkes kernel values must be nonnegative");
  }
  if (kernel_integral() >= 1.0) {
    throw StationarityError("hawkes kernel is not subcritical: integral = " +
                            std::to_string(kernel_integral()));
  }
}

double HawkesSpec::kernel_integral() const {
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    total += values[k] * (breakpoints[k + 1] - breakpoints[k]);
  }
  return total;
}

double HawkesSpec::kernel_at(double t) const {
  if (t <= 0.0 || t > breakpoints.back()) return 0.0;
  const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), t);
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

double HawkesSpec::kernel_max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

SeriesSample simulate_inar(const InarSpec& spec, int n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw DomainError("series length must be positive");
  const auto p = static_cast<int>(spec.alpha.size());
  const int total = spec.burn_in + p + n;

  Xoshiro256pp rng(seed);
  // history[t + p] = X_t with zero initial state for t < 0
  std::vector<double> history(static_cast<std::size_t>(total + p), 0.0);
  for (int t = 0; t < total; ++t) {
    double intensity = spec.mu_eps;
    for (int i = 1; i <= p; ++i) intensity += spec.alpha[i - 1] * history[t + p - i];
    history[t + p] = static_cast<double>(draw_poisson(rng, intensity));
  }

  SeriesSample out;
  out.kind = SeriesKind::counts;
  out.lag_buffer.resize(p, 1);
  out.values.resize(n, 1);
  const int start = spec.burn_in + p;  // index into history of the buffer start
  for (int i = 0; i < p; ++i) out.lag_buffer(i, 0) = history[start + i];
  for (int t = 0; t < n; ++t) out.values(t, 0) = history[start + p + t];
  return out;
}

SeriesSample simulate_minar1(const Minar1Spec& spec, int n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw DomainError("series length must be positive");
  const auto p = spec.eta.size();
  Xoshiro256pp rng(seed);

  Eigen::VectorXd state = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd next(p);
  auto step = [&] {
    const Eigen::VectorXd intensity = spec.eta + spec.a_matrix * state;
    for (Eigen::Index j = 0; j < p; ++j) {
      next[j] = static_cast<double>(draw_poisson(rng, intensity[j]));
    }
    state.swap(next);
  };
  for (int t = 0; t < spec.burn_in; ++t) step();

  SeriesSample out;
  out.kind = SeriesKind::counts;
  out.lag_buffer = state.transpose();
  out.values.resize(n, p);
  for (int t = 0; t < n; ++t) {
    step();
    out.values.row(t) = state.transpose();
  }
  return out;
}

std::vector<std::vector<int>> diagonal_blocks(const Eigen::MatrixXd& a) {
  const auto d = static_cast<int>(a.rows());
  std::vector<int> parent(static_cast<std::size_t>(d));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (a(i, j) != 0.0 || a(j, i) != 0.0) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<int>> blocks;
  std::vector<int> slot(static_cast<std::size_t>(d), -1);
  for (int i = 0; i < d; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[root]].push_back(i);
  }
  return blocks;
}

Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& block, int copies) {
  const auto b = block.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(b * copies, b * copies);
  for (int c = 0; c < copies; ++c) out.block(c * b, c * b, b, b) = block;
  return out;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                               int max_block) {
  const auto d = a.rows();
  if (a.cols() != d || q.rows() != d || q.cols() != d) {
    throw DimensionError("lyapunov: A and Q must be square of equal size");
  }
  const auto blocks = diagonal_blocks(a);
  for (const auto& block : blocks) {
    if (static_cast<int>(block.size()) > max_block) {
      throw NumericError("lyapunov: diagonal block of size " + std::to_string(block.size()) +
                         " exceeds the supported maximum " + std::to_string(max_block));
    }
  }
  auto extract = [](const Eigen::MatrixXd& m, const std::vector<int>& rows,
                    const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    return out;
  };

  // Cross-block entries solve A_i X + X A_j^T = -Q_ij; they vanish when Q_ij does.
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, d);
  for (const auto& bi : blocks) {
    for (const auto& bj : blocks) {
      const Eigen::MatrixXd q_ij = extract(q, bi, bj);
      if (q_ij.isZero(0.0)) continue;
      const Eigen::MatrixXd a_i = extract(a, bi, bi);
      const Eigen::MatrixXd a_j = extract(a, bj, bj);
      const auto ni = a_i.rows();
      const auto nj = a_j.rows();
      Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(ni * nj, ni * nj);
      for (Eigen::Index c = 0; c < nj; ++c) {
        kron.block(c * ni, c * ni, ni, ni) += a_i;
        for (Eigen::Index r = 0; r < nj; ++r) {
          kron.block(r * ni, c * ni, ni, ni).diagonal().array() += a_j(r, c);
        }
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(kron);
      if (!lu.isInvertible()) throw NumericError("lyapunov: Kronecker system is singular");
      const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q_ij.data(), ni * nj);
      const Eigen::VectorXd sol = lu.solve(rhs);
      for (Eigen::Index c = 0; c < nj; ++c)
        for (Eigen::Index r = 0; r < ni; ++r) v(bi[r], bj[c]) = sol[c * ni + r];
    }
  }
  return v;
}

SeriesSample simulate_ou(const OuSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto d = spec.a_matrix.rows();
  Xoshiro256pp rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd state(d);
  if (spec.initial_state) {
    state = *spec.initial_state;
  } else {
    const Eigen::MatrixXd q = spec.sigma_diag.array().square().matrix().asDiagonal();
    const Eigen::MatrixXd v = solve_lyapunov(spec.a_matrix, q);
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (v + v.transpose()));
    if (llt.info() != Eigen::Success) throw NumericError("stationary covariance is not positive definite");
    Eigen::VectorXd z(d);
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
    state = llt.matrixL() * z;
  }

  const double h = spec.delta / spec.substeps;
  const Eigen::VectorXd noise_scale = spec.sigma_diag * std::sqrt(h);
  SeriesSample out;
  out.kind = SeriesKind::reals;
  out.delta = spec.delta;
  out.values.resize(spec.n_steps + 1, d);
  out.values.row(0) = state.transpose();
  Eigen::VectorXd z(d);
  for (int k = 1; k <= spec.n_steps; ++k) {
    for (int s = 0; s < spec.substeps; ++s) {
      for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
      state += h * (spec.a_matrix * state) + noise_scale.cwiseProduct(z);
    }
    out.values.row(k) = state.transpose();
  }
  return out;
}

std::vector<double> simulate_hawkes(const HawkesSpec& spec, std::uint64_t seed) {
  spec.validate();
  Xoshiro256pp rng(seed);
  const double support = spec.kernel_support();
  const double kmax = spec.kernel_max();

  std::vector<double> events;
  std::deque<double> active;  // events whose kernel may still be nonzero
  double t = 0.0;
  for (;;) {
    while (!active.empty() && t - active.front() >= support) active.pop_front();
    // Intensity between events is bounded by the baseline plus every live
    // event contributing its kernel maximum; events only leave the window.
    const double bound = spec.eta + static_cast<double>(active.size()) * kmax;
    t += -std::log1p(-rng.uniform()) / bound;
    if (t > spec.horizon) break;
    while (!active.empty() && t - active.front() >= support) active.pop_front();
    double intensity = spec.eta;
    for (double e : active) intensity += spec.kernel_at(t - e);
    if (rng.uniform() * bound <= intensity) {
      events.push_back(t);
      active.push_back(t);
    }
  }
  return events;
}

SeriesSample bin_counts(const std::vector<double>& events, double delta, double horizon) {
  if (!(delta > 0.0)) throw DomainError("bin width must be positive");
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  const auto bins = static_cast<Eigen::Index>(std::ceil(horizon / delta - 1e-9));
  SeriesSample out;
  out.kind = SeriesKind::counts;
  out.delta = delta;
  out.values = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(bins, 1), 1);
  const Eigen::Index last = out.values.rows() - 1;
  for (double e : events) {
    if (!(e > 0.0) || e > horizon) throw DomainError("event time outside (0, horizon]");
    auto k = static_cast<Eigen::Index>(std::ceil(e / delta)) - 1;
    if (k > 0 && e <= static_cast<double>(k) * delta) --k;
    if (e > static_cast<double>(k + 1) * delta) ++k;
    out.values(std::clamp<Eigen::Index>(k, 0, last), 0) += 1.0;
  }
  return out;
}

void write_series_csv(const SeriesSample& series, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open series file for writing: " + path);
  os.precision(17);
  const auto d = series.dim();
  os << "t";
  for (Eigen::Index j = 0; j < d; ++j) os << ",x" << (j + 1);
  os << '\n';
  const double step = series.delta.value_or(1.0);
  const auto buffered = series.lag_buffer.rows();
  auto emit_row = [&](double t, const auto& row) {
    os << t;
    for (Eigen::Index j = 0; j < d; ++j) os << ',' << row(j);
    os << '\n';
  };
  for (Eigen::Index i = 0; i < buffered; ++i) {
    emit_row(-static_cast<double>(buffered - i) * step + (series.delta ? 0.0 : 1.0),
             series.lag_buffer.row(i));
  }
  for (Eigen::Index t = 0; t < series.length(); ++t) {
    emit_row(series.delta ? static_cast<double>(t) * step : static_cast<double>(t + 1),
             series.values.row(t));
  }
}

SeriesSample read_series_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open series file: " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("t", 0) != 0) {
    throw ConfigError("series file must start with a `t,x1,...` header: " + path);
  }
  const auto d = std::count(line.begin(), line.end(), ',');
  if (d < 1) throw ConfigError("series file has no value columns: " + path);

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<long>(row.size()) != d + 1) {
      throw ConfigError("ragged row in series file: " + path);
    }
    times.push_back(row.front());
    rows.emplace_back(row.begin() + 1, row.end());
  }
  if (rows.empty()) throw ConfigError("series file has no rows: " + path);

  const bool integer_times = std::all_of(times.begin(), times.end(),
                                         [](double t) { return std::floor(t) == t; });
  SeriesSample out;
  // Lag buffer rows: t <= 0 for integer-indexed series, t < 0 for timed paths.
  std::size_t buffered = 0;
  while (buffered < times.size() &&
         (integer_times ? times[buffered] <= 0.0 : times[buffered] < 0.0)) {
    ++buffered;
  }
  if (!integer_times && buffered + 1 < times.size()) {
    out.delta = times[buffered + 1] - times[buffered];
  }
  out.lag_buffer.resize(static_cast<Eigen::Index>(buffered), d);
  out.values.resize(static_cast<Eigen::Index>(rows.size() - buffered), d);
  bool counts = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double v = rows[i][j];
      counts = counts && is_nonnegative_integer(v);
      if (i < buffered) out.lag_buffer(static_cast<Eigen::Index>(i), j) = v;
      else out.values(static_cast<Eigen::Index>(i - buffered), j) = v;
    }
  }
  out.kind = counts ? SeriesKind::counts : SeriesKind::reals;
  return out;
}

}  // namespace sparsets::procsim
