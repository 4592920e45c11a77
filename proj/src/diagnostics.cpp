#include "sparsets/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "sparsets/errors.hpp"
#include "sparsets/rng.hpp"

namespace sparsets::diagnostics {

const char* to_string(FInftyEstimate::Method method) {
  return method == FInftyEstimate::Method::cone_sampling ? "cone_sampling" : "grid_oracle";
}

const char* to_string(NormalityReport::Test test) {
  return test == NormalityReport::Test::shapiro_wilk ? "shapiro_wilk" : "royston_h";
}

namespace {

struct Cone {
  std::vector<bool> in_support;

  double ratio(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) const {
    double support_l1 = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (in_support[static_cast<std::size_t>(j)]) support_l1 += std::abs(v[j]);
    }
    const double denom = support_l1 * v.lpNorm<Eigen::Infinity>();
    if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
    return std::abs(v.dot(m * v)) / denom;
  }

  // Shrinks the off-support part so that ||v_{T^c}||_1 <= ||v_T||_1.
  void project(Eigen::VectorXd& v) const {
    double inside = 0.0;
    double outside = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      (in_support[static_cast<std::size_t>(j)] ? inside : outside) += std::abs(v[j]);
    }
    if (outside <= inside || outside == 0.0) return;
    const double shrink = inside / outside;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (!in_support[static_cast<std::size_t>(j)]) v[j] *= shrink;
    }
  }

  bool contains(const Eigen::VectorXd& v) const {
    double inside = 0.0;
    double outside = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      (in_support[static_cast<std::size_t>(j)] ? inside : outside) += std::abs(v[j]);
    }
    return outside <= inside;
  }
};

// Projection of x onto {0 <= y <= cap, sum y = 1}; requires cap * size >= 1.
void project_capped_simplex(Eigen::VectorXd& x, double cap) {
  double lo = x.minCoeff() - 1.0;
  double hi = x.maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = (x.array() - mid).max(0.0).min(cap).sum();
    (s > 1.0 ? lo : hi) = mid;
  }
  x = (x.array() - 0.5 * (lo + hi)).max(0.0).min(cap);
}

// Projection of x onto {||z||_1 <= 1, ||z||_inf <= cap}.
void project_l1_box(Eigen::VectorXd& x, double cap) {
  auto shrunk = [&](double t) { return (x.array().abs() - t).max(0.0).min(cap); };
  if (shrunk(0.0).sum() > 1.0) {
    double lo = 0.0;
    double hi = x.cwiseAbs().maxCoeff();
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (shrunk(mid).sum() > 1.0 ? lo : hi) = mid;
    }
    x = x.array().sign() * shrunk(hi);
  } else {
    x = x.array().sign() * shrunk(0.0);
  }
}

// Exact minimum of the ratio over the cone cell where v_T has sign pattern
// `signs` (positive semidefinite M). With ||v_T||_1 = 1 fixed, the cell value
// is min over tau of q(tau) / tau, where q(tau) = min v^T M v subject to
// ||v||_inf <= tau is a convex QP (solved by accelerated projected gradient)
// and q(tau) / tau is quasiconvex in tau. Returns the ratio of the best
// vector found, so the value is attained by a cone member.
class CellSolver {
 public:
  CellSolver(const Eigen::MatrixXd& m, const Cone& cone) : m_(0.5 * (m + m.transpose())), cone_(cone) {
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
      (cone.in_support[static_cast<std::size_t>(j)] ? inside_ : outside_).push_back(j);
    }
    const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m_, Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .maxCoeff();
    step_ = top > 0.0 ? 1.0 / (2.0 * top) : 0.0;
  }

  double solve(const Eigen::VectorXd& signs) {
    const double k = static_cast<double>(inside_.size());
    if (step_ == 0.0) return 0.0;
    signs_ = signs;
    start_ = Eigen::VectorXd::Zero(m_.rows());
    for (std::size_t i = 0; i < inside_.size(); ++i) start_[inside_[i]] = signs_[static_cast<Eigen::Index>(i)] / k;
    best_ = std::numeric_limits<double>::infinity();

    constexpr double golden = 0.6180339887498949;
    double a = 1.0 / k;
    double b = 1.0;
    double c = b - golden * (b - a);
    double d = a + golden * (b - a);
    double fc = scaled_q(c);
    double fd = scaled_q(d);
    for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - golden * (b - a);
        fc = scaled_q(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + golden * (b - a);
        fd = scaled_q(d);
      }
    }
    scaled_q(a);
    scaled_q(b);
    return best_;
  }

 private:
  void project(Eigen::VectorXd& v, double cap) const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(inside_.size()));
    for (std::size_t i = 0; i < inside_.size(); ++i) {
      y[static_cast<Eigen::Index>(i)] = signs_[static_cast<Eigen::Index>(i)] * v[inside_[i]];
    }
    project_capped_simplex(y, cap);
    for (std::size_t i = 0; i < inside_.size(); ++i) {
      v[inside_[i]] = signs_[static_cast<Eigen::Index>(i)] * y[static_cast<Eigen::Index>(i)];
    }
    if (outside_.empty()) return;
    Eigen::VectorXd z(static_cast<Eigen::Index>(outside_.size()));
    for (std::size_t i = 0; i < outside_.size(); ++i) z[static_cast<Eigen::Index>(i)] = v[outside_[i]];
    project_l1_box(z, cap);
    for (std::size_t i = 0; i < outside_.size(); ++i) v[outside_[i]] = z[static_cast<Eigen::Index>(i)];
  }

  // q(tau) / tau; warm-starts from the previous solution.
  double scaled_q(double tau) {
    Eigen::VectorXd x = start_;
    project(x, tau);
    Eigen::VectorXd y = x;
    double t = 1.0;
    for (int it = 0; it < 20000; ++it) {
      Eigen::VectorXd next = y - step_ * 2.0 * (m_ * y);
      project(next, tau);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = next + ((t - 1.0) / t_next) * (next - x);
      const double moved = (next - x).lpNorm<Eigen::Infinity>();
      x = std::move(next);
      t = t_next;
      if (moved < 1e-13) break;
    }
    start_ = x;
    best_ = std::min(best_, cone_.ratio(m_, x));
    return x.dot(m_ * x) / tau;
  }

  Eigen::MatrixXd m_;
  const Cone& cone_;
  std::vector<Eigen::Index> inside_;
  std::vector<Eigen::Index> outside_;
  double step_ = 0.0;
  Eigen::VectorXd signs_;
  Eigen::VectorXd start_;
  double best_ = 0.0;
};

bool positive_semidefinite(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
          .eigenvalues();
  return ev.minCoeff() >= -1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
}

Cone make_cone(const Eigen::MatrixXd& m, const std::vector<int>& support) {
  if (m.rows() != m.cols()) throw DimensionError("F_infinity needs a square matrix");
  if (support.empty()) throw DomainError("F_infinity needs a nonempty support");
  Cone cone;
  cone.in_support.assign(static_cast<std::size_t>(m.rows()), false);
  for (int j : support) {
    if (j < 0 || j >= m.rows()) throw DimensionError("support index out of range");
    cone.in_support[static_cast<std::size_t>(j)] = true;
  }
  return cone;
}

}  // namespace

FInftyEstimate estimate_f_infinity(const Eigen::MatrixXd& m, const std::vector<int>& support,
                                   int n_samples, std::uint64_t seed, int refine_steps) {
  if (n_samples < 1) throw DomainError("F_infinity needs at least one sample");
  const Cone cone = make_cone(m, support);
  const auto p = m.rows();

  Xoshiro256pp rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd v(p);
  Eigen::VectorXd outside_dir(p);

  // Positive semidefinite M: every sample's sign cell is minimized exactly.
  // Otherwise the ratio carries |.| of an indefinite form and random local
  // search is used instead.
  std::optional<CellSolver> cells;
  const std::size_t support_size = static_cast<std::size_t>(
      std::count(cone.in_support.begin(), cone.in_support.end(), true));
  if (positive_semidefinite(m)) cells.emplace(m, cone);
  std::unordered_set<std::string> visited;

  for (int i = 0; i < n_samples; ++i) {
    double support_norm2 = 0.0;
    double outside_l1 = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double z = normal(rng);
      if (cone.in_support[static_cast<std::size_t>(j)]) {
        v[j] = z;
        outside_dir[j] = 0.0;
        support_norm2 += z * z;
      } else {
        v[j] = 0.0;
        outside_dir[j] = z;
        outside_l1 += std::abs(z);
      }
    }
    const double u = rng.uniform();
    v /= std::sqrt(support_norm2);
    const double support_l1 = v.lpNorm<1>();
    if (outside_l1 > 0.0) v += outside_dir * (u * support_l1 / outside_l1);

    const double r = cone.ratio(m, v);
    if (cells) {
      // Sign pattern of v_T up to a global flip; each cell is solved once.
      std::string key;
      Eigen::VectorXd signs(static_cast<Eigen::Index>(support_size));
      Eigen::Index k = 0;
      double flip = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (!cone.in_support[static_cast<std::size_t>(j)]) continue;
        if (flip == 0.0) flip = v[j] < 0.0 ? -1.0 : 1.0;
        signs[k] = flip * v[j] < 0.0 ? -1.0 : 1.0;
        key.push_back(signs[k] > 0.0 ? '+' : '-');
        ++k;
      }
      best = std::min(best, r);
      if (visited.insert(key).second) best = std::min(best, cells->solve(signs));
      continue;
    }
    if (!(r < best)) continue;
    best = r;

    // Local search with its own stream so that sample i+1 sees the same
    // draws no matter how long refinement i ran.
    Xoshiro256pp local(derive_seed(seed ^ 0xF1F1F1F1ULL, static_cast<std::uint64_t>(i) + 1));
    double step = 0.25 * v.norm();
    Eigen::VectorXd current = v;
    for (int k = 0; k < refine_steps; ++k) {
      Eigen::VectorXd trial = current;
      for (Eigen::Index j = 0; j < p; ++j) trial[j] += step * normal(local);
      cone.project(trial);
      const double rt = cone.ratio(m, trial);
      if (rt < best) {
        best = rt;
        current = trial;
      } else {
        step *= 0.85;
      }
    }
  }

  FInftyEstimate out;
  out.value = best;
  out.method = FInftyEstimate::Method::cone_sampling;
  out.samples = n_samples;
  out.support = support;
  return out;
}

FInftyEstimate f_infinity_grid(const Eigen::MatrixXd& m, const std::vector<int>& support,
                               int resolution) {
  const Cone cone = make_cone(m, support);
  const auto p = m.rows();
  if (p > 3) throw DomainError("grid oracle for F_infinity is limited to p <= 3");
  if (resolution < 3) throw DomainError("grid resolution must be at least 3");

  // The ratio is invariant to scaling, so the cube boundary suffices but the
  // full cube is cheap at p <= 3.
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  Eigen::VectorXd v(p);
  double best = std::numeric_limits<double>::infinity();
  long total = 1;
  for (Eigen::Index j = 0; j < p; ++j) total *= resolution;
  for (long code = 0; code < total; ++code) {
    long rest = code;
    for (Eigen::Index j = 0; j < p; ++j) {
      v[j] = -1.0 + 2.0 * static_cast<double>(rest % resolution) / (resolution - 1);
      rest /= resolution;
    }
    if (!cone.contains(v)) continue;
    best = std::min(best, cone.ratio(m, v));
  }
  FInftyEstimate out;
  out.value = best;
  out.method = FInftyEstimate::Method::grid_oracle;
  out.samples = static_cast<int>(total);
  out.support = support;
  return out;
}

namespace {

double poly(const double* c, int order, double x) {
  double value = c[order - 1];
  for (int i = order - 2; i >= 0; --i) value = value * x + c[i];
  return value;
}

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

double normal_quantile(double p) { return boost::math::quantile(kStdNormal, p); }
double normal_upper(double x, double mean = 0.0, double sd = 1.0) {
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(mean, sd), x));
}

// Royston (1995) polynomial approximations.
constexpr double kC1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
constexpr double kC2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kC3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
constexpr double kC4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kC5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kC6[] = {-0.4803, -0.082676, 0.0030302};
constexpr double kG[] = {-2.273, 0.459};

double shapiro_w(Eigen::VectorXd x) {
  const auto n = x.size();
  std::sort(x.data(), x.data() + n);
  const double mean = x.mean();
  const double ssq = (x.array() - mean).square().sum();
  if (!(ssq > 0.0) || x[n - 1] - x[0] < 1e-300) {
    throw DomainError("Shapiro-Wilk: sample has zero variance");
  }
  const auto half = n / 2;
  std::vector<double> a(static_cast<std::size_t>(half));
  if (n == 3) {
    a[0] = std::numbers::sqrt2 / 2.0;
  } else {
    const double an25 = static_cast<double>(n) + 0.25;
    std::vector<double> mq(static_cast<std::size_t>(half));
    double summ2 = 0.0;
    for (Eigen::Index i = 0; i < half; ++i) {
      mq[static_cast<std::size_t>(i)] = normal_quantile((static_cast<double>(i + 1) - 0.375) / an25);
      summ2 += mq[static_cast<std::size_t>(i)] * mq[static_cast<std::size_t>(i)];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
    const double a1 = poly(kC1, 6, rsn) - mq[0] / ssumm2;
    std::size_t first;
    double fac;
    if (n > 5) {
      first = 2;
      const double a2 = -mq[1] / ssumm2 + poly(kC2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * mq[0] * mq[0] - 2.0 * mq[1] * mq[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      first = 1;
      fac = std::sqrt((summ2 - 2.0 * mq[0] * mq[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first; i < static_cast<std::size_t>(half); ++i) a[i] = -mq[i] / fac;
  }
  double numer = 0.0;
  for (Eigen::Index i = 0; i < half; ++i) {
    numer += a[static_cast<std::size_t>(i)] * (x[n - 1 - i] - x[i]);
  }
  return std::min(1.0, numer * numer / ssq);
}

double shapiro_p_value(double w, Eigen::Index n) {
  if (n == 3) {
    constexpr double pi6 = 6.0 / std::numbers::pi;
    constexpr double stqr = std::numbers::pi / 3.0;  // asin(sqrt(3/4))
    return std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
  }
  if (w >= 1.0) return 1.0;
  const double nn = static_cast<double>(n);
  double y = std::log1p(-w);
  double m;
  double s;
  if (n <= 11) {
    const double gamma = poly(kG, 2, nn);
    if (y >= gamma) return 1e-99;
    y = -std::log(gamma - y);
    m = poly(kC3, 4, nn);
    s = std::exp(poly(kC4, 4, nn));
  } else {
    const double xx = std::log(nn);
    m = poly(kC5, 4, xx);
    s = std::exp(poly(kC6, 3, xx));
  }
  return std::clamp(normal_upper(y, m, s), 0.0, 1.0);
}

// Royston's normalizing transform of W to an approximate N(0,1) deviate.
double shapiro_z(double w, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  const double w1 = std::log1p(-std::min(w, 1.0 - 1e-16));
  if (n <= 11) {
    const double gamma = poly(kG, 2, nn);
    const double m = poly(kC3, 4, nn);
    const double s = std::exp(poly(kC4, 4, nn));
    const double inner = std::max(gamma - w1, 1e-300);
    return (-std::log(inner) - m) / s;
  }
  const double xx = std::log(nn);
  return (w1 - poly(kC5, 4, xx)) / std::exp(poly(kC6, 3, xx));
}

void check_sw_size(Eigen::Index n) {
  if (n < 3 || n > 5000) {
    throw DomainError("Shapiro-Wilk requires 3 <= n <= 5000, got n = " + std::to_string(n));
  }
}

}  // namespace

NormalityReport shapiro_wilk(const Eigen::VectorXd& sample) {
  check_sw_size(sample.size());
  if (!sample.allFinite()) throw DomainError("Shapiro-Wilk: sample contains non-finite values");
  NormalityReport out;
  out.test = NormalityReport::Test::shapiro_wilk;
  out.n = static_cast<int>(sample.size());
  out.dimension = 1;
  out.statistic = shapiro_w(sample);
  out.p_value = shapiro_p_value(out.statistic, sample.size());
  return out;
}

NormalityReport royston_test(const Eigen::MatrixXd& sample) {
  const auto n = sample.rows();
  const auto d = sample.cols();
  if (d < 2) throw DomainError("Royston test needs at least two columns");
  if (n < 4 || n > 5000) {
    throw DomainError("Royston test requires 4 <= n <= 5000, got n = " + std::to_string(n));
  }
  if (!sample.allFinite()) throw DomainError("Royston test: sample contains non-finite values");

  const Eigen::MatrixXd centered = sample.rowwise() - sample.colwise().mean();
  const Eigen::VectorXd sd = (centered.colwise().squaredNorm() / static_cast<double>(n - 1))
                                 .cwiseSqrt()
                                 .transpose();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(sd[j] > 0.0)) throw DomainError("Royston test: degenerate column " + std::to_string(j));
  }
  Eigen::MatrixXd corr = centered.transpose() * centered / static_cast<double>(n - 1);
  corr = sd.cwiseInverse().asDiagonal() * corr * sd.cwiseInverse().asDiagonal();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (std::abs(corr(i, j)) > 1.0 - 1e-10) {
        throw DomainError("Royston test: columns " + std::to_string(i) + " and " +
                          std::to_string(j) + " are perfectly correlated");
      }
    }
  }

  double h_sum = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double w = shapiro_w(sample.col(j));
    const double z = shapiro_z(w, n);
    const double q = normal_quantile(std::clamp(0.5 * normal_upper(z), 1e-300, 0.5));
    h_sum += q * q;
  }

  // Equivalent degrees of freedom from the average transformed correlation.
  const double log_n = std::log(static_cast<double>(n));
  constexpr double u = 0.715;
  const double v = 0.21364 + 0.015124 * log_n * log_n - 0.0018034 * log_n * log_n * log_n;
  constexpr double l = 5.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) continue;
      const double c = corr(i, j);
      total += std::pow(c, l) * (1.0 - u * std::pow(1.0 - c, u) / v);
    }
  }
  const double dd = static_cast<double>(d);
  const double mean_c = total / (dd * dd - dd);
  const double edf = dd / (1.0 + (dd - 1.0) * mean_c);

  NormalityReport out;
  out.test = NormalityReport::Test::royston_h;
  out.n = static_cast<int>(n);
  out.dimension = static_cast<int>(d);
  out.degrees_of_freedom = edf;
  out.statistic = edf * h_sum / dd;
  out.p_value = std::clamp(
      boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(edf),
                                               out.statistic)),
      0.0, 1.0);
  return out;
}

MetricRecord selection_and_errors(const Eigen::VectorXd& theta_est,
                                  const Eigen::VectorXd& theta_true,
                                  const std::vector<int>& support_est,
                                  const std::vector<int>& support_true) {
  if (theta_est.size() != theta_true.size()) throw DimensionError("estimate and truth lengths differ");
  MetricRecord out;
  const Eigen::VectorXd diff = theta_est - theta_true;
  out.linf_error = diff.size() > 0 ? diff.lpNorm<Eigen::Infinity>() : 0.0;
  out.l2_error = diff.norm();
  std::vector<int> a = support_est;
  std::vector<int> b = support_true;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  out.exact_support = a == b;
  return out;
}

}  // namespace sparsets::diagnostics
