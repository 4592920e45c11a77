#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace testsupport {

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t k = x.size() / 2;
  return x.size() % 2 == 1 ? x[k] : 0.5 * (x[k - 1] + x[k]);
}

// Standard error of the mean of a dependent series from `batches` contiguous
// batch means.
inline double batch_mean_se(const Eigen::VectorXd& x, int batches = 50) {
  const Eigen::Index len = x.size() / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) means.push_back(x.segment(b * len, len).mean());
  return std::sqrt(variance(means) / batches);
}

inline double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace testsupport
