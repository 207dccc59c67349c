#ifndef DSAAE_PARZEN_HPP
#define DSAAE_PARZEN_HPP

// Parzen-window (isotropic Gaussian KDE) log-likelihood of test data under a
// set of generated samples, with bandwidth selection on a validation set.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "dsaae/core.hpp"

namespace dsaae {

struct ParzenModel {
  Matrix centers;  // S x d
  double sigma = 1.0;

  void validate() const {
    require(centers.rows() >= 1, "parzen: need at least one center");
    require(sigma > 0.0 && std::isfinite(sigma), "parzen: sigma must be > 0");
  }
};

namespace detail {

inline double log_sum_exp(const Eigen::Ref<const RowVector>& v) {
  const double mx = v.maxCoeff();
  return mx + std::log((v.array() - mx).exp().sum());
}

inline double gaussian_log_norm(Index dim, double sigma) {
  return -0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * sigma * sigma);
}

/// |q_i - c_j|^2 via the expanded form, clamped at zero.
inline Matrix sq_dists_expanded(const Matrix& queries, const Matrix& centers, const Vector& center_norms) {
  Matrix d = -2.0 * (queries * centers.transpose());
  d.colwise() += queries.rowwise().squaredNorm();
  d.rowwise() += center_norms.transpose();
  return d.cwiseMax(0.0);
}

/// Per-query log densities from a block of squared distances.
inline Vector log_densities_from_sq(const Matrix& sq, Index dim, double sigma) {
  const double inv = -1.0 / (2.0 * sigma * sigma);
  const double shift = gaussian_log_norm(dim, sigma) - std::log(static_cast<double>(sq.cols()));
  Vector out(sq.rows());
  for (Index i = 0; i < sq.rows(); ++i) out(i) = log_sum_exp(sq.row(i) * inv) + shift;
  return out;
}

}  // namespace detail

/// log[(1/S) sum_s N(x; c_s, sigma^2 I)], stable under log-sum-exp.
inline double parzen_log_density(const ParzenModel& model, const RowVector& x) {
  model.validate();
  require_shape(x.size() == model.centers.cols(), "parzen_log_density: dimension mismatch");
  RowVector sq(model.centers.rows());
  for (Index s = 0; s < model.centers.rows(); ++s) sq(s) = (model.centers.row(s) - x).squaredNorm();
  const double inv = -1.0 / (2.0 * model.sigma * model.sigma);
  return detail::log_sum_exp(sq * inv) - std::log(static_cast<double>(model.centers.rows())) +
         detail::gaussian_log_norm(x.size(), model.sigma);
}

/// Log density of every row of `points`, `batch` rows at a time.
inline Vector parzen_log_densities(const ParzenModel& model, const Matrix& points, Index batch = 256) {
  model.validate();
  require_shape(points.cols() == model.centers.cols(), "parzen: dimension mismatch");
  require(batch >= 1, "parzen: batch must be >= 1");
  const Vector norms = model.centers.rowwise().squaredNorm();
  Vector out(points.rows());
  for (Index b = 0; b < points.rows(); b += batch) {
    const Index len = std::min(batch, points.rows() - b);
    const Matrix sq = detail::sq_dists_expanded(points.middleRows(b, len), model.centers, norms);
    out.segment(b, len) = detail::log_densities_from_sq(sq, points.cols(), model.sigma);
  }
  return out;
}

/// `count` log-spaced values from lo to hi inclusive.
inline std::vector<double> log_spaced_grid(double lo, double hi, Index count) {
  require(lo > 0.0 && hi >= lo, "bandwidth grid: need 0 < lo <= hi");
  require(count >= 1, "bandwidth grid: count must be >= 1");
  if (count == 1) return {lo};
  std::vector<double> g;
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (Index i = 0; i < count; ++i) g.push_back(lo * std::exp(step * static_cast<double>(i)));
  g.back() = hi;
  return g;
}

/// Grid bandwidth maximizing mean validation log density; ties go to the smaller sigma.
inline double select_bandwidth(const Matrix& centers, const Matrix& validation, const std::vector<double>& grid,
                               Index batch = 256) {
  require(!grid.empty(), "select_bandwidth: empty grid");
  require(centers.rows() >= 1, "select_bandwidth: no centers");
  require(validation.rows() >= 1, "select_bandwidth: empty validation set");
  require_shape(centers.cols() == validation.cols(), "select_bandwidth: dimension mismatch");
  for (double s : grid) require(s > 0.0 && std::isfinite(s), "select_bandwidth: sigma must be > 0");

  const Vector norms = centers.rowwise().squaredNorm();
  std::vector<double> totals(grid.size(), 0.0);
  for (Index b = 0; b < validation.rows(); b += batch) {
    const Index len = std::min(batch, validation.rows() - b);
    const Matrix sq = detail::sq_dists_expanded(validation.middleRows(b, len), centers, norms);
    for (std::size_t g = 0; g < grid.size(); ++g)
      totals[g] += detail::log_densities_from_sq(sq, centers.cols(), grid[g]).sum();
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (totals[g] > totals[best] || (totals[g] == totals[best] && grid[g] < grid[best])) best = g;
  return grid[best];
}

struct LoglikEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean per-example log-likelihood and its standard error (sample std / sqrt(n)).
inline LoglikEstimate evaluate_loglik(const ParzenModel& model, const Matrix& test, Index batch = 256) {
  require(test.rows() >= 1, "evaluate_loglik: empty test set");
  const Vector ll = parzen_log_densities(model, test, batch);
  LoglikEstimate r;
  const double n = static_cast<double>(ll.size());
  r.mean = ll.mean();
  if (ll.size() > 1) {
    const double var = (ll.array() - r.mean).square().sum() / (n - 1.0);
    r.std_error = std::sqrt(var / n);
  }
  return r;
}

}  // namespace dsaae

#endif  // DSAAE_PARZEN_HPP
