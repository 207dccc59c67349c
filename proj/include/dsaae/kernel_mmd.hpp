#ifndef DSAAE_KERNEL_MMD_HPP
#define DSAAE_KERNEL_MMD_HPP

// Gaussian RBF kernels and closed-form MMD^2 estimators.
//
// k_sigma(x, y) = exp(-|x - y|^2 / (2 sigma^2)); a KernelSpec is a weighted
// sum of these over a list of bandwidths.

#include <cmath>
#include <string>
#include <vector>

#include "dsaae/core.hpp"

namespace dsaae {

struct KernelSpec {
  std::vector<double> bandwidths{1.0};
  std::vector<double> weights;  // empty = all ones

  KernelSpec() = default;
  explicit KernelSpec(std::vector<double> sigmas, std::vector<double> w = {})
      : bandwidths(std::move(sigmas)), weights(std::move(w)) {
    validate();
  }

  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }

  void validate() const {
    require(!bandwidths.empty(), "kernel: bandwidth list is empty");
    for (double s : bandwidths) require(s > 0.0 && std::isfinite(s), "kernel: bandwidth must be > 0");
    require(weights.empty() || weights.size() == bandwidths.size(),
            "kernel: weights must match bandwidths");
    for (double w : weights) require(std::isfinite(w), "kernel: non-finite weight");
  }
};

inline double rbf_kernel(const RowVector& x, const RowVector& y, double sigma) {
  require_shape(x.size() == y.size(), "rbf_kernel: dimension mismatch");
  require(sigma > 0.0, "rbf_kernel: sigma must be > 0");
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

/// Exact pairwise squared distances (no |a|^2 + |b|^2 - 2ab expansion).
inline Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b) {
  require_shape(a.cols() == b.cols(), "pairwise_sq_dists: dimension mismatch");
  const Index d = a.cols();
  Matrix out(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    const double* ai = a.data() + i * d;
    double* row = out.data() + i * b.rows();
    for (Index j = 0; j < b.rows(); ++j) {
      const double* bj = b.data() + j * d;
      double acc = 0.0;
      for (Index k = 0; k < d; ++k) {
        const double t = ai[k] - bj[k];
        acc += t * t;
      }
      row[j] = acc;
    }
  }
  return out;
}

inline Matrix rbf_gram(const Matrix& sq_dists, double sigma) {
  return (sq_dists.array() * (-1.0 / (2.0 * sigma * sigma))).exp().matrix();
}

namespace detail {

inline void check_mmd_inputs(const Matrix& x, const Matrix& y, const KernelSpec& spec,
                             Index min_rows, const char* op) {
  spec.validate();
  require(x.rows() >= min_rows && y.rows() >= min_rows,
          std::string(op) + ": each sample set needs at least " + std::to_string(min_rows) + " rows");
  require_shape(x.cols() == y.cols(), std::string(op) + ": sample dimensions differ");
}

}  // namespace detail

/// Biased (V-statistic) MMD^2: diagonal terms included.
inline double mmd2_biased(const Matrix& x, const Matrix& y, const KernelSpec& spec) {
  detail::check_mmd_inputs(x, y, spec, 1, "mmd2_biased");
  const double n = static_cast<double>(x.rows()), m = static_cast<double>(y.rows());
  const Matrix dxx = pairwise_sq_dists(x, x), dyy = pairwise_sq_dists(y, y), dxy = pairwise_sq_dists(x, y);
  double total = 0.0;
  for (std::size_t s = 0; s < spec.bandwidths.size(); ++s) {
    const double sigma = spec.bandwidths[s];
    total += spec.weight(s) * (rbf_gram(dxx, sigma).sum() / (n * n) +
                               rbf_gram(dyy, sigma).sum() / (m * m) -
                               2.0 * rbf_gram(dxy, sigma).sum() / (n * m));
  }
  return total;
}

/// Unbiased (U-statistic) MMD^2: within-set diagonals excluded. Can be negative.
inline double mmd2_unbiased(const Matrix& x, const Matrix& y, const KernelSpec& spec) {
  detail::check_mmd_inputs(x, y, spec, 2, "mmd2_unbiased");
  const double n = static_cast<double>(x.rows()), m = static_cast<double>(y.rows());
  const Matrix dxx = pairwise_sq_dists(x, x), dyy = pairwise_sq_dists(y, y), dxy = pairwise_sq_dists(x, y);
  double total = 0.0;
  for (std::size_t s = 0; s < spec.bandwidths.size(); ++s) {
    const double sigma = spec.bandwidths[s];
    const Matrix kxx = rbf_gram(dxx, sigma), kyy = rbf_gram(dyy, sigma);
    total += spec.weight(s) * ((kxx.sum() - kxx.trace()) / (n * (n - 1.0)) +
                               (kyy.sum() - kyy.trace()) / (m * (m - 1.0)) -
                               2.0 * rbf_gram(dxy, sigma).sum() / (n * m));
  }
  return total;
}

struct Mmd2WithGrad {
  double value = 0.0;
  Matrix grad_y;  // m x d
};

/// mmd2_biased and its gradient with respect to every entry of `y`, sharing
/// the kernel evaluations.
///
/// For k(a, b) = exp(-|a - b|^2 / 2s^2), dk/da = -k (a - b) / s^2, so
///   dMMD^2/dy_j = -(2 / m^2 s^2) sum_l k(y_j, y_l)(y_j - y_l)
///                 + (2 / n m s^2) sum_i k(x_i, y_j)(y_j - x_i).
inline Mmd2WithGrad mmd2_biased_with_grad(const Matrix& x, const Matrix& y, const KernelSpec& spec) {
  detail::check_mmd_inputs(x, y, spec, 1, "mmd2_biased_with_grad");
  const double n = static_cast<double>(x.rows()), m = static_cast<double>(y.rows());
  const Matrix dxx = pairwise_sq_dists(x, x), dyy = pairwise_sq_dists(y, y), dxy = pairwise_sq_dists(x, y);
  Mmd2WithGrad r;
  r.grad_y = Matrix::Zero(y.rows(), y.cols());
  for (std::size_t s = 0; s < spec.bandwidths.size(); ++s) {
    const double sigma = spec.bandwidths[s];
    const double inv_s2 = 1.0 / (sigma * sigma);
    const Matrix kyy = rbf_gram(dyy, sigma);
    const Matrix kxy = rbf_gram(dxy, sigma);  // n x m
    r.value += spec.weight(s) * (rbf_gram(dxx, sigma).sum() / (n * n) + kyy.sum() / (m * m) -
                                 2.0 * kxy.sum() / (n * m));
    // within-Y term: diag(K 1) Y - K Y
    Matrix g_yy = (y.array().colwise() * kyy.rowwise().sum().array()).matrix() - kyy * y;
    g_yy *= -2.0 * inv_s2 / (m * m);
    // cross term: diag(K^T 1) Y - K^T X
    Matrix g_xy = (y.array().colwise() * kxy.colwise().sum().transpose().array()).matrix() -
                  kxy.transpose() * x;
    g_xy *= 2.0 * inv_s2 / (n * m);
    r.grad_y += spec.weight(s) * (g_yy + g_xy);
  }
  return r;
}

/// d mmd2_biased / d y for every entry of `y`.
inline Matrix mmd2_biased_grad_wrt_Y(const Matrix& x, const Matrix& y, const KernelSpec& spec) {
  return mmd2_biased_with_grad(x, y, spec).grad_y;
}

}  // namespace dsaae

#endif  // DSAAE_KERNEL_MMD_HPP
