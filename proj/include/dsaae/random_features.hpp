#ifndef DSAAE_RANDOM_FEATURES_HPP
#define DSAAE_RANDOM_FEATURES_HPP

// Random Fourier features for the Gaussian RBF kernel.
//
// Frequencies w_m ~ N(0, I / sigma^2). The complex feature exp(-i w.x) is
// carried as the real pair (cos w.x, sin w.x), scaled by 1/sqrt(M), so that
//   phi(x) . phi(y) = (1/M) sum_m cos(w_m . (x - y))  ->  k_sigma(x, y).
// Layout of a feature row: [cos_1 .. cos_M, sin_1 .. sin_M].

#include <cmath>
#include <cstdint>

#include "dsaae/core.hpp"
#include "dsaae/rng.hpp"

namespace dsaae {

struct RandomFeatureMap {
  Matrix frequencies;  // M x d
  double sigma = 1.0;
  std::uint64_t seed = 0;

  Index count() const { return frequencies.rows(); }
  Index input_dim() const { return frequencies.cols(); }
  Index feature_dim() const { return 2 * frequencies.rows(); }
};

/// Draws an M x d frequency matrix; bit-exactly reproducible from (M, d, sigma, seed).
inline RandomFeatureMap sample_directions(Index count, Index dim, double sigma, std::uint64_t seed) {
  require(count >= 1, "sample_directions: feature count must be >= 1");
  require(dim >= 1, "sample_directions: dimension must be >= 1");
  require(sigma > 0.0 && std::isfinite(sigma), "sample_directions: sigma must be > 0");
  Rng rng = make_rng({seed, 0x5246465ull});
  RandomFeatureMap map;
  map.frequencies = standard_normal(count, dim, rng) / sigma;
  map.sigma = sigma;
  map.seed = seed;
  return map;
}

/// n x 2M feature matrix; every row has unit Euclidean norm.
inline Matrix feature_map(const RandomFeatureMap& map, const Matrix& x) {
  require_shape(x.cols() == map.input_dim(),
                "feature_map: input has " + std::to_string(x.cols()) + " columns, map expects " +
                    std::to_string(map.input_dim()));
  const Index m = map.count();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  const Matrix proj = x * map.frequencies.transpose();  // n x M
  Matrix out(x.rows(), 2 * m);
  for (Index i = 0; i < x.rows(); ++i) {
    const double* p = proj.data() + i * m;
    double* row = out.data() + i * 2 * m;
    for (Index k = 0; k < m; ++k) {
      row[k] = std::cos(p[k]) * scale;
      row[m + k] = std::sin(p[k]) * scale;
    }
  }
  return out;
}

inline double approx_kernel(const RandomFeatureMap& map, const RowVector& x, const RowVector& y) {
  require_shape(x.size() == map.input_dim() && y.size() == map.input_dim(),
                "approx_kernel: dimension mismatch");
  const Matrix fx = feature_map(map, x);
  const Matrix fy = feature_map(map, y);
  return fx.row(0).dot(fy.row(0));
}

/// Biased MMD^2 under the random-feature kernel, evaluated pair by pair as
/// (1/M) sum_m cos(w_m . (a - b)).
inline double rff_mmd2_biased(const RandomFeatureMap& map, const Matrix& x, const Matrix& y) {
  require(x.rows() >= 1 && y.rows() >= 1, "rff_mmd2_biased: empty sample set");
  require_shape(x.cols() == map.input_dim() && y.cols() == map.input_dim(),
                "rff_mmd2_biased: dimension mismatch");
  const double inv_m = 1.0 / static_cast<double>(map.count());
  auto k = [&](const auto& a, const auto& b) {
    return (map.frequencies * (a - b).transpose()).array().cos().sum() * inv_m;
  };
  auto mean_k = [&](const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < b.rows(); ++j) s += k(a.row(i), b.row(j));
    return s / static_cast<double>(a.rows() * b.rows());
  };
  return mean_k(x, x) + mean_k(y, y) - 2.0 * mean_k(x, y);
}

}  // namespace dsaae

#endif  // DSAAE_RANDOM_FEATURES_HPP
