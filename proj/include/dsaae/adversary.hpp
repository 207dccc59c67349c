#ifndef DSAAE_ADVERSARY_HPP
#define DSAAE_ADVERSARY_HPP

// Doubly stochastic adversary.
//
// The kernel mean-embedding gap between prior samples Y and generated
// samples Y~ is carried in random-feature space,
//   gap = mean_rows phi(Y) - mean_rows phi(Y~),
// and the adversary is f(z) = sum_c alpha_c * frozen_gap_c * phi_c(z), i.e.
// a coefficient-weighted combination of the per-frequency gradient terms.
// The adversary raises D = E f(Y) - E f(Y~) by ascending alpha; the
// generator lowers it by moving Y~ with f held fixed.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dsaae/core.hpp"
#include "dsaae/random_features.hpp"

namespace dsaae {

struct AdversaryConfig {
  double ascent_lr = 1e-3;
  double l2_decay = 0.01;
  double alpha_cap = 10.0;
};

struct AdversaryState {
  RandomFeatureMap map;
  Vector alpha;       // 2M
  Vector frozen_gap;  // 2M
  AdversaryConfig config;

  AdversaryState() = default;
  AdversaryState(RandomFeatureMap m, AdversaryConfig cfg)
      : map(std::move(m)),
        alpha(Vector::Zero(map.feature_dim())),
        frozen_gap(Vector::Zero(map.feature_dim())),
        config(cfg) {
    require(cfg.ascent_lr > 0.0, "adversary: ascent_lr must be > 0");
    require(cfg.l2_decay >= 0.0, "adversary: l2_decay must be >= 0");
    require(cfg.alpha_cap > 0.0, "adversary: alpha_cap must be > 0");
  }

  /// Per-feature weights of f, alpha (.) frozen_gap.
  Vector witness_weights() const { return alpha.cwiseProduct(frozen_gap); }
};

inline Vector embedding_gap(const Matrix& y_prior, const Matrix& y_gen, const RandomFeatureMap& map) {
  require(y_prior.rows() >= 1 && y_gen.rows() >= 1, "embedding_gap: empty batch");
  require_shape(y_prior.cols() == map.input_dim() && y_gen.cols() == map.input_dim(),
                "embedding_gap: batch dimension does not match feature map");
  return feature_map(map, y_prior).colwise().mean().transpose() -
         feature_map(map, y_gen).colwise().mean().transpose();
}

/// f(z_j) for every row of z.
inline Vector adversary_value(const AdversaryState& state, const Matrix& z) {
  return feature_map(state.map, z) * state.witness_weights();
}

/// D = mean f(Y_prior) - mean f(Y_gen).
inline double minimax_objective(const AdversaryState& state, const Matrix& y_prior, const Matrix& y_gen) {
  return state.witness_weights().dot(embedding_gap(y_prior, y_gen, state.map));
}

/// One ascent step with a precomputed gap: freeze it, then
/// alpha <- clip(alpha + lr * (gap^2 - decay * alpha), +-cap).
inline void adversary_ascend_with_gap(AdversaryState& state, const Vector& gap) {
  require_shape(gap.size() == state.alpha.size(), "adversary_ascend: gap size mismatch");
  const auto& c = state.config;
  Vector next = state.alpha + c.ascent_lr * (gap.cwiseProduct(gap) - c.l2_decay * state.alpha);
  if (!next.allFinite() || !gap.allFinite())
    throw validation_error("adversary_ascend: non-finite update");
  state.alpha = next.cwiseMax(-c.alpha_cap).cwiseMin(c.alpha_cap);
  state.frozen_gap = gap;
}

inline void adversary_ascend(AdversaryState& state, const Matrix& y_prior, const Matrix& y_gen) {
  adversary_ascend_with_gap(state, embedding_gap(y_prior, y_gen, state.map));
}

/// Gradient of -mean f(Y_gen) given the features phi(Y_gen) (n x 2M).
inline Matrix generator_grad_from_features(const AdversaryState& state, const Matrix& gen_features) {
  const Index m = state.map.count();
  require_shape(gen_features.cols() == 2 * m, "generator_grad: feature width mismatch");
  require(gen_features.rows() >= 1, "generator_grad: empty batch");
  const Vector a = state.witness_weights();
  // d phi_cos / dz = -phi_sin w, d phi_sin / dz = phi_cos w (per frequency)
  const Matrix coeff = (gen_features.rightCols(m).array().rowwise() * (-a.head(m).transpose().array()) +
                        gen_features.leftCols(m).array().rowwise() * a.tail(m).transpose().array())
                           .matrix();
  return (-1.0 / static_cast<double>(gen_features.rows())) * (coeff * state.map.frequencies);
}

/// Gradient of -mean f(Y_gen) with respect to every entry of Y_gen, f frozen.
inline Matrix generator_grad_wrt_Z(const AdversaryState& state, const Matrix& y_gen) {
  require(y_gen.rows() >= 1, "generator_grad_wrt_Z: empty batch");
  require_shape(y_gen.cols() == state.map.input_dim(),
                "generator_grad_wrt_Z: batch dimension does not match feature map");
  return generator_grad_from_features(state, feature_map(state.map, y_gen));
}

}  // namespace dsaae

#endif  // DSAAE_ADVERSARY_HPP
