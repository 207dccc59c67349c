#ifndef DSAAE_TESTS_TEST_SUPPORT_HPP
#define DSAAE_TESTS_TEST_SUPPORT_HPP

// Test-only oracles: central finite differences and small fixture builders.
// Nothing here calls into the analytic gradient code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "dsaae/core.hpp"
#include "dsaae/nn.hpp"
#include "dsaae/rng.hpp"

namespace dsaae::testing {

inline constexpr double kFdStep = 1e-5;

/// Central differences of a scalar function of a matrix, entry by entry.
inline Matrix numeric_grad(const std::function<double(const Matrix&)>& f, Matrix at, double h = kFdStep) {
  Matrix g(at.rows(), at.cols());
  for (Index k = 0; k < at.size(); ++k) {
    const double keep = at.data()[k];
    at.data()[k] = keep + h;
    const double up = f(at);
    at.data()[k] = keep - h;
    const double down = f(at);
    at.data()[k] = keep;
    g.data()[k] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Central differences with respect to every weight and bias of `net`.
inline MlpGrads numeric_grads(const std::function<double(const Mlp&)>& f, Mlp net, double h = kFdStep) {
  MlpGrads g = MlpGrads::zeros_like(net);
  auto probe = [&](double& slot) {
    const double keep = slot;
    slot = keep + h;
    const double up = f(net);
    slot = keep - h;
    const double down = f(net);
    slot = keep;
    return (up - down) / (2.0 * h);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (Index k = 0; k < net.layers[l].weight.size(); ++k)
      g.layers[l].weight.data()[k] = probe(net.layers[l].weight.data()[k]);
    for (Index k = 0; k < net.layers[l].bias.size(); ++k)
      g.layers[l].bias.data()[k] = probe(net.layers[l].bias.data()[k]);
  }
  return g;
}

/// Norm-wise relative error |a - b| / max(|a|, |b|), with a floor for all-zero pairs.
inline double rel_err(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / denom;
}

inline Vector flatten(const MlpGrads& g) {
  Index n = 0;
  for (const auto& l : g.layers) n += l.weight.size() + l.bias.size();
  Vector v(n);
  Index o = 0;
  for (const auto& l : g.layers) {
    v.segment(o, l.weight.size()) = Eigen::Map<const Vector>(l.weight.data(), l.weight.size());
    o += l.weight.size();
    v.segment(o, l.bias.size()) = l.bias;
    o += l.bias.size();
  }
  return v;
}

inline double rel_err(const MlpGrads& a, const MlpGrads& b) {
  const Vector fa = flatten(a), fb = flatten(b);
  return (fa - fb).norm() / std::max({fa.norm(), fb.norm(), 1e-12});
}

/// Random MLP with random (non-zero) biases so that every parameter matters.
inline Mlp random_mlp(const std::vector<Index>& dims, Activation hidden, Activation output, Rng& rng) {
  Mlp net = make_mlp(dims, hidden, output, rng);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& l : net.layers)
    for (Index k = 0; k < l.bias.size(); ++k) l.bias(k) = u(rng);
  return net;
}

/// Smallest |pre-activation| of any relu unit over the rows of `x`. Central
/// differences are meaningless within one step of a kink, so callers redraw
/// instances whose margin is below a threshold.
inline double relu_margin(const Mlp& net, const Matrix& x) {
  double margin = INFINITY;
  Matrix a = x;
  for (const auto& l : net.layers) {
    Matrix z = (a * l.weight.transpose()).rowwise() + l.bias.transpose();
    if (l.activation == Activation::relu) {
      margin = std::min(margin, z.cwiseAbs().minCoeff());
      z = z.cwiseMax(0.0);
    } else if (l.activation == Activation::sigmoid) {
      z = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    }
    a = std::move(z);
  }
  return margin;
}

inline constexpr double kKinkMargin = 1e-3;

inline Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dsaae_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace dsaae::testing

#endif  // DSAAE_TESTS_TEST_SUPPORT_HPP
