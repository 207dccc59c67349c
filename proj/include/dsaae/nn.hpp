#ifndef DSAAE_NN_HPP
#define DSAAE_NN_HPP

// Dense multilayer perceptrons with hand-written backpropagation,
// inverted input dropout, Bernoulli cross-entropy and Adam.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dsaae/core.hpp"
#include "dsaae/rng.hpp"

namespace dsaae {

enum class Activation : std::uint8_t { identity = 0, relu = 1, sigmoid = 2 };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::identity;

  Index in_dim() const { return weight.cols(); }
  Index out_dim() const { return weight.rows(); }
};

/// Ordered stack of affine+activation layers. `version` changes on every
/// in-place update so that a forward cache can be matched to the exact
/// parameters it was computed with.
struct Mlp {
  std::vector<Layer> layers;
  std::uint64_t version = 0;

  Index in_dim() const { return layers.front().in_dim(); }
  Index out_dim() const { return layers.back().out_dim(); }

  void validate() const {
    require(!layers.empty(), "mlp has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      require_shape(l.bias.size() == l.out_dim(), "layer " + std::to_string(i) + ": bias size");
      if (i + 1 < layers.size())
        require_shape(l.out_dim() == layers[i + 1].in_dim(),
                      "layer " + std::to_string(i) + ": output does not chain into next layer");
      require_finite(l.weight, "layer weight");
      require_finite(l.bias, "layer bias");
    }
  }
};

inline bool operator==(const Layer& a, const Layer& b) {
  return a.activation == b.activation && a.weight.rows() == b.weight.rows() &&
         a.weight.cols() == b.weight.cols() && a.weight == b.weight && a.bias == b.bias;
}

/// Bitwise parameter equality (ignores the version counter).
inline bool same_parameters(const Mlp& a, const Mlp& b) {
  return a.layers == b.layers;
}

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
/// `dims` = {input, hidden..., output}; hidden layers use `hidden`, the last
/// layer uses `output`.
inline Mlp make_mlp(const std::vector<Index>& dims, Activation hidden, Activation output,
                    Rng& rng) {
  require(dims.size() >= 2, "mlp needs at least input and output dims");
  for (auto d : dims) require(d >= 1, "mlp layer dims must be >= 1");
  Mlp net;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const Index in = dims[i], out = dims[i + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Layer l;
    l.weight.resize(out, in);
    for (Index k = 0; k < l.weight.size(); ++k) l.weight.data()[k] = u(rng);
    l.bias = Vector::Zero(out);
    l.activation = (i + 2 == dims.size()) ? output : hidden;
    net.layers.push_back(std::move(l));
  }
  return net;
}

struct ForwardCache {
  std::uint64_t params_version = 0;
  std::vector<Index> layer_dims;   // mirrors the params the cache came from
  Matrix mask;                     // empty when no dropout was applied
  std::vector<Matrix> inputs;      // input to each layer (post-dropout for layer 0)
  std::vector<Matrix> outputs;     // activation output of each layer
  bool consumed = false;
};

namespace detail {

inline void apply_activation(Activation a, Matrix& m) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: m = m.cwiseMax(0.0); break;
    case Activation::sigmoid: m = (1.0 + (-m.array()).exp()).inverse().matrix(); break;
  }
}

inline std::vector<Index> layer_dims(const Mlp& net) {
  std::vector<Index> d{net.in_dim()};
  for (const auto& l : net.layers) d.push_back(l.out_dim());
  return d;
}

}  // namespace detail

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

/// Batch forward pass (rows are examples). Inverted dropout is applied to the
/// input only, and only in train mode; eval mode never touches `rng`.
inline ForwardResult mlp_forward(const Mlp& net, const Matrix& input, double dropout_rate,
                                 Rng& rng, bool train_mode) {
  require_shape(input.cols() == net.in_dim(),
                "mlp_forward: input has " + std::to_string(input.cols()) + " columns, expected " +
                    std::to_string(net.in_dim()));
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, "mlp_forward: dropout rate must be in [0,1)");
  require_finite(input, "mlp_forward input");

  ForwardResult r;
  r.cache.params_version = net.version;
  r.cache.layer_dims = detail::layer_dims(net);

  Matrix x = input;
  if (train_mode && dropout_rate > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - dropout_rate);
    r.cache.mask.resize(input.rows(), input.cols());
    for (Index k = 0; k < r.cache.mask.size(); ++k)
      r.cache.mask.data()[k] = u(rng) < dropout_rate ? 0.0 : keep_scale;
    x = x.cwiseProduct(r.cache.mask);
  }

  for (const auto& l : net.layers) {
    Matrix z = x * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    detail::apply_activation(l.activation, z);
    r.cache.inputs.push_back(std::move(x));
    r.cache.outputs.push_back(z);
    x = std::move(z);
  }
  r.output = std::move(x);
  return r;
}

inline Matrix mlp_predict(const Mlp& net, const Matrix& input) {
  Rng unused(0);
  return mlp_forward(net, input, 0.0, unused, false).output;
}

struct LayerGrad {
  Matrix weight;
  Vector bias;
};

struct MlpGrads {
  std::vector<LayerGrad> layers;

  static MlpGrads zeros_like(const Mlp& net) {
    MlpGrads g;
    for (const auto& l : net.layers)
      g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    return g;
  }

  MlpGrads& operator+=(const MlpGrads& o) {
    require_shape(o.layers.size() == layers.size(), "gradient layer count mismatch");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].weight += o.layers[i].weight;
      layers[i].bias += o.layers[i].bias;
    }
    return *this;
  }

  bool all_finite() const {
    for (const auto& l : layers)
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }
};

struct BackwardResult {
  MlpGrads grads;
  Matrix input_grad;
};

/// Reverse pass for the forward that produced `cache`. The cache is single-use.
inline BackwardResult mlp_backward(const Mlp& net, ForwardCache& cache, const Matrix& output_grad) {
  if (cache.consumed) throw contract_error("mlp_backward: cache already consumed");
  if (cache.params_version != net.version || cache.layer_dims != detail::layer_dims(net) ||
      cache.outputs.size() != net.layers.size())
    throw contract_error("mlp_backward: cache does not belong to these parameters");
  require_shape(output_grad.rows() == cache.outputs.back().rows() &&
                    output_grad.cols() == cache.outputs.back().cols(),
                "mlp_backward: output_grad " + dims(output_grad) + " vs output " +
                    dims(cache.outputs.back()));

  BackwardResult r;
  r.grads.layers.resize(net.layers.size());
  Matrix delta = output_grad;
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const auto& l = net.layers[li];
    const Matrix& out = cache.outputs[li];
    switch (l.activation) {
      case Activation::identity: break;
      case Activation::relu: delta = (out.array() > 0.0).select(delta, 0.0); break;
      case Activation::sigmoid:
        delta = delta.cwiseProduct((out.array() * (1.0 - out.array())).matrix());
        break;
    }
    r.grads.layers[li].weight = delta.transpose() * cache.inputs[li];
    r.grads.layers[li].bias = delta.colwise().sum().transpose();
    delta = delta * l.weight;
  }
  if (cache.mask.size() != 0) delta = delta.cwiseProduct(cache.mask);
  r.input_grad = std::move(delta);
  cache.consumed = true;
  return r;
}

inline constexpr double kProbClamp = 1e-7;

struct LossResult {
  double loss = 0.0;
  Matrix grad;
};

/// Mean over the batch of the summed per-pixel Bernoulli negative
/// log-likelihood. Predictions are clamped to [1e-7, 1-1e-7].
inline LossResult bernoulli_cross_entropy(const Matrix& pred, const Matrix& target) {
  require_shape(pred.rows() == target.rows() && pred.cols() == target.cols(),
                "bernoulli_cross_entropy: pred " + dims(pred) + " vs target " + dims(target));
  require(pred.rows() >= 1, "bernoulli_cross_entropy: empty batch");
  const double n = static_cast<double>(pred.rows());
  const auto p = pred.array().max(kProbClamp).min(1.0 - kProbClamp);
  const auto t = target.array();
  LossResult r;
  r.loss = -(t * p.log() + (1.0 - t) * (1.0 - p).log()).sum() / n;
  r.grad = ((-(t / p) + (1.0 - t) / (1.0 - p)) / n).matrix();
  return r;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment buffers for one Mlp.
struct AdamState {
  AdamConfig config;
  std::uint64_t t = 0;
  MlpGrads m;
  MlpGrads v;

  AdamState() = default;
  AdamState(const Mlp& net, AdamConfig cfg)
      : config(cfg), m(MlpGrads::zeros_like(net)), v(MlpGrads::zeros_like(net)) {}
};

/// Bias-corrected Adam update. Non-finite gradients abort the step before any
/// state or parameter changes.
inline void adam_step(AdamState& state, Mlp& net, const MlpGrads& grads) {
  require_shape(grads.layers.size() == net.layers.size() && state.m.layers.size() == net.layers.size(),
                "adam_step: layer count mismatch");
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    require_shape(grads.layers[i].weight.rows() == l.weight.rows() &&
                      grads.layers[i].weight.cols() == l.weight.cols() &&
                      grads.layers[i].bias.size() == l.bias.size(),
                  "adam_step: gradient shape mismatch at layer " + std::to_string(i));
  }
  if (!grads.all_finite()) throw validation_error("adam_step: non-finite gradient");

  const auto& c = state.config;
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(c.beta1, t);
  const double c2 = 1.0 - std::pow(c.beta2, t);

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    const auto denom = (v.array() / c2).sqrt() + c.epsilon;
    // a zero denominator implies a zero first moment; with epsilon = 0 that is 0/0
    param.array() -= (denom > 0.0).select(c.lr * (m.array() / c1) / denom, 0.0);
  };
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    update(net.layers[i].weight, state.m.layers[i].weight, state.v.layers[i].weight,
           grads.layers[i].weight);
    update(net.layers[i].bias, state.m.layers[i].bias, state.v.layers[i].bias, grads.layers[i].bias);
  }
  ++net.version;
}

}  // namespace dsaae

#endif  // DSAAE_NN_HPP
