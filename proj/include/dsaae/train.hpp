#ifndef DSAAE_TRAIN_HPP
#define DSAAE_TRAIN_HPP

// Training loops for the two prior-matching autoencoders.
//
//   mmd_ae : loss = CE(dec(enc(x)), x) + lambda * MMD^2(prior batch, enc(x))
//   ds_aae : alternating
//            1. reconstruction update of encoder + decoder
//            2. adversary ascent on alpha against a fresh prior batch
//            3. encoder update on lambda * (-mean f(enc(x))), f frozen
//
// Every source of randomness has its own seeded stream, so the
// reconstruction path of both variants consumes identical random numbers.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsaae/adversary.hpp"
#include "dsaae/core.hpp"
#include "dsaae/data.hpp"
#include "dsaae/kernel_mmd.hpp"
#include "dsaae/nn.hpp"
#include "dsaae/random_features.hpp"
#include "dsaae/rng.hpp"

namespace dsaae {

enum class Variant { mmd_ae, ds_aae };

inline std::string to_string(Variant v) { return v == Variant::mmd_ae ? "mmd_ae" : "ds_aae"; }

inline Variant parse_variant(const std::string& s) {
  if (s == "mmd_ae") return Variant::mmd_ae;
  if (s == "ds_aae") return Variant::ds_aae;
  throw validation_error("unknown variant '" + s + "' (expected mmd_ae or ds_aae)");
}

struct Seeds {
  std::uint64_t weights = 1;
  std::uint64_t data = 2;
  std::uint64_t features = 3;
  std::uint64_t prior = 4;
};

struct TrainConfig {
  Variant variant = Variant::ds_aae;
  Index latent_dim = -1;  // -1 = variant default (6 for ds_aae, 4 for mmd_ae)
  std::vector<Index> hidden_dims{1024, 512, 216};
  Index batch_size = 1000;
  double recon_lr = 1e-3;
  double adv_lr = 1e-3;
  std::int64_t epochs = 1000;
  std::int64_t max_steps = 0;  // 0 = no step limit
  double dropout_input = 0.2;
  std::vector<double> kernel_sigmas;  // empty = variant default
  std::vector<double> kernel_weights;
  Index feature_count = 500;
  double lambda = 1.0;
  std::int64_t adv_steps = 1;
  AdversaryConfig adversary{};
  bool resample_features = false;
  Seeds seeds{};

  /// Fills variant-dependent defaults.
  void resolve() {
    if (latent_dim == -1) latent_dim = variant == Variant::ds_aae ? 6 : 4;
    if (kernel_sigmas.empty())
      kernel_sigmas = variant == Variant::ds_aae ? std::vector<double>{1.0}
                                                 : std::vector<double>{2, 5, 10, 20, 40, 80};
  }

  void validate() const {
    require(latent_dim >= 1, "latent_dim must be >= 1");
    require(batch_size >= 2, "batch_size must be >= 2");
    require(recon_lr > 0.0 && adv_lr > 0.0, "learning rates must be > 0");
    require(epochs >= 0, "epochs must be >= 0");
    require(max_steps >= 0, "max_steps must be >= 0");
    require(dropout_input >= 0.0 && dropout_input < 1.0, "dropout_input must be in [0,1)");
    for (auto h : hidden_dims) require(h >= 1, "hidden dims must be >= 1");
    require(feature_count >= 1, "feature_count must be >= 1");
    require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0");
    require(adv_steps >= 1, "adv_steps must be >= 1");
    require(adversary.ascent_lr > 0.0, "ascent_lr must be > 0");
    require(adversary.l2_decay >= 0.0, "l2_decay must be >= 0");
    require(adversary.alpha_cap > 0.0, "alpha_cap must be > 0");
    KernelSpec(kernel_sigmas, kernel_weights).validate();
    if (variant == Variant::ds_aae)
      require(kernel_sigmas.size() == 1, "ds_aae takes exactly one kernel bandwidth");
  }

  KernelSpec kernel() const { return KernelSpec(kernel_sigmas, kernel_weights); }
};

struct PriorSpec {
  Index dim = 1;  // standard normal in `dim` dimensions
};

inline Matrix sample_prior(const PriorSpec& prior, Index n, Rng& rng) {
  require(n >= 1, "sample_prior: n must be >= 1");
  require(prior.dim >= 1, "sample_prior: dim must be >= 1");
  return standard_normal(n, prior.dim, rng);
}

struct Autoencoder {
  Mlp encoder;
  Mlp decoder;

  Index input_dim() const { return encoder.in_dim(); }
  Index latent_dim() const { return encoder.out_dim(); }
};

/// Encoder: input -> hidden... -> latent (relu, identity output).
/// Decoder: latent -> reversed hidden... -> input (relu, sigmoid output).
inline Autoencoder make_autoencoder(Index input_dim, Index latent_dim, const std::vector<Index>& hidden,
                                    Rng& rng) {
  std::vector<Index> enc{input_dim};
  enc.insert(enc.end(), hidden.begin(), hidden.end());
  enc.push_back(latent_dim);
  std::vector<Index> dec(enc.rbegin(), enc.rend());
  Autoencoder ae;
  ae.encoder = make_mlp(enc, Activation::relu, Activation::identity, rng);
  ae.decoder = make_mlp(dec, Activation::relu, Activation::sigmoid, rng);
  return ae;
}

inline void check_prior(const PriorSpec& prior, const Mlp& encoder) {
  if (prior.dim != encoder.out_dim())
    throw validation_error("prior dimension " + std::to_string(prior.dim) +
                           " does not match encoder output " + std::to_string(encoder.out_dim()));
}

inline Matrix generate_samples(const Mlp& decoder, const PriorSpec& prior, Index n, std::uint64_t seed) {
  require_shape(prior.dim == decoder.in_dim(), "generate_samples: prior dim does not match decoder input");
  Rng rng = make_rng({seed, 0x5a3b1eull});
  return mlp_predict(decoder, sample_prior(prior, n, rng));
}

// ---- loss / gradient assembly --------------------------------------------

struct AeGrads {
  double recon_loss = 0.0;
  double discrepancy = 0.0;
  MlpGrads encoder;
  MlpGrads decoder;
};

/// Reconstruction cross-entropy plus lambda * MMD^2(prior, latent), and the
/// gradients of that sum. With lambda == 0 the MMD term is still reported but
/// contributes nothing to the gradients.
inline AeGrads mmd_ae_loss_and_grads(const Autoencoder& ae, const Matrix& batch, const Matrix& prior_batch,
                                     const KernelSpec& kernel, double lambda, double dropout, Rng& dropout_rng,
                                     bool with_mmd = true) {
  require_shape(batch.cols() == ae.input_dim(), "batch columns do not match the autoencoder input");
  auto enc = mlp_forward(ae.encoder, batch, dropout, dropout_rng, true);
  auto dec = mlp_forward(ae.decoder, enc.output, 0.0, dropout_rng, true);
  auto ce = bernoulli_cross_entropy(dec.output, batch);
  auto dec_back = mlp_backward(ae.decoder, dec.cache, ce.grad);

  AeGrads r;
  r.recon_loss = ce.loss;
  Matrix latent_grad = std::move(dec_back.input_grad);
  if (with_mmd) {
    auto mmd = mmd2_biased_with_grad(prior_batch, enc.output, kernel);
    r.discrepancy = mmd.value;
    if (lambda != 0.0) latent_grad += lambda * mmd.grad_y;
  }
  auto enc_back = mlp_backward(ae.encoder, enc.cache, latent_grad);
  r.encoder = std::move(enc_back.grads);
  r.decoder = std::move(dec_back.grads);
  return r;
}

/// Encoder gradient of lambda * (-mean f(enc(x))) with the adversary frozen.
/// `latent` must be the output of the forward pass that produced `cache`.
inline MlpGrads generator_encoder_grads(const Mlp& encoder, ForwardCache& cache, const Matrix& latent,
                                        const AdversaryState& adversary, double lambda) {
  const Matrix g = lambda * generator_grad_wrt_Z(adversary, latent);
  return mlp_backward(encoder, cache, g).grads;
}

// ---- trainer --------------------------------------------------------------

struct StepMetrics {
  double recon_loss = 0.0;
  double discrepancy = 0.0;  // MMD^2 (mmd_ae) or minimax D after ascent (ds_aae)
};

struct MetricsRow {
  std::int64_t epoch = 0;
  double recon_loss = 0.0;
  double discrepancy = 0.0;
  double wall_time = 0.0;
};

class Trainer {
 public:
  Trainer(TrainConfig cfg, Index input_dim) : cfg_(std::move(cfg)) {
    cfg_.resolve();
    cfg_.validate();
    require(input_dim >= 1, "input dimension must be >= 1");
    Rng init = make_rng({cfg_.seeds.weights, 1});
    model_ = make_autoencoder(input_dim, cfg_.latent_dim, cfg_.hidden_dims, init);
    init_state();
  }

  /// Wraps existing parameters (e.g. from a checkpoint) with fresh optimizer state.
  Trainer(TrainConfig cfg, Autoencoder model) : cfg_(std::move(cfg)), model_(std::move(model)) {
    cfg_.resolve();
    cfg_.validate();
    model_.encoder.validate();
    model_.decoder.validate();
    require_shape(model_.latent_dim() == cfg_.latent_dim, "model latent dim differs from config");
    init_state();
  }

  const TrainConfig& config() const { return cfg_; }
  const Autoencoder& model() const { return model_; }
  Autoencoder& model() { return model_; }
  PriorSpec prior() const { return {cfg_.latent_dim}; }
  const std::optional<AdversaryState>& adversary() const { return adversary_; }
  std::optional<AdversaryState>& adversary() { return adversary_; }
  std::int64_t steps() const { return steps_; }

  StepMetrics step(const Matrix& batch) {
    ++steps_;
    return cfg_.variant == Variant::mmd_ae ? train_step_mmd_ae(batch) : train_step_ds_aae(batch);
  }

  StepMetrics train_step_mmd_ae(const Matrix& batch) {
    const Matrix prior_batch = sample_prior(prior(), batch.rows(), prior_rng_);
    auto g = mmd_ae_loss_and_grads(model_, batch, prior_batch, kernel_, cfg_.lambda, cfg_.dropout_input,
                                   dropout_rng_);
    check_loss(g.recon_loss + cfg_.lambda * g.discrepancy);
    adam_step(recon_enc_, model_.encoder, g.encoder);
    adam_step(recon_dec_, model_.decoder, g.decoder);
    return {g.recon_loss, g.discrepancy};
  }

  StepMetrics train_step_ds_aae(const Matrix& batch) {
    require(adversary_.has_value(), "ds_aae step without an adversary");
    // phase 1: reconstruction
    Matrix unused;
    auto g = mmd_ae_loss_and_grads(model_, batch, unused, kernel_, 0.0, cfg_.dropout_input, dropout_rng_, false);
    check_loss(g.recon_loss);
    adam_step(recon_enc_, model_.encoder, g.encoder);
    adam_step(recon_dec_, model_.decoder, g.decoder);

    // phase 2: adversary ascent
    auto enc = mlp_forward(model_.encoder, batch, cfg_.dropout_input, adv_dropout_rng_, true);
    Matrix latent_features = feature_map(adversary_->map, enc.output);
    for (std::int64_t k = 0; k < cfg_.adv_steps; ++k) {
      if (cfg_.resample_features) {
        resample_features();
        latent_features = feature_map(adversary_->map, enc.output);
      }
      const Matrix prior_batch = sample_prior(prior(), batch.rows(), prior_rng_);
      const Vector gap = feature_map(adversary_->map, prior_batch).colwise().mean().transpose() -
                         latent_features.colwise().mean().transpose();
      adversary_ascend_with_gap(*adversary_, gap);
    }
    // minimax D on the last (prior, latent) pair, whose gap is the frozen one
    const double d = adversary_->witness_weights().dot(adversary_->frozen_gap);
    check_loss(d);

    // phase 3: generator
    const Matrix latent_grad = cfg_.lambda * generator_grad_from_features(*adversary_, latent_features);
    adam_step(adv_enc_, model_.encoder, mlp_backward(model_.encoder, enc.cache, latent_grad).grads);
    return {g.recon_loss, d};
  }

 private:
  void init_state() {
    kernel_ = cfg_.kernel();
    recon_enc_ = AdamState(model_.encoder, {cfg_.recon_lr});
    recon_dec_ = AdamState(model_.decoder, {cfg_.recon_lr});
    adv_enc_ = AdamState(model_.encoder, {cfg_.adv_lr});
    dropout_rng_ = make_rng({cfg_.seeds.weights, 2});
    adv_dropout_rng_ = make_rng({cfg_.seeds.weights, 3});
    prior_rng_ = make_rng({cfg_.seeds.prior});
    check_prior(prior(), model_.encoder);
    if (cfg_.variant == Variant::ds_aae)
      adversary_ = AdversaryState(
          sample_directions(cfg_.feature_count, cfg_.latent_dim, cfg_.kernel_sigmas.front(), cfg_.seeds.features),
          cfg_.adversary);
  }

  void resample_features() {
    Rng r = make_rng({cfg_.seeds.features, static_cast<std::uint64_t>(steps_), ++resamples_});
    adversary_->map = sample_directions(cfg_.feature_count, cfg_.latent_dim, cfg_.kernel_sigmas.front(), r());
  }

  static void check_loss(double v) {
    if (!std::isfinite(v)) throw validation_error("non-finite training loss");
  }

  TrainConfig cfg_;
  Autoencoder model_;
  KernelSpec kernel_;
  AdamState recon_enc_, recon_dec_, adv_enc_;
  std::optional<AdversaryState> adversary_;
  Rng dropout_rng_, adv_dropout_rng_, prior_rng_;
  std::int64_t steps_ = 0;
  std::uint64_t resamples_ = 0;
};

/// Runs epochs over `data` until `epochs` or `max_steps` is reached. Each
/// finished (possibly partial, when the step limit cuts it) epoch is reported
/// through `on_epoch`.
inline std::vector<MetricsRow> train(Trainer& trainer, const Dataset& data,
                                     const std::function<void(const MetricsRow&)>& on_epoch = {}) {
  const auto& cfg = trainer.config();
  BatchIterator it(data, cfg.batch_size, cfg.seeds.data);
  std::vector<MetricsRow> rows;
  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t e = 1; e <= cfg.epochs; ++e) {
    if (cfg.max_steps > 0 && trainer.steps() >= cfg.max_steps) break;
    double recon = 0.0, disc = 0.0;
    std::int64_t n = 0;
    for (const auto& batch : it.next_epoch()) {
      if (cfg.max_steps > 0 && trainer.steps() >= cfg.max_steps) break;
      const auto m = trainer.step(batch);
      recon += m.recon_loss;
      disc += m.discrepancy;
      ++n;
    }
    if (n == 0) break;
    MetricsRow row{e, recon / static_cast<double>(n), disc / static_cast<double>(n),
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    rows.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  return rows;
}

}  // namespace dsaae

#endif  // DSAAE_TRAIN_HPP
