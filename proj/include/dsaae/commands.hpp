#ifndef DSAAE_COMMANDS_HPP
#define DSAAE_COMMANDS_HPP

// Subcommand bodies behind the `dsaae` executable. Each returns a process
// exit code: 0 success, 2 invalid configuration/arguments, 1 any other
// failure (I/O, file format).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "dsaae/checkpoint.hpp"
#include "dsaae/config.hpp"
#include "dsaae/data.hpp"
#include "dsaae/io.hpp"
#include "dsaae/parzen.hpp"
#include "dsaae/train.hpp"

namespace dsaae {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

template <typename F>
int run_guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const validation_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

/// Training data minus its trailing validation split, and that split.
inline std::pair<Dataset, Dataset> load_train_validation(const RunConfig& cfg) {
  Dataset all;
  if (cfg.data.kind == "toy") {
    all = make_toy_2d(parse_toy_kind(cfg.data.toy_kind), cfg.data.toy_n, cfg.data.toy_seed);
  } else {
    require(!cfg.data.train_images.empty(), "data.train_images is required for mnist data");
    all = load_idx(cfg.data.train_images, cfg.data.train_labels);
    if (cfg.data.train_limit > 0 && cfg.data.train_limit < all.size()) all = all.rows(0, cfg.data.train_limit);
  }
  return split_validation(all, cfg.data.validation_fraction);
}

inline Dataset load_test(const RunConfig& cfg) {
  Dataset d;
  if (cfg.data.kind == "toy") {
    d = make_toy_2d(parse_toy_kind(cfg.data.toy_kind), cfg.data.toy_n, cfg.data.toy_seed + 1);
  } else {
    require(!cfg.data.test_images.empty(), "data.test_images is required for mnist data");
    d = load_idx(cfg.data.test_images, cfg.data.test_labels);
  }
  d.split = Split::test;
  return d;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw format_error("cannot write " + p.string());
  out << s;
}

inline void write_binary(const std::filesystem::path& p, const std::vector<unsigned char>& b) {
  write_bytes(p.string(), b);
}

inline Checkpoint make_checkpoint(const RunConfig& cfg, const Trainer& trainer) {
  return {to_text(cfg), trainer.model(), trainer.adversary()};
}

/// Trains the configured variant into cfg.output.dir:
///   config.resolved.txt, metrics.csv, checkpoint_epoch_<k>.bin, model.bin
inline int cmd_train(RunConfig cfg, std::ostream& log = std::cerr) {
  return run_guarded(log, [&] {
    cfg.resolve();
    cfg.validate();
    auto [train_set, validation] = load_train_validation(cfg);
    require(train_set.size() >= cfg.train.batch_size,
            "training set (" + std::to_string(train_set.size()) + ") is smaller than train.batch_size");
    Trainer trainer(cfg.train, train_set.dim());

    const std::filesystem::path dir(cfg.output.dir);
    std::filesystem::create_directories(dir);
    write_text(dir / "config.resolved.txt", to_text(cfg));
    std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
    if (!metrics) throw format_error("cannot write metrics.csv");
    write_csv_row(metrics, {"epoch", "recon_loss", "discrepancy", "wall_time_s"});

    log << "training " << to_string(cfg.train.variant) << " on " << train_set.size() << " examples ("
        << validation.size() << " held out), latent " << cfg.train.latent_dim << "\n";
    train(trainer, train_set, [&](const MetricsRow& row) {
      write_csv_row(metrics, {std::to_string(row.epoch), format_double(row.recon_loss),
                              format_double(row.discrepancy),
                              format_double(cfg.output.wall_time ? row.wall_time : 0.0)});
      metrics.flush();
      log << "epoch " << row.epoch << " recon " << row.recon_loss << " discrepancy " << row.discrepancy
          << " (" << row.wall_time << " s)\n";
      if (cfg.output.checkpoint_every > 0 && row.epoch % cfg.output.checkpoint_every == 0)
        save_checkpoint((dir / ("checkpoint_epoch_" + std::to_string(row.epoch) + ".bin")).string(),
                        make_checkpoint(cfg, trainer));
    });
    save_checkpoint((dir / "model.bin").string(), make_checkpoint(cfg, trainer));
    return kExitOk;
  });
}

/// Loads a checkpoint's embedded config, then applies `overrides` on top.
inline RunConfig checkpoint_config(const Checkpoint& ckpt) {
  RunConfig cfg = parse_config_text(ckpt.config_text);
  cfg.resolve();
  return cfg;
}

/// Writes samples.csv and, for square images, samples.pgm.
inline int cmd_sample(const std::string& checkpoint, Index n, std::uint64_t seed, const std::string& out_dir,
                      Index grid_width = 10, std::ostream& log = std::cerr) {
  return run_guarded(log, [&] {
    require(n >= 1, "sample count must be >= 1");
    require(grid_width >= 1, "grid width must be >= 1");
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const Matrix samples =
        generate_samples(ckpt.model.decoder, PriorSpec{ckpt.model.latent_dim()}, n, seed);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    {
      std::ofstream csv(dir / "samples.csv", std::ios::binary);
      if (!csv) throw format_error("cannot write samples.csv");
      write_matrix_csv(csv, samples, numbered_header("x", samples.cols()));
    }
    if (const Index side = square_side(samples.cols()); side >= 2)
      write_binary(dir / "samples.pgm", encode_pgm_grid(samples, side, grid_width));
    log << "wrote " << n << " samples to " << dir.string() << "\n";
    return kExitOk;
  });
}

struct ParzenReport {
  std::string variant;
  Index samples = 0;
  double sigma = 0.0;
  LoglikEstimate estimate;
};

/// Generates `n_samples` from the model, picks the bandwidth on the
/// validation split and scores the test set.
inline ParzenReport parzen_report(const Checkpoint& ckpt, const RunConfig& cfg, const Matrix& validation,
                                  const Matrix& test, Index n_samples) {
  require(n_samples >= 1, "parzen: n_samples must be >= 1");
  require(validation.rows() >= 1, "parzen: validation split is empty (data.validation_fraction)");
  ParzenModel model{generate_samples(ckpt.model.decoder, PriorSpec{ckpt.model.latent_dim()}, n_samples,
                                     cfg.parzen.seed),
                    1.0};
  const auto grid = log_spaced_grid(cfg.parzen.grid_min, cfg.parzen.grid_max, cfg.parzen.grid_count);
  model.sigma = select_bandwidth(model.centers, validation, grid, cfg.parzen.batch);
  return {to_string(cfg.train.variant), n_samples, model.sigma, evaluate_loglik(model, test, cfg.parzen.batch)};
}

/// Writes parzen.csv (variant,S,sigma,mean_loglik,stderr) and parzen.txt.
inline int cmd_eval_parzen(const std::string& checkpoint, const std::optional<RunConfig>& overrides,
                           const std::string& test_path, Index n_samples, const std::string& out_dir,
                           std::ostream& out = std::cout, std::ostream& log = std::cerr) {
  return run_guarded(log, [&] {
    require(n_samples >= 1, "n_samples must be >= 1");
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    RunConfig cfg = overrides ? *overrides : checkpoint_config(ckpt);
    cfg.resolve();
    cfg.validate();
    const auto validation = load_train_validation(cfg).second;
    const Dataset test = test_path.empty() ? load_test(cfg) : load_idx(test_path);
    require_shape(test.dim() == ckpt.model.input_dim(), "test data dimension does not match the model");
    const auto r = parzen_report(ckpt, cfg, validation.images, test.images, n_samples);

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    {
      std::ofstream csv(dir / "parzen.csv", std::ios::binary);
      if (!csv) throw format_error("cannot write parzen.csv");
      write_csv_row(csv, {"variant", "S", "sigma", "mean_loglik", "stderr"});
      write_csv_row(csv, {r.variant, std::to_string(r.samples), format_double(r.sigma),
                          format_double(r.estimate.mean), format_double(r.estimate.std_error)});
    }
    const std::string line = r.variant + ": Parzen log-likelihood " + format_double(r.estimate.mean) + " +- " +
                             format_double(r.estimate.std_error) + " (S=" + std::to_string(r.samples) +
                             ", sigma=" + format_double(r.sigma) + ", " + std::to_string(test.size()) +
                             " test points)\n";
    write_text(dir / "parzen.txt", line);
    out << line;
    return kExitOk;
  });
}

/// Eval-mode latent codes of a dataset as CSV: z0..z{k-1}[,label].
inline int cmd_dump_latent(const std::string& checkpoint, const std::optional<RunConfig>& overrides,
                           const std::string& data_path, const std::string& labels_path, const std::string& out_file,
                           std::ostream& log = std::cerr) {
  return run_guarded(log, [&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    Dataset data;
    if (!data_path.empty()) {
      data = load_idx(data_path, labels_path);
    } else {
      RunConfig cfg = overrides ? *overrides : checkpoint_config(ckpt);
      cfg.resolve();
      data = load_test(cfg);
    }
    require_shape(data.dim() == ckpt.model.input_dim(), "data dimension does not match the model");
    const Matrix z = mlp_predict(ckpt.model.encoder, data.images);

    const std::filesystem::path p(out_file);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream csv(p, std::ios::binary);
    if (!csv) throw format_error("cannot write " + out_file);
    auto header = numbered_header("z", z.cols());
    if (data.labels) header.push_back("label");
    write_csv_row(csv, header);
    std::vector<std::string> row;
    for (Index i = 0; i < z.rows(); ++i) {
      row.clear();
      for (Index j = 0; j < z.cols(); ++j) row.push_back(format_double(z(i, j)));
      if (data.labels) row.push_back(std::to_string((*data.labels)[static_cast<std::size_t>(i)]));
      write_csv_row(csv, row);
    }
    log << "wrote " << z.rows() << " latent codes to " << out_file << "\n";
    return kExitOk;
  });
}

}  // namespace dsaae

#endif  // DSAAE_COMMANDS_HPP
