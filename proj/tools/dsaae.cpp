// dsaae: train, sample, evaluate and inspect prior-matching autoencoders.
//
//   dsaae train       --config run.cfg [--set key=value]... [--out DIR] [--seed N]
//   dsaae sample      --checkpoint model.bin [--n 100] [--seed N] [--out DIR] [--grid-width 10]
//   dsaae eval-parzen --checkpoint model.bin [--test IMAGES] [--n-samples 10000] [--out DIR]
//   dsaae dump-latent --checkpoint model.bin [--data IMAGES [--labels LABELS]] [--out FILE]
//
// Every subcommand also accepts --config and --set; for the checkpoint-based
// subcommands they are applied on top of the configuration stored in the
// checkpoint. DSAAE_<SECTION>_<KEY> environment variables are applied between
// the config file and --set.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dsaae/commands.hpp"
#include "dsaae/platform.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "key=value configuration file");
  cmd->add_option("--set", a.sets, "override one key (key=value); repeatable");
  cmd->add_option("--out", a.out, "output directory (file for dump-latent)");
  cmd->add_option("--seed", a.seed, "seed");
}

dsaae::RunConfig build_config(dsaae::RunConfig base, const CommonArgs& a) {
  if (!a.config_path.empty()) dsaae::apply_config_file(base, a.config_path);
  dsaae::apply_env(base);
  for (const auto& s : a.sets) dsaae::apply_assignment(base, s);
  return base;
}

}  // namespace

int main(int argc, char** argv) {
  dsaae::tune_allocator();
  CLI::App app{"Prior-matching autoencoders: MMD-AE and doubly stochastic adversarial AE"};
  app.require_subcommand(1);

  CommonArgs train_args, sample_args, eval_args, latent_args;

  auto* train = app.add_subcommand("train", "train a model");
  add_common(train, train_args);

  auto* sample = app.add_subcommand("sample", "decode samples drawn from the prior");
  add_common(sample, sample_args);
  std::string sample_ckpt;
  std::optional<dsaae::Index> sample_n, grid_width;
  sample->add_option("--checkpoint", sample_ckpt, "model checkpoint")->required();
  sample->add_option("--n", sample_n, "number of samples (default sample.n)");
  sample->add_option("--grid-width", grid_width, "images per PGM row (default sample.grid_width)");

  auto* eval = app.add_subcommand("eval-parzen", "Parzen-window log-likelihood of a test set");
  add_common(eval, eval_args);
  std::string eval_ckpt, eval_test;
  std::optional<dsaae::Index> n_samples;
  eval->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval->add_option("--test", eval_test, "IDX test images (default: data.test_images of the run)");
  eval->add_option("--n-samples", n_samples, "generated samples (default parzen.n_samples)");

  auto* latent = app.add_subcommand("dump-latent", "write latent codes of a dataset as CSV");
  add_common(latent, latent_args);
  std::string latent_ckpt, latent_data, latent_labels;
  latent->add_option("--checkpoint", latent_ckpt, "model checkpoint")->required();
  latent->add_option("--data", latent_data, "IDX images (default: the run's test set)");
  latent->add_option("--labels", latent_labels, "IDX labels for --data");

  CLI11_PARSE(app, argc, argv);

  if (*train) {
    return dsaae::run_guarded(std::cerr, [&] {
      auto cfg = build_config({}, train_args);
      if (!train_args.out.empty()) cfg.output.dir = train_args.out;
      if (train_args.seed) {
        const auto s = *train_args.seed;
        cfg.train.seeds = {s, s + 1, s + 2, s + 3};
      }
      return dsaae::cmd_train(cfg);
    });
  }

  // Checkpoint-based subcommands: stored config, then file/env/--set.
  auto load_cfg = [](const std::string& ckpt, const CommonArgs& a) {
    auto cfg = build_config(dsaae::checkpoint_config(dsaae::load_checkpoint(ckpt)), a);
    cfg.resolve();
    cfg.validate();
    return cfg;
  };

  if (*sample) {
    return dsaae::run_guarded(std::cerr, [&] {
      const auto cfg = load_cfg(sample_ckpt, sample_args);
      return dsaae::cmd_sample(sample_ckpt, sample_n.value_or(cfg.sample.n),
                               sample_args.seed.value_or(cfg.sample.seed),
                               sample_args.out.empty() ? cfg.output.dir : sample_args.out,
                               grid_width.value_or(cfg.sample.grid_width));
    });
  }
  if (*eval) {
    return dsaae::run_guarded(std::cerr, [&] {
      auto cfg = load_cfg(eval_ckpt, eval_args);
      if (eval_args.seed) cfg.parzen.seed = *eval_args.seed;
      return dsaae::cmd_eval_parzen(eval_ckpt, cfg, eval_test, n_samples.value_or(cfg.parzen.n_samples),
                                    eval_args.out.empty() ? cfg.output.dir : eval_args.out);
    });
  }
  if (*latent) {
    return dsaae::run_guarded(std::cerr, [&] {
      const auto cfg = load_cfg(latent_ckpt, latent_args);
      const std::string out = latent_args.out.empty() ? cfg.output.dir + "/latent.csv" : latent_args.out;
      return dsaae::cmd_dump_latent(latent_ckpt, cfg, latent_data, latent_labels, out);
    });
  }
  return dsaae::kExitUsage;
}
