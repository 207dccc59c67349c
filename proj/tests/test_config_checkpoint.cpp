#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "dsaae/checkpoint.hpp"
#include "dsaae/config.hpp"
#include "test_support.hpp"

using namespace dsaae;
using dsaae::testing::temp_dir;

namespace {

Checkpoint sample_checkpoint(bool with_adversary) {
  Rng rng(3);
  Checkpoint c;
  c.config_text = "train.variant = ds_aae\n";
  c.model = make_autoencoder(5, 2, {4, 3}, rng);
  if (with_adversary) {
    AdversaryConfig cfg;
    cfg.ascent_lr = 0.02;
    cfg.l2_decay = 0.5;
    AdversaryState a(sample_directions(7, 2, 1.5, 99), cfg);
    a.alpha = standard_normal(14, 1, rng);
    a.frozen_gap = standard_normal(14, 1, rng) * 0.1;
    c.adversary = a;
  }
  return c;
}

}  // namespace

TEST(Config, DefaultsEchoAndRoundTrip) {
  RunConfig c;
  c.resolve();
  const std::string text = to_text(c);
  EXPECT_NE(text.find("train.latent_dim = 6\n"), std::string::npos);
  EXPECT_NE(text.find("train.hidden_dims = 1024,512,216\n"), std::string::npos);
  EXPECT_NE(text.find("train.kernel_sigmas = 1\n"), std::string::npos);
  EXPECT_EQ(to_text(parse_config_text(text)), text);
}

TEST(Config, NonDefaultValuesRoundTrip) {
  RunConfig c;
  c.train.variant = Variant::mmd_ae;
  c.train.recon_lr = 0.1 + 0.2;  // not exactly representable as short decimal
  c.train.kernel_sigmas = {0.3, 1.0 / 3.0};
  c.train.kernel_weights = {1, 2};
  c.train.resample_features = true;
  c.train.seeds = {9, 8, 7, 18446744073709551615ull};
  c.data.kind = "toy";
  c.data.train_images = "/a path/with spaces";
  c.parzen.grid_min = 1e-3;
  c.resolve();
  const RunConfig back = parse_config_text(to_text(c));
  EXPECT_EQ(back.train.recon_lr, c.train.recon_lr);
  EXPECT_EQ(back.train.kernel_sigmas, c.train.kernel_sigmas);
  EXPECT_EQ(back.train.seeds.prior, c.train.seeds.prior);
  EXPECT_EQ(back.data.train_images, c.data.train_images);
  EXPECT_EQ(to_text(back), to_text(c));
}

TEST(Config, CommentsBlankLinesAndWhitespace) {
  const auto c = parse_config_text("# header\n\n  train.batch_size =  64  # inline\ntrain.variant=mmd_ae\n");
  EXPECT_EQ(c.train.batch_size, 64);
  EXPECT_EQ(c.train.variant, Variant::mmd_ae);
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
  EXPECT_THROW(parse_config_text("train.colour = red\n"), validation_error);
  EXPECT_THROW(parse_config_text("train.batch_size = ten\n"), validation_error);
  EXPECT_THROW(parse_config_text("train.batch_size = 10x\n"), validation_error);
  EXPECT_THROW(parse_config_text("train.resample_features = maybe\n"), validation_error);
  EXPECT_THROW(parse_config_text("no equals sign\n"), validation_error);
  try {
    parse_config_text("train.epochs = 3\nbogus = 1\n");
    FAIL();
  } catch (const validation_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, PrecedenceFileThenEnvThenSet) {
  const auto dir = temp_dir("config_prec");
  const auto file = (dir / "run.cfg").string();
  std::ofstream(file) << "train.epochs = 5\ntrain.batch_size = 32\ntrain.lambda = 2\n";
  ASSERT_EQ(env_var_for("train.batch_size"), "DSAAE_TRAIN_BATCH_SIZE");
  ::setenv("DSAAE_TRAIN_BATCH_SIZE", "64", 1);
  ::setenv("DSAAE_TRAIN_LAMBDA", "3", 1);
  RunConfig c;
  apply_config_file(c, file);
  apply_env(c);
  apply_assignment(c, "train.lambda=4");
  ::unsetenv("DSAAE_TRAIN_BATCH_SIZE");
  ::unsetenv("DSAAE_TRAIN_LAMBDA");
  EXPECT_EQ(c.train.epochs, 5);
  EXPECT_EQ(c.train.batch_size, 64);
  EXPECT_EQ(c.train.lambda, 4.0);
  EXPECT_THROW(apply_config_file(c, (dir / "missing.cfg").string()), validation_error);
}

TEST(Config, EveryKeySurvivesEcho) {
  RunConfig c;
  c.resolve();
  const auto keys = config_keys();
  EXPECT_EQ(keys.size(), 44u);
  const std::string text = to_text(c);
  for (const auto& k : keys) EXPECT_NE(text.find(k + " = "), std::string::npos) << k;
}

TEST(Config, ValidationOfRunSections) {
  RunConfig c;
  c.resolve();
  c.validate();
  c.data.kind = "cifar";
  EXPECT_THROW(c.validate(), validation_error);
  c.data.kind = "toy";
  c.parzen.n_samples = 0;
  EXPECT_THROW(c.validate(), validation_error);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  for (bool adv : {false, true}) {
    const auto c = sample_checkpoint(adv);
    const auto bytes = encode_checkpoint(c);
    const auto back = decode_checkpoint(bytes);
    EXPECT_EQ(back.config_text, c.config_text);
    EXPECT_TRUE(same_parameters(back.model.encoder, c.model.encoder));
    EXPECT_TRUE(same_parameters(back.model.decoder, c.model.decoder));
    ASSERT_EQ(back.adversary.has_value(), adv);
    if (adv) {
      EXPECT_EQ(back.adversary->alpha, c.adversary->alpha);
      EXPECT_EQ(back.adversary->frozen_gap, c.adversary->frozen_gap);
      EXPECT_EQ(back.adversary->map.frequencies, c.adversary->map.frequencies);
      EXPECT_EQ(back.adversary->config.l2_decay, 0.5);
    }
    EXPECT_EQ(encode_checkpoint(back), bytes);
  }
}

TEST(Checkpoint, HeaderLayout) {
  const auto bytes = encode_checkpoint(sample_checkpoint(false));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "DSAECKPT");
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[9], 0);
  const std::uint64_t len = 23;  // "train.variant = ds_aae\n"
  EXPECT_EQ(bytes[12], len);
}

TEST(Checkpoint, CorruptionDetected) {
  const auto good = encode_checkpoint(sample_checkpoint(true));
  auto flipped = good;
  flipped[flipped.size() / 2] ^= 0x10;
  EXPECT_THROW(decode_checkpoint(flipped), format_error);
  auto magic = good;
  magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(magic), format_error);
  auto truncated = good;
  truncated.resize(good.size() - 20);
  EXPECT_THROW(decode_checkpoint(truncated), format_error);
  EXPECT_THROW(decode_checkpoint({}), format_error);
}

TEST(Checkpoint, VersionMismatchRejected) {
  auto bytes = encode_checkpoint(sample_checkpoint(false));
  bytes[8] = 2;
  const auto body = bytes.size() - 8;
  const auto h = detail::fnv1a(bytes.data(), body);
  for (int i = 0; i < 8; ++i) bytes[body + static_cast<std::size_t>(i)] = static_cast<unsigned char>(h >> (8 * i));
  try {
    decode_checkpoint(bytes);
    FAIL();
  } catch (const format_error& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = temp_dir("ckpt_file");
  const auto c = sample_checkpoint(true);
  save_checkpoint((dir / "m.bin").string(), c);
  EXPECT_TRUE(same_parameters(load_checkpoint((dir / "m.bin").string()).model.encoder, c.model.encoder));
  EXPECT_THROW(load_checkpoint((dir / "none.bin").string()), format_error);
}
