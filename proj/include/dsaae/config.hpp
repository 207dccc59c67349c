#ifndef DSAAE_CONFIG_HPP
#define DSAAE_CONFIG_HPP

// Run configuration: flat `section.key = value` text with '#' comments.
//
// Sources are applied in order: built-in defaults, config file, environment
// (DSAAE_<SECTION>_<KEY>, upper-cased, dots as underscores), then --set
// overrides. Unknown keys are rejected. `to_text()` emits every key with its
// resolved value and parses back to an equal configuration.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dsaae/core.hpp"
#include "dsaae/io.hpp"
#include "dsaae/train.hpp"

namespace dsaae {

struct DataConfig {
  std::string kind = "mnist";  // mnist | toy
  std::string toy_kind = "gaussian_mixture_8";
  Index toy_n = 8000;
  std::uint64_t toy_seed = 11;
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  Index train_limit = 0;  // 0 = all
  double validation_fraction = 0.1;
};

struct OutputConfig {
  std::string dir = "out";
  std::int64_t checkpoint_every = 0;  // epochs; 0 = final checkpoint only
  bool wall_time = false;             // false writes 0 so metrics files are reproducible
};

struct SampleConfig {
  Index n = 100;
  std::uint64_t seed = 0;
  Index grid_width = 10;
};

struct ParzenConfig {
  Index n_samples = 10000;
  double grid_min = 0.01;
  double grid_max = 1.0;
  Index grid_count = 20;
  Index batch = 500;
  std::uint64_t seed = 0;
};

struct RunConfig {
  TrainConfig train;
  DataConfig data;
  OutputConfig output;
  SampleConfig sample;
  ParzenConfig parzen;

  void resolve() { train.resolve(); }

  void validate() const {
    train.validate();
    require(data.kind == "mnist" || data.kind == "toy", "data.kind must be mnist or toy");
    parse_toy_kind(data.toy_kind);
    require(data.toy_n >= 1, "data.toy_n must be >= 1");
    require(data.train_limit >= 0, "data.train_limit must be >= 0");
    require(data.validation_fraction >= 0.0 && data.validation_fraction < 1.0,
            "data.validation_fraction must be in [0,1)");
    require(output.checkpoint_every >= 0, "output.checkpoint_every must be >= 0");
    require(sample.n >= 1, "sample.n must be >= 1");
    require(sample.grid_width >= 1, "sample.grid_width must be >= 1");
    require(parzen.n_samples >= 1, "parzen.n_samples must be >= 1");
    require(parzen.grid_min > 0.0 && parzen.grid_max >= parzen.grid_min, "parzen grid must satisfy 0 < min <= max");
    require(parzen.grid_count >= 1, "parzen.grid_count must be >= 1");
    require(parzen.batch >= 1, "parzen.batch must be >= 1");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || v.empty())
    throw validation_error("config: bad value '" + v + "' for " + key);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw validation_error("config: bad boolean '" + v + "' for " + key);
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += format_double(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DSAAE_NUM_KEY(NAME, FIELD, TYPE)                                                              \
  Key{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = parse_number<TYPE>(NAME, v); },        \
      [](const RunConfig& c) {                                                                         \
        if constexpr (std::is_floating_point_v<TYPE>)                                                  \
          return format_double(c.FIELD);                                                               \
        else                                                                                           \
          return std::to_string(c.FIELD);                                                              \
      }}
#define DSAAE_STR_KEY(NAME, FIELD) \
  Key{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = v; }, [](const RunConfig& c) { return c.FIELD; }}
#define DSAAE_BOOL_KEY(NAME, FIELD)                                                  \
  Key{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = parse_bool(NAME, v); }, \
      [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }}

inline const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      Key{"train.variant", [](RunConfig& c, const std::string& v) { c.train.variant = parse_variant(v); },
          [](const RunConfig& c) { return to_string(c.train.variant); }},
      DSAAE_NUM_KEY("train.latent_dim", train.latent_dim, Index),
      Key{"train.hidden_dims",
          [](RunConfig& c, const std::string& v) { c.train.hidden_dims = parse_list<Index>("train.hidden_dims", v); },
          [](const RunConfig& c) { return join(c.train.hidden_dims); }},
      DSAAE_NUM_KEY("train.batch_size", train.batch_size, Index),
      DSAAE_NUM_KEY("train.recon_lr", train.recon_lr, double),
      DSAAE_NUM_KEY("train.adv_lr", train.adv_lr, double),
      DSAAE_NUM_KEY("train.epochs", train.epochs, std::int64_t),
      DSAAE_NUM_KEY("train.max_steps", train.max_steps, std::int64_t),
      DSAAE_NUM_KEY("train.dropout_input", train.dropout_input, double),
      Key{"train.kernel_sigmas",
          [](RunConfig& c, const std::string& v) { c.train.kernel_sigmas = parse_list<double>("train.kernel_sigmas", v); },
          [](const RunConfig& c) { return join(c.train.kernel_sigmas); }},
      Key{"train.kernel_weights",
          [](RunConfig& c, const std::string& v) { c.train.kernel_weights = parse_list<double>("train.kernel_weights", v); },
          [](const RunConfig& c) { return join(c.train.kernel_weights); }},
      DSAAE_NUM_KEY("train.feature_count", train.feature_count, Index),
      DSAAE_NUM_KEY("train.lambda", train.lambda, double),
      DSAAE_NUM_KEY("train.adv_steps", train.adv_steps, std::int64_t),
      DSAAE_NUM_KEY("train.ascent_lr", train.adversary.ascent_lr, double),
      DSAAE_NUM_KEY("train.l2_decay", train.adversary.l2_decay, double),
      DSAAE_NUM_KEY("train.alpha_cap", train.adversary.alpha_cap, double),
      DSAAE_BOOL_KEY("train.resample_features", train.resample_features),
      DSAAE_NUM_KEY("seed.weights", train.seeds.weights, std::uint64_t),
      DSAAE_NUM_KEY("seed.data", train.seeds.data, std::uint64_t),
      DSAAE_NUM_KEY("seed.features", train.seeds.features, std::uint64_t),
      DSAAE_NUM_KEY("seed.prior", train.seeds.prior, std::uint64_t),
      DSAAE_STR_KEY("data.kind", data.kind),
      DSAAE_STR_KEY("data.toy_kind", data.toy_kind),
      DSAAE_NUM_KEY("data.toy_n", data.toy_n, Index),
      DSAAE_NUM_KEY("data.toy_seed", data.toy_seed, std::uint64_t),
      DSAAE_STR_KEY("data.train_images", data.train_images),
      DSAAE_STR_KEY("data.train_labels", data.train_labels),
      DSAAE_STR_KEY("data.test_images", data.test_images),
      DSAAE_STR_KEY("data.test_labels", data.test_labels),
      DSAAE_NUM_KEY("data.train_limit", data.train_limit, Index),
      DSAAE_NUM_KEY("data.validation_fraction", data.validation_fraction, double),
      DSAAE_STR_KEY("output.dir", output.dir),
      DSAAE_NUM_KEY("output.checkpoint_every", output.checkpoint_every, std::int64_t),
      DSAAE_BOOL_KEY("output.wall_time", output.wall_time),
      DSAAE_NUM_KEY("sample.n", sample.n, Index),
      DSAAE_NUM_KEY("sample.seed", sample.seed, std::uint64_t),
      DSAAE_NUM_KEY("sample.grid_width", sample.grid_width, Index),
      DSAAE_NUM_KEY("parzen.n_samples", parzen.n_samples, Index),
      DSAAE_NUM_KEY("parzen.grid_min", parzen.grid_min, double),
      DSAAE_NUM_KEY("parzen.grid_max", parzen.grid_max, double),
      DSAAE_NUM_KEY("parzen.grid_count", parzen.grid_count, Index),
      DSAAE_NUM_KEY("parzen.batch", parzen.batch, Index),
      DSAAE_NUM_KEY("parzen.seed", parzen.seed, std::uint64_t),
  };
  return k;
}

#undef DSAAE_NUM_KEY
#undef DSAAE_STR_KEY
#undef DSAAE_BOOL_KEY

inline std::string env_name(const std::string& key) {
  std::string s = "DSAAE_";
  for (char c : key) s += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

/// Sets one key; throws validation_error on an unknown key or unparsable value.
inline void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : detail::keys())
    if (k.name == key) return k.set(cfg, detail::trim(value));
  throw validation_error("config: unknown key '" + key + "'");
}

inline std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : detail::keys()) out.push_back(k.name);
  return out;
}

/// Applies `key=value` assignment text ("--set" form).
inline void apply_assignment(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw validation_error("config: expected key=value, got '" + assignment + "'");
  set_key(cfg, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

inline void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      apply_assignment(cfg, line);
    } catch (const validation_error& e) {
      throw validation_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

/// Applies DSAAE_* environment overrides for every known key.
inline void apply_env(RunConfig& cfg) {
  for (const auto& k : detail::keys())
    if (const char* v = std::getenv(detail::env_name(k.name).c_str())) k.set(cfg, detail::trim(v));
}

inline std::string env_var_for(const std::string& key) { return detail::env_name(key); }

inline std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : detail::keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  apply_config_text(c, text);
  return c;
}

}  // namespace dsaae

#endif  // DSAAE_CONFIG_HPP
