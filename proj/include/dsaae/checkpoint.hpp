#ifndef DSAAE_CHECKPOINT_HPP
#define DSAAE_CHECKPOINT_HPP

// Versioned binary model container. Layout (all integers and floats
// little-endian; see docs/checkpoint_format.md):
//
//   "DSAECKPT" u32 version
//   u64 config_len, config bytes (resolved key=value text)
//   net encoder, net decoder
//     net   := u32 layer_count, layer*
//     layer := u8 activation, u64 out, u64 in, f64[out*in] weight (row-major), f64[out] bias
//   u8 has_adversary
//     [u64 seed, u64 M, u64 d, f64 sigma, f64 ascent_lr, f64 l2_decay, f64 alpha_cap,
//      f64[2M] alpha, f64[2M] frozen_gap]
//   u64 FNV-1a hash of every preceding byte
//
// Random-feature frequencies are regenerated from (seed, M, d, sigma).

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "dsaae/adversary.hpp"
#include "dsaae/core.hpp"
#include "dsaae/nn.hpp"
#include "dsaae/random_features.hpp"
#include "dsaae/train.hpp"

namespace dsaae {

inline constexpr char kCheckpointMagic[8] = {'D', 'S', 'A', 'E', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_text;
  Autoencoder model;
  std::optional<AdversaryState> adversary;
};

namespace detail {

inline std::uint64_t fnv1a(const unsigned char* p, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    bytes.insert(bytes.end(), b, b + sizeof(T));
  }
  void f64s(const double* p, Index n) {
    for (Index i = 0; i < n; ++i) pod(p[i]);
  }
  void raw(const void* p, std::size_t n) {
    auto c = static_cast<const unsigned char*>(p);
    bytes.insert(bytes.end(), c, c + n);
  }
  std::vector<unsigned char> bytes;
};

class Reader {
 public:
  Reader(const unsigned char* p, std::size_t n) : p_(p), n_(n) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    unsigned char b[sizeof(T)];
    std::memcpy(b, p_ + off_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    off_ += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  void f64s(double* out, Index n) {
    need(static_cast<std::size_t>(n) * 8);
    for (Index i = 0; i < n; ++i) out[i] = pod<double>();
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p_ + off_), n);
    off_ += n;
    return s;
  }
  std::size_t offset() const { return off_; }

 private:
  void need(std::size_t k) const {
    if (k > n_ - off_) throw format_error("checkpoint: truncated");
  }
  const unsigned char* p_;
  std::size_t n_;
  std::size_t off_ = 0;
};

inline void write_net(Writer& w, const Mlp& net) {
  w.pod(static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& l : net.layers) {
    w.pod(static_cast<std::uint8_t>(l.activation));
    w.pod(static_cast<std::uint64_t>(l.out_dim()));
    w.pod(static_cast<std::uint64_t>(l.in_dim()));
    w.f64s(l.weight.data(), l.weight.size());
    w.f64s(l.bias.data(), l.bias.size());
  }
}

inline Mlp read_net(Reader& r) {
  constexpr std::uint64_t kMaxDim = 1u << 24;
  Mlp net;
  const auto count = r.pod<std::uint32_t>();
  if (count == 0 || count > 1024) throw format_error("checkpoint: bad layer count");
  for (std::uint32_t i = 0; i < count; ++i) {
    Layer l;
    const auto act = r.pod<std::uint8_t>();
    if (act > 2) throw format_error("checkpoint: unknown activation tag");
    l.activation = static_cast<Activation>(act);
    const auto out = r.pod<std::uint64_t>(), in = r.pod<std::uint64_t>();
    if (out == 0 || in == 0 || out > kMaxDim || in > kMaxDim) throw format_error("checkpoint: bad layer dims");
    l.weight.resize(static_cast<Index>(out), static_cast<Index>(in));
    r.f64s(l.weight.data(), l.weight.size());
    l.bias.resize(static_cast<Index>(out));
    r.f64s(l.bias.data(), l.bias.size());
    net.layers.push_back(std::move(l));
  }
  try {
    net.validate();
  } catch (const error& e) {
    throw format_error(std::string("checkpoint: ") + e.what());
  }
  return net;
}

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const Checkpoint& c) {
  detail::Writer w;
  w.raw(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.pod(kCheckpointVersion);
  w.pod(static_cast<std::uint64_t>(c.config_text.size()));
  w.raw(c.config_text.data(), c.config_text.size());
  detail::write_net(w, c.model.encoder);
  detail::write_net(w, c.model.decoder);
  w.pod(static_cast<std::uint8_t>(c.adversary ? 1 : 0));
  if (c.adversary) {
    const auto& a = *c.adversary;
    w.pod(static_cast<std::uint64_t>(a.map.seed));
    w.pod(static_cast<std::uint64_t>(a.map.count()));
    w.pod(static_cast<std::uint64_t>(a.map.input_dim()));
    w.pod(a.map.sigma);
    w.pod(a.config.ascent_lr);
    w.pod(a.config.l2_decay);
    w.pod(a.config.alpha_cap);
    w.f64s(a.alpha.data(), a.alpha.size());
    w.f64s(a.frozen_gap.data(), a.frozen_gap.size());
  }
  w.pod(detail::fnv1a(w.bytes.data(), w.bytes.size()));
  return std::move(w.bytes);
}

inline Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) + 4 + 8 ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw format_error("checkpoint: bad magic");
  const std::size_t body = bytes.size() - 8;
  detail::Reader tail(bytes.data() + body, 8);
  if (tail.pod<std::uint64_t>() != detail::fnv1a(bytes.data(), body))
    throw format_error("checkpoint: checksum mismatch");

  detail::Reader r(bytes.data(), body);
  r.str(sizeof(kCheckpointMagic));
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw format_error("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint c;
  c.config_text = r.str(static_cast<std::size_t>(r.pod<std::uint64_t>()));
  c.model.encoder = detail::read_net(r);
  c.model.decoder = detail::read_net(r);
  if (c.model.encoder.out_dim() != c.model.decoder.in_dim() || c.model.encoder.in_dim() != c.model.decoder.out_dim())
    throw format_error("checkpoint: encoder and decoder do not fit together");
  const auto has_adv = r.pod<std::uint8_t>();
  if (has_adv > 1) throw format_error("checkpoint: bad adversary flag");
  if (has_adv) {
    const auto seed = r.pod<std::uint64_t>();
    const auto m = r.pod<std::uint64_t>(), d = r.pod<std::uint64_t>();
    const auto sigma = r.pod<double>();
    AdversaryConfig cfg;
    cfg.ascent_lr = r.pod<double>();
    cfg.l2_decay = r.pod<double>();
    cfg.alpha_cap = r.pod<double>();
    if (m == 0 || m > (1u << 24) || d == 0 || d > (1u << 16)) throw format_error("checkpoint: bad feature map");
    try {
      AdversaryState a(sample_directions(static_cast<Index>(m), static_cast<Index>(d), sigma, seed), cfg);
      r.f64s(a.alpha.data(), a.alpha.size());
      r.f64s(a.frozen_gap.data(), a.frozen_gap.size());
      c.adversary = std::move(a);
    } catch (const validation_error& e) {
      throw format_error(std::string("checkpoint: ") + e.what());
    }
  }
  if (r.offset() != body) throw format_error("checkpoint: trailing bytes");
  return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  const auto bytes = encode_checkpoint(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw format_error("write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open " + path);
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

}  // namespace dsaae

#endif  // DSAAE_CHECKPOINT_HPP
