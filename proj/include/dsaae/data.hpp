#ifndef DSAAE_DATA_HPP
#define DSAAE_DATA_HPP

// Datasets: MNIST IDX files, synthetic 2-D generators, seeded batching.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dsaae/core.hpp"
#include "dsaae/rng.hpp"

namespace dsaae {

enum class Split { train, validation, test };

struct Dataset {
  Matrix images;                          // N x d, entries in [0,1]
  std::optional<std::vector<int>> labels;
  Split split = Split::train;
  // For generated data: raw = scaled * scale + offset, per coordinate.
  RowVector offset;
  RowVector scale;

  Index size() const { return images.rows(); }
  Index dim() const { return images.cols(); }

  Dataset rows(Index begin, Index end) const {
    Dataset d;
    d.images = images.middleRows(begin, end - begin);
    if (labels) d.labels = std::vector<int>(labels->begin() + begin, labels->begin() + end);
    d.split = split;
    d.offset = offset;
    d.scale = scale;
    return d;
  }
};

/// Carves the trailing `fraction` of `train` (pre-shuffle order) off as a validation split.
inline std::pair<Dataset, Dataset> split_validation(const Dataset& train, double fraction) {
  require(fraction >= 0.0 && fraction < 1.0, "validation fraction must be in [0,1)");
  const Index n_val = static_cast<Index>(std::floor(static_cast<double>(train.size()) * fraction));
  Dataset head = train.rows(0, train.size() - n_val);
  Dataset tail = train.rows(train.size() - n_val, train.size());
  head.split = Split::train;
  tail.split = Split::validation;
  return {std::move(head), std::move(tail)};
}

// ---- IDX ------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

namespace detail {

inline std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

inline void put_be32(std::vector<unsigned char>& b, std::uint32_t v) {
  b.push_back(static_cast<unsigned char>(v >> 24));
  b.push_back(static_cast<unsigned char>(v >> 16));
  b.push_back(static_cast<unsigned char>(v >> 8));
  b.push_back(static_cast<unsigned char>(v));
}

}  // namespace detail

inline Matrix parse_idx_images(const std::vector<unsigned char>& b, const std::string& name = "images") {
  if (b.size() < 16) throw format_error(name + ": truncated IDX header");
  const auto magic = detail::read_be32(b, 0);
  if (magic != kIdxImageMagic)
    throw format_error(name + ": bad magic " + std::to_string(magic) + " (expected 2051)");
  const std::size_t n = detail::read_be32(b, 4), r = detail::read_be32(b, 8), c = detail::read_be32(b, 12);
  const std::size_t expect = 16 + n * r * c;
  if (b.size() < expect)
    throw format_error(name + ": truncated payload, " + std::to_string(b.size()) + " of " +
                       std::to_string(expect) + " bytes");
  Matrix m(static_cast<Index>(n), static_cast<Index>(r * c));
  for (std::size_t k = 0; k < n * r * c; ++k) m.data()[k] = static_cast<double>(b[16 + k]) / 255.0;
  return m;
}

inline std::vector<int> parse_idx_labels(const std::vector<unsigned char>& b, const std::string& name = "labels") {
  if (b.size() < 8) throw format_error(name + ": truncated IDX header");
  const auto magic = detail::read_be32(b, 0);
  if (magic != kIdxLabelMagic)
    throw format_error(name + ": bad magic " + std::to_string(magic) + " (expected 2049)");
  const std::size_t n = detail::read_be32(b, 4);
  if (b.size() < 8 + n) throw format_error(name + ": truncated payload");
  std::vector<int> labels(b.begin() + 8, b.begin() + 8 + static_cast<std::ptrdiff_t>(n));
  for (int l : labels)
    if (l < 0 || l > 9) throw format_error(name + ": label out of range [0,9]");
  return labels;
}

/// Loads an IDX image file and an optional (empty path = none) label file.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path = {}) {
  Dataset d;
  d.images = parse_idx_images(detail::read_file(images_path), images_path);
  if (!labels_path.empty()) {
    auto labels = parse_idx_labels(detail::read_file(labels_path), labels_path);
    if (static_cast<Index>(labels.size()) != d.images.rows())
      throw format_error("image/label count mismatch: " + std::to_string(d.images.rows()) + " images, " +
                         std::to_string(labels.size()) + " labels");
    d.labels = std::move(labels);
  }
  return d;
}

/// IDX image bytes; square images when d is a perfect square, else 1 x d.
inline std::vector<unsigned char> encode_idx_images(const Matrix& images) {
  std::vector<unsigned char> b;
  const auto d = static_cast<std::uint32_t>(images.cols());
  auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(static_cast<double>(d))));
  std::uint32_t rows = side, cols = side;
  if (side * side != d) rows = 1, cols = d;
  detail::put_be32(b, kIdxImageMagic);
  detail::put_be32(b, static_cast<std::uint32_t>(images.rows()));
  detail::put_be32(b, rows);
  detail::put_be32(b, cols);
  for (Index k = 0; k < images.size(); ++k) {
    const double v = std::clamp(images.data()[k], 0.0, 1.0);
    b.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  return b;
}

inline std::vector<unsigned char> encode_idx_labels(const std::vector<int>& labels) {
  std::vector<unsigned char> b;
  detail::put_be32(b, kIdxLabelMagic);
  detail::put_be32(b, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) b.push_back(static_cast<unsigned char>(l));
  return b;
}

inline void write_bytes(const std::string& path, const std::vector<unsigned char>& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

// ---- synthetic ------------------------------------------------------------

enum class ToyKind { gaussian_mixture_8, two_moons };

inline ToyKind parse_toy_kind(const std::string& s) {
  if (s == "gaussian_mixture_8") return ToyKind::gaussian_mixture_8;
  if (s == "two_moons") return ToyKind::two_moons;
  throw validation_error("unknown toy dataset '" + s + "'");
}

/// 2-D synthetic data, min-max rescaled into [0,1]^2. Labels hold the
/// component (mixture) or moon index. The affine map is kept in offset/scale.
inline Dataset make_toy_2d(ToyKind kind, Index n, std::uint64_t seed) {
  require(n >= 1, "make_toy_2d: n must be >= 1");
  Rng rng = make_rng({seed, 0x70790ull});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> component(0, kind == ToyKind::gaussian_mixture_8 ? 7 : 1);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);

  Matrix raw(n, 2);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int c = component(rng);
    labels[static_cast<std::size_t>(i)] = c;
    if (kind == ToyKind::gaussian_mixture_8) {
      const double theta = 2.0 * std::numbers::pi * c / 8.0;
      raw(i, 0) = 2.0 * std::cos(theta) + 0.1 * normal(rng);
      raw(i, 1) = 2.0 * std::sin(theta) + 0.1 * normal(rng);
    } else {
      const double t = angle(rng);
      if (c == 0) {
        raw(i, 0) = std::cos(t);
        raw(i, 1) = std::sin(t);
      } else {
        raw(i, 0) = 1.0 - std::cos(t);
        raw(i, 1) = 0.5 - std::sin(t);
      }
      raw(i, 0) += 0.05 * normal(rng);
      raw(i, 1) += 0.05 * normal(rng);
    }
  }

  Dataset d;
  d.offset = raw.colwise().minCoeff();
  d.scale = (raw.colwise().maxCoeff() - d.offset).cwiseMax(1e-12);
  d.images = ((raw.rowwise() - d.offset).array().rowwise() / d.scale.array()).matrix();
  d.images = d.images.cwiseMax(0.0).cwiseMin(1.0);
  d.labels = std::move(labels);
  return d;
}

// ---- batching -------------------------------------------------------------

/// Seeded per-epoch shuffling with drop-last batching.
class BatchIterator {
 public:
  BatchIterator(const Dataset& data, Index batch_size, std::uint64_t seed)
      : data_(&data), batch_size_(batch_size), seed_(seed) {
    require(data.size() >= 1, "batches: dataset is empty");
    require(batch_size >= 1, "batches: batch size must be >= 1");
    require(batch_size <= data.size(), "batches: batch size " + std::to_string(batch_size) +
                                           " exceeds dataset size " + std::to_string(data.size()));
  }

  std::uint64_t epoch() const { return epoch_; }
  Index batches_per_epoch() const { return data_->size() / batch_size_; }

  /// Row indices of this epoch's permutation.
  std::vector<Index> permutation(std::uint64_t epoch) const {
    std::vector<Index> idx(static_cast<std::size_t>(data_->size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    Rng rng = make_rng({seed_, epoch});
    // Fisher-Yates with explicit draws; std::shuffle's algorithm is implementation-defined.
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(idx[i - 1], idx[pick(rng)]);
    }
    return idx;
  }

  /// All full batches of the next epoch; advances the epoch counter.
  std::vector<Matrix> next_epoch() {
    const auto idx = permutation(epoch_++);
    std::vector<Matrix> out;
    const Index nb = batches_per_epoch();
    out.reserve(static_cast<std::size_t>(nb));
    for (Index b = 0; b < nb; ++b) {
      Matrix m(batch_size_, data_->dim());
      for (Index r = 0; r < batch_size_; ++r)
        m.row(r) = data_->images.row(idx[static_cast<std::size_t>(b * batch_size_ + r)]);
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  const Dataset* data_;
  Index batch_size_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
};

}  // namespace dsaae

#endif  // DSAAE_DATA_HPP
