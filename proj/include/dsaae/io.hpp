#ifndef DSAAE_IO_HPP
#define DSAAE_IO_HPP

// Text output helpers: shortest round-trip number formatting, CSV, PGM.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "dsaae/core.hpp"

namespace dsaae {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_field(fields[i]);
  }
  out << "\r\n";
}

inline void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  write_csv_row(out, header);
  std::vector<std::string> row(static_cast<std::size_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = format_double(m(i, j));
    write_csv_row(out, row);
  }
}

inline std::vector<std::string> numbered_header(const std::string& prefix, Index n) {
  std::vector<std::string> h;
  for (Index i = 0; i < n; ++i) h.push_back(prefix + std::to_string(i));
  return h;
}

/// Binary PGM (P5, maxval 255) grid of square images, `grid_width` tiles per
/// row. Pixel = round(255 * clamp(value, 0, 1)); unused tiles are black.
inline std::vector<unsigned char> encode_pgm_grid(const Matrix& images, Index side, Index grid_width) {
  require(side >= 1 && images.cols() == side * side, "pgm: rows must be square images");
  require(grid_width >= 1, "pgm: grid width must be >= 1");
  require(images.rows() >= 1, "pgm: no images");
  const Index cols = std::min(grid_width, images.rows());
  const Index rows = (images.rows() + cols - 1) / cols;
  const Index w = cols * side, h = rows * side;
  const std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  const std::size_t base = out.size();
  out.resize(base + static_cast<std::size_t>(w * h), 0);
  for (Index k = 0; k < images.rows(); ++k) {
    const Index ty = k / cols, tx = k % cols;
    for (Index py = 0; py < side; ++py)
      for (Index px = 0; px < side; ++px) {
        const double v = std::clamp(images(k, py * side + px), 0.0, 1.0);
        const Index y = ty * side + py, x = tx * side + px;
        out[base + static_cast<std::size_t>(y * w + x)] = static_cast<unsigned char>(std::lround(255.0 * v));
      }
  }
  return out;
}

/// Side length if `d` is a perfect square, else 0.
inline Index square_side(Index d) {
  const auto s = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(d))));
  return s * s == d ? s : 0;
}

}  // namespace dsaae

#endif  // DSAAE_IO_HPP
