#ifndef DSAAE_CORE_HPP
#define DSAAE_CORE_HPP

// Shared numeric types and the error hierarchy used across the library.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dsaae {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Base class for every error raised by the library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
struct shape_error : error {
  using error::error;
};

/// Argument outside its documented domain (empty batch, non-finite value, bad config).
struct validation_error : error {
  using error::error;
};

/// Byte stream does not follow the expected file format.
struct format_error : error {
  using error::error;
};

/// API misuse between paired calls, e.g. a stale forward cache.
struct contract_error : error {
  using error::error;
};

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw shape_error(what);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw validation_error(what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const std::string& what) {
  if (!m.allFinite()) throw validation_error(what + ": non-finite value");
}

inline std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace dsaae

#endif  // DSAAE_CORE_HPP
