#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

#include "optshrink/linalg.hpp"

namespace optshrink {

// Every sampling routine in the project runs off this one engine so that any
// output can be reproduced from the (generator, seed) pair echoed in reports.
namespace rng {

using engine = std::mt19937_64;

inline constexpr std::string_view generator_name = "mt19937_64";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream/index mixing for independent substreams (per grid point, per trial,
// per sampled object). Plain seed^index would reuse noise across streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t index) {
  std::uint64_t z = splitmix64(base ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  return splitmix64(z ^ (0xbf58476d1ce4e5b9ULL * (index + 1)));
}

}  // namespace rng

inline Matrix sample_gaussian_matrix(Index rows, Index cols, double variance,
                                     std::uint64_t seed) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("gaussian sample dimensions must be positive");
  }
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("gaussian variance must be positive and finite");
  }
  rng::engine eng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      out(i, j) = normal(eng);
    }
  }
  return out;
}

// Haar-like orthonormal frame: QR of a Gaussian matrix, with column signs
// fixed by the R diagonal so the distribution is rotation invariant.
inline Matrix sample_orthonormal_frame(Index n, Index r, std::uint64_t seed) {
  if (r < 1 || n < r) {
    throw std::invalid_argument("frame needs 1 <= r <= n");
  }
  Matrix gauss = sample_gaussian_matrix(n, r, 1.0, seed);
  Eigen::HouseholderQR<Matrix> qr(gauss);
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  for (Index j = 0; j < r; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) {
      q.col(j) = -q.col(j);
    }
  }
  return q;
}

inline Matrix sample_mask(Index rows, Index cols, double p, std::uint64_t seed) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("mask dimensions must be positive");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("mask probability must lie in [0, 1]");
  }
  rng::engine eng(seed);
  std::bernoulli_distribution keep(p);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      out(i, j) = keep(eng) ? 1.0 : 0.0;
    }
  }
  return out;
}

}  // namespace optshrink
