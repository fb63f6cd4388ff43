#pragma once

#include <cstdint>

#include "optshrink/linalg.hpp"
#include "optshrink/random.hpp"

namespace fixtures {

// Factors of a diagonal matrix with the given spectrum, identity frames.
inline optshrink::SvdFactors diag_factors(const optshrink::Vector& sigma,
                                          optshrink::Index n,
                                          optshrink::Index m) {
  optshrink::SvdFactors f;
  f.singular_values = sigma;
  f.left = optshrink::Matrix::Identity(n, sigma.size());
  f.right = optshrink::Matrix::Identity(m, sigma.size());
  return f;
}

struct PlantedInstance {
  optshrink::SignalSpec signal;
  optshrink::SvdFactors factors;
};

// Signal plus Gaussian noise of variance 1/m, already factored.
inline PlantedInstance planted_instance(optshrink::Index n, optshrink::Index m,
                                        const optshrink::Vector& thetas,
                                        std::uint64_t seed) {
  using namespace optshrink;
  const Matrix left =
      sample_orthonormal_frame(n, thetas.size(), rng::derive_seed(seed, 0, 0));
  const Matrix right =
      sample_orthonormal_frame(m, thetas.size(), rng::derive_seed(seed, 1, 0));
  SignalSpec signal{thetas, left, right};
  const Matrix noisy =
      signal.materialize() +
      sample_gaussian_matrix(n, m, 1.0 / static_cast<double>(m),
                             rng::derive_seed(seed, 2, 0));
  return PlantedInstance{signal, svd(noisy)};
}

}  // namespace fixtures
