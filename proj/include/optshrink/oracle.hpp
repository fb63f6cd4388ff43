#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <vector>

#include "optshrink/linalg.hpp"
#include "optshrink/shrinkage.hpp"

namespace optshrink {

// K_ii = sum_j theta_j (u_hat_i . u_j)(v_j . v_hat_i): the cross-correlation
// between each empirical singular component and the planted signal. The
// positive part of this diagonal is the best weight an estimator restricted
// to the empirical singular vectors can ever assign.
inline Vector oracle_diagonal(const SignalSpec& signal, const SvdFactors& factors) {
  validate_signal(signal);
  if (signal.left.rows() != factors.rows() ||
      signal.right.rows() != factors.cols()) {
    throw std::invalid_argument("signal and factor dimensions disagree");
  }
  const Matrix left_overlap = factors.left.transpose() * signal.left;    // q x r
  const Matrix right_overlap = factors.right.transpose() * signal.right; // q x r
  const Index q = factors.q();
  Vector k_values(q);
  for (Index i = 0; i < q; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < signal.rank(); ++j) {
      acc += signal.thetas[j] * left_overlap(i, j) * right_overlap(i, j);
    }
    k_values[i] = acc;
  }
  return k_values;
}

// Optimal weights over the first r components: w_i = max(K_ii, 0).
inline ShrinkageWeights oracle_weights(const Vector& k_values, Index r) {
  if (r < 1 || r > k_values.size()) {
    throw std::invalid_argument("oracle needs 1 <= r <= q");
  }
  ShrinkageWeights out;
  out.method = ShrinkageMethod::oracle;
  out.r_hat = r;
  out.weights = k_values.head(r).cwiseMax(0.0);
  return out;
}

// Best weights under a retained-component budget: keep the r_hat largest
// entries of (K_ii)+ at their original positions, ties won by lower index.
inline ShrinkageWeights rank_regularized_weights(const Vector& k_values, Index r_hat) {
  const Index q = k_values.size();
  if (r_hat < 1 || r_hat > q) {
    throw std::invalid_argument("rank budget needs 1 <= rHat <= q");
  }
  std::vector<Index> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::max(k_values[a], 0.0) > std::max(k_values[b], 0.0);
  });
  ShrinkageWeights out;
  out.method = ShrinkageMethod::oracle;
  out.r_hat = r_hat;
  out.weights = Vector::Zero(q);
  for (Index rank = 0; rank < r_hat; ++rank) {
    const Index position = order[static_cast<std::size_t>(rank)];
    out.weights[position] = std::max(k_values[position], 0.0);
  }
  return out;
}

// Expansion route for the squared error, in terms of the oracle diagonal:
// ||S - sum w_i u_i v_i^T||_F^2 = sum theta^2 + sum w^2 - 2 sum w_i K_ii.
inline double exact_squared_error_expanded(const Vector& thetas,
                                           const Vector& k_values,
                                           const Vector& weights) {
  if (weights.size() > k_values.size()) {
    throw std::invalid_argument("more weights than oracle diagonal entries");
  }
  return thetas.squaredNorm() + weights.squaredNorm() -
         2.0 * weights.dot(k_values.head(weights.size()));
}

// Direct Frobenius evaluation; debug builds cross-check it against the
// expansion route and refuse to return silently diverging answers.
inline double exact_squared_error(const SignalSpec& signal,
                                  const SvdFactors& factors,
                                  const Vector& weights) {
  validate_signal(signal);
  const double direct =
      (signal.materialize() - reconstruct(factors, weights)).squaredNorm();
#ifndef NDEBUG
  const double expanded = exact_squared_error_expanded(
      signal.thetas, oracle_diagonal(signal, factors), weights);
  const double scale = std::max({1.0, direct, std::abs(expanded)});
  assert(std::abs(direct - expanded) <= 1e-10 * scale &&
         "squared error computation paths diverged");
#endif
  return direct;
}

inline double exact_squared_error(const SignalSpec& signal,
                                  const SvdFactors& factors,
                                  const ShrinkageWeights& weights) {
  return exact_squared_error(signal, factors, weights.weights);
}

}  // namespace optshrink
