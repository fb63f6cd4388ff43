#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "optshrink/dtransform.hpp"
#include "optshrink/linalg.hpp"
#include "optshrink/random.hpp"

namespace optshrink {

enum class ShrinkageMethod { optshrink, eym, svt, oracle };

inline std::string to_string(ShrinkageMethod method) {
  switch (method) {
    case ShrinkageMethod::optshrink: return "optshrink";
    case ShrinkageMethod::eym: return "eym";
    case ShrinkageMethod::svt: return "svt";
    case ShrinkageMethod::oracle: return "oracle";
  }
  return "unknown";
}

struct ShrinkageWeights {
  Vector weights;  // applied to the leading weights.size() components
  ShrinkageMethod method = ShrinkageMethod::optshrink;
  Index r_hat = 0;
};

struct DenoiseReport {
  ShrinkageWeights weights;
  Vector sigma_hat;        // retained singular values
  Vector d_values;         // D_hat at each retained value, 0 where flagged
  Vector d_prime_values;   // D_hat' at each retained value, 0 where flagged
  double mse_estimate = 0.0;
  double rel_mse_estimate = 0.0;

  struct Metadata {
    Index rows = 0;
    Index cols = 0;
    bool transposed = false;  // input arrived with rows > cols
    std::uint64_t seed = 0;
    std::string rng = std::string(rng::generator_name);
    std::vector<Index> flagged_components;  // pole-proximate, weight forced to 0
    bool rel_mse_clamped = false;
    double observed_fraction = 1.0;
  } metadata;
};

// Data-driven shrinkage: each retained singular value gets the weight
// w_i = -2 * D_hat(sigma_i) / D_hat'(sigma_i) computed from the noise
// spectrum left after removing the top r_hat values. Retained values too
// close to that spectrum cannot be separated from noise; they are flagged
// and their weight forced to 0 instead of failing the whole denoise.
inline DenoiseReport optshrink(const SvdFactors& factors, Index r_hat) {
  const Index q = factors.q();
  if (r_hat < 1 || r_hat >= q) {
    throw std::invalid_argument("optshrink needs 1 <= rHat < min(n, m)");
  }
  const NoiseSpectrum spectrum = make_noise_spectrum(factors, r_hat);

  DenoiseReport report;
  report.weights.method = ShrinkageMethod::optshrink;
  report.weights.r_hat = r_hat;
  report.weights.weights = Vector::Zero(r_hat);
  report.sigma_hat = factors.singular_values.head(r_hat);
  report.d_values = Vector::Zero(r_hat);
  report.d_prime_values = Vector::Zero(r_hat);
  report.metadata.rows = factors.rows();
  report.metadata.cols = factors.cols();
  report.metadata.transposed = factors.rows() > factors.cols();

  double signal_energy_estimate = 0.0;  // sum over valid components of 1/D_hat
  double weight_energy = 0.0;
  for (Index i = 0; i < r_hat; ++i) {
    const double sigma = report.sigma_hat[i];
    try {
      const double d = empirical_d(sigma, spectrum);
      const double d_prime = empirical_d_derivative(sigma, spectrum);
      const double w = -2.0 * d / d_prime;
      report.d_values[i] = d;
      report.d_prime_values[i] = d_prime;
      report.weights.weights[i] = w;
      signal_energy_estimate += 1.0 / d;
      weight_energy += w * w;
    } catch (const pole_proximity_error&) {
      report.metadata.flagged_components.push_back(i);
    }
  }

  report.mse_estimate = signal_energy_estimate - weight_energy;
  if (signal_energy_estimate > 0.0) {
    const double raw = 1.0 - weight_energy / signal_energy_estimate;
    report.rel_mse_estimate = std::clamp(raw, 0.0, 1.0);
    report.metadata.rel_mse_clamped = raw != report.rel_mse_estimate;
  } else {
    // every component flagged: nothing recoverable, report total relative loss
    report.rel_mse_estimate = 1.0;
  }
  return report;
}

// Truncation baseline: keep the top r_hat singular values untouched.
inline ShrinkageWeights eym_weights(const SvdFactors& factors, Index r_hat) {
  if (r_hat < 1 || r_hat > factors.q()) {
    throw std::invalid_argument("truncation needs 1 <= rHat <= min(n, m)");
  }
  ShrinkageWeights out;
  out.method = ShrinkageMethod::eym;
  out.r_hat = r_hat;
  out.weights = factors.singular_values.head(r_hat);
  return out;
}

// Soft thresholding: w_i = max(sigma_i - lambda, 0), zero weights dropped.
inline ShrinkageWeights svt_weights(const SvdFactors& factors, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("svt threshold must be nonnegative and finite");
  }
  Index retained = 0;
  while (retained < factors.q() &&
         factors.singular_values[retained] > lambda) {
    ++retained;
  }
  ShrinkageWeights out;
  out.method = ShrinkageMethod::svt;
  out.r_hat = retained;
  out.weights =
      (factors.singular_values.head(retained).array() - lambda).matrix();
  return out;
}

// Rebuild sum_i w_i u_i v_i^T over the leading weights.size() components.
inline Matrix reconstruct(const SvdFactors& factors, const Vector& weights) {
  const Index k = weights.size();
  if (k > factors.q()) {
    throw std::invalid_argument("more weights than singular components");
  }
  if (k == 0) {
    return Matrix::Zero(factors.rows(), factors.cols());
  }
  return factors.left.leftCols(k) * weights.asDiagonal() *
         factors.right.leftCols(k).transpose();
}

inline Matrix reconstruct(const SvdFactors& factors, const ShrinkageWeights& weights) {
  return reconstruct(factors, weights.weights);
}

inline void to_json(nlohmann::json& j, const ShrinkageWeights& w) {
  j = nlohmann::json{
      {"weights", std::vector<double>(w.weights.begin(), w.weights.end())},
      {"method", to_string(w.method)},
      {"rHat", w.r_hat}};
}

inline void to_json(nlohmann::json& j, const DenoiseReport& report) {
  j = nlohmann::json{
      {"weights", report.weights},
      {"sigmaHat", std::vector<double>(report.sigma_hat.begin(), report.sigma_hat.end())},
      {"dValues", std::vector<double>(report.d_values.begin(), report.d_values.end())},
      {"dPrimeValues", std::vector<double>(report.d_prime_values.begin(),
                                           report.d_prime_values.end())},
      {"mseEstimate", report.mse_estimate},
      {"relMseEstimate", report.rel_mse_estimate},
      {"metadata",
       {{"rows", report.metadata.rows},
        {"cols", report.metadata.cols},
        {"transposed", report.metadata.transposed},
        {"seed", report.metadata.seed},
        {"rng", report.metadata.rng},
        {"flaggedComponents", report.metadata.flagged_components},
        {"relMseClamped", report.metadata.rel_mse_clamped},
        {"observedFraction", report.metadata.observed_fraction}}}};
}

}  // namespace optshrink
