#pragma once

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "optshrink/dtransform.hpp"
#include "optshrink/linalg.hpp"

namespace optshrink {

// Large-matrix limits for one signal component of strength theta under
// Gaussian noise with aspect ratio c and observation probability p. The
// missing-data case reduces to noise variance p and effective spike p*theta,
// so every mean squared error below is for approximating p*S.
struct AsymptoticPrediction {
  double theta = 0.0;
  bool above_threshold = false;
  double rho = 0.0;            // limit of the top empirical singular value
  double w_opt_limit = 0.0;    // limit of the optimal weight
  double w_eym_limit = 0.0;    // limit of the truncation weight (= rho)
  double mse_opt_limit = 0.0;
  double mse_eym_limit = 0.0;
};

inline double phase_transition_threshold(const MpParams& mp) {
  return std::pow(mp.c, 0.25) / std::sqrt(mp.p);
}

inline AsymptoticPrediction predict_spike(double theta, const MpParams& mp) {
  validate_mp(mp);
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("spike amplitude must be positive and finite");
  }
  const double c = mp.c;
  const double p = mp.p;
  const double effective_energy = p * theta * theta;   // spike energy over noise scale
  const double signal_energy = p * p * theta * theta;  // squared spike of p*S

  AsymptoticPrediction out;
  out.theta = theta;
  out.above_threshold = theta > phase_transition_threshold(mp);
  if (out.above_threshold) {
    out.rho = std::sqrt(p) *
              std::sqrt((1.0 + effective_energy) * (c + effective_energy) /
                        effective_energy);
    const double left_overlap_sq =
        1.0 - c * (1.0 + effective_energy) /
                  (effective_energy * (effective_energy + c));
    const double right_overlap_sq =
        1.0 - (c + effective_energy) /
                  (effective_energy * (effective_energy + 1.0));
    out.w_opt_limit =
        p * theta * std::sqrt(left_overlap_sq) * std::sqrt(right_overlap_sq);
    out.w_eym_limit = out.rho;
    out.mse_opt_limit = signal_energy - out.w_opt_limit * out.w_opt_limit;
    // identity route: the cross term 4 rho / ((p theta)^2 D'(rho)) equals
    // -2 rho w_opt, cross-checked against the D' route in the test suite
    out.mse_eym_limit =
        signal_energy + out.rho * out.rho - 2.0 * out.rho * out.w_opt_limit;
  } else {
    out.rho = mp.bulk_edge();
    out.w_opt_limit = 0.0;
    out.w_eym_limit = out.rho;
    out.mse_opt_limit = signal_energy;
    out.mse_eym_limit = signal_energy + out.rho * out.rho;
  }
  return out;
}

// Observation probability below which a spike of strength theta is absorbed
// by the noise bulk: p_c = sqrt(c) / theta^2.
inline double phase_transition_p(double theta, double c) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("spike amplitude must be positive and finite");
  }
  if (!(c > 0.0 && c <= 1.0)) {
    throw std::invalid_argument("aspect ratio c must lie in (0, 1]");
  }
  return std::sqrt(c) / (theta * theta);
}

inline Index effective_rank(const Vector& thetas, const MpParams& mp) {
  validate_mp(mp);
  const double threshold = phase_transition_threshold(mp);
  Index count = 0;
  for (Index i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] > 0.0) || !std::isfinite(thetas[i])) {
      throw std::invalid_argument("spike amplitudes must be positive and finite");
    }
    if (i > 0 && thetas[i] > thetas[i - 1]) {
      throw std::invalid_argument("spike amplitudes must be sorted descending");
    }
    if (thetas[i] > threshold) ++count;
  }
  return count;
}

// Limiting squared error of an arbitrary fixed weight vector applied to the
// top components: sum_i (p theta_i)^2 + w_i^2 + 4 w_i / ((p theta_i)^2 D'(rho_i)).
// Components below the phase transition carry no usable cross term; with
// assume_delocalization they contribute (p theta_i)^2 + w_i^2, otherwise the
// limit is not covered by the supported theory and we refuse.
inline double limiting_mse(const Vector& thetas, const Vector& weights,
                           const MpParams& mp,
                           bool assume_delocalization = false) {
  validate_mp(mp);
  const Index terms = std::max(thetas.size(), weights.size());
  if (terms == 0) {
    throw std::invalid_argument("need at least one spike or weight");
  }
  const double threshold = phase_transition_threshold(mp);
  double total = 0.0;
  for (Index i = 0; i < terms; ++i) {
    const double theta = i < thetas.size() ? thetas[i] : 0.0;
    const double w = i < weights.size() ? weights[i] : 0.0;
    const double signal_energy = mp.p * mp.p * theta * theta;
    if (theta > threshold) {
      const AsymptoticPrediction pred = predict_spike(theta, mp);
      const double d_prime = mp_d_transform_derivative(pred.rho, mp);
      total += signal_energy + w * w +
               4.0 * w / (mp.p * theta * theta * mp.p * d_prime);
    } else if (assume_delocalization) {
      total += signal_energy + w * w;
    } else {
      throw std::domain_error(
          "spike at or below the phase transition; rerun with "
          "assume_delocalization to use the zero-overlap extension");
    }
  }
  return total;
}

inline void to_json(nlohmann::json& j, const AsymptoticPrediction& pred) {
  j = nlohmann::json{{"theta", pred.theta},
                     {"aboveThreshold", pred.above_threshold},
                     {"rho", pred.rho},
                     {"wOptLimit", pred.w_opt_limit},
                     {"wEymLimit", pred.w_eym_limit},
                     {"mseOptLimit", pred.mse_opt_limit},
                     {"mseEymLimit", pred.mse_eym_limit}};
}

}  // namespace optshrink
