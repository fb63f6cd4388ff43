#pragma once

#include <cmath>
#include <stdexcept>

#include "optshrink/errors.hpp"
#include "optshrink/linalg.hpp"

namespace optshrink {

// Relative clearance required between an evaluation point and the top of the
// noise spectrum before the resolvent sums are trusted.
inline constexpr double guard_gap = 1e-4;

// Empirical noise spectrum: the singular values left after removing the top
// r_hat, treated as an (effRows x effCols) diagonal with effRows ~ n - r_hat,
// effCols ~ m - r_hat and effRows <= effCols. Inputs with more rows than
// columns are handled by swapping the roles of the two dimensions.
struct NoiseSpectrum {
  Vector values;  // descending, length eff_rows
  Index eff_rows = 0;
  Index eff_cols = 0;

  double edge() const { return values.size() > 0 ? values[0] : 0.0; }
};

inline void validate_spectrum(const NoiseSpectrum& spectrum) {
  if (spectrum.eff_rows < 1 || spectrum.eff_cols < spectrum.eff_rows) {
    throw std::invalid_argument("noise spectrum needs 1 <= effRows <= effCols");
  }
  if (spectrum.values.size() != spectrum.eff_rows) {
    throw std::invalid_argument("noise spectrum needs one value per effective row");
  }
  for (Index i = 0; i < spectrum.values.size(); ++i) {
    const double s = spectrum.values[i];
    if (!std::isfinite(s) || s < 0.0) {
      throw std::invalid_argument("noise singular values must be finite and nonnegative");
    }
    if (i > 0 && s > spectrum.values[i - 1]) {
      throw std::invalid_argument("noise singular values must be sorted descending");
    }
  }
}

inline NoiseSpectrum make_noise_spectrum(const SvdFactors& factors, Index r_hat) {
  const Index q = factors.q();
  if (r_hat < 0 || r_hat >= q) {
    throw std::invalid_argument("noise spectrum needs 0 <= rHat < q");
  }
  const Index small_dim = std::min(factors.rows(), factors.cols());
  const Index large_dim = std::max(factors.rows(), factors.cols());
  NoiseSpectrum spectrum;
  spectrum.values = factors.singular_values.tail(q - r_hat);
  spectrum.eff_rows = small_dim - r_hat;
  spectrum.eff_cols = large_dim - r_hat;
  return spectrum;
}

namespace detail {

inline void check_guard(double z, const NoiseSpectrum& spectrum) {
  if (!std::isfinite(z)) {
    throw std::invalid_argument("evaluation point must be finite");
  }
  // covers the all-zero spectrum too: its pole sits at the origin
  if (z <= spectrum.edge() * (1.0 + guard_gap) || z <= 0.0) {
    throw pole_proximity_error(z, spectrum.edge(), guard_gap);
  }
}

}  // namespace detail

// D_hat(z) = phi1(z) * phi2(z) where
//   phi1(z) = mean over the effRows values of z / (z^2 - s_i^2)
//   phi2(z) = same sum plus one 1/z term per padded zero, averaged over effCols.
inline double empirical_d(double z, const NoiseSpectrum& spectrum) {
  validate_spectrum(spectrum);
  detail::check_guard(z, spectrum);
  double resolvent_sum = 0.0;
  for (Index i = 0; i < spectrum.values.size(); ++i) {
    const double s = spectrum.values[i];
    resolvent_sum += z / (z * z - s * s);
  }
  const double padded = static_cast<double>(spectrum.eff_cols - spectrum.eff_rows);
  const double phi1 = resolvent_sum / static_cast<double>(spectrum.eff_rows);
  const double phi2 =
      (resolvent_sum + padded / z) / static_cast<double>(spectrum.eff_cols);
  return phi1 * phi2;
}

// Product-rule derivative of the same two factors; each spectrum value
// contributes -(z^2 + s_i^2) / (z^2 - s_i^2)^2 and each padded zero -1/z^2.
inline double empirical_d_derivative(double z, const NoiseSpectrum& spectrum) {
  validate_spectrum(spectrum);
  detail::check_guard(z, spectrum);
  double resolvent_sum = 0.0;
  double resolvent_derivative_sum = 0.0;
  for (Index i = 0; i < spectrum.values.size(); ++i) {
    const double s = spectrum.values[i];
    const double gap = z * z - s * s;
    resolvent_sum += z / gap;
    resolvent_derivative_sum += -(z * z + s * s) / (gap * gap);
  }
  const double padded = static_cast<double>(spectrum.eff_cols - spectrum.eff_rows);
  const double eff_rows = static_cast<double>(spectrum.eff_rows);
  const double eff_cols = static_cast<double>(spectrum.eff_cols);
  const double phi1 = resolvent_sum / eff_rows;
  const double phi2 = (resolvent_sum + padded / z) / eff_cols;
  const double phi1_prime = resolvent_derivative_sum / eff_rows;
  const double phi2_prime =
      (resolvent_derivative_sum - padded / (z * z)) / eff_cols;
  return phi1_prime * phi2 + phi1 * phi2_prime;
}

// Marchenko-Pastur limit of the noise singular value distribution for an
// n x m Gaussian matrix with entry variance p/m, aspect ratio c = n/m <= 1.
struct MpParams {
  double c = 1.0;
  double p = 1.0;

  double bulk_edge() const { return std::sqrt(p) * (1.0 + std::sqrt(c)); }
  double bulk_lower_edge() const { return std::sqrt(p) * (1.0 - std::sqrt(c)); }
};

inline void validate_mp(const MpParams& mp) {
  if (!(mp.c > 0.0 && mp.c <= 1.0)) {
    throw std::invalid_argument("aspect ratio c must lie in (0, 1]");
  }
  if (!(mp.p > 0.0 && mp.p <= 1.0)) {
    throw std::invalid_argument("observation probability p must lie in (0, 1]");
  }
}

// Closed form of the limiting D-transform for z above the bulk edge:
//   D(z) = (y - sqrt(y^2 - 4 p^2 c)) / (2 p^2 c),  y = z^2 - p(1 + c),
// evaluated through the conjugate 2 / (y + sqrt(y^2 - 4 p^2 c)): the
// textbook numerator cancels catastrophically once y^2 dwarfs 4 p^2 c.
inline double mp_d_transform(double z, const MpParams& mp) {
  validate_mp(mp);
  if (!(z > mp.bulk_edge())) {
    throw std::invalid_argument("D-transform defined only above the bulk edge");
  }
  const double centered = z * z - mp.p * (1.0 + mp.c);
  const double root =
      std::sqrt(centered * centered - 4.0 * mp.p * mp.p * mp.c);
  return 2.0 / (centered + root);
}

// Derivative of the closed form, z (1 - y / sqrt(y^2 - 4 p^2 c)) / (p^2 c),
// in the same cancellation-free conjugate arrangement.
inline double mp_d_transform_derivative(double z, const MpParams& mp) {
  validate_mp(mp);
  if (!(z > mp.bulk_edge())) {
    throw std::invalid_argument("D-transform defined only above the bulk edge");
  }
  const double centered = z * z - mp.p * (1.0 + mp.c);
  const double root =
      std::sqrt(centered * centered - 4.0 * mp.p * mp.p * mp.c);
  return -4.0 * z / (root * (centered + root));
}

}  // namespace optshrink
