#pragma once

// Independent reference computations used only by the tests: quadrature
// against the limiting noise density, finite differences, and exhaustive
// search over sparse weight supports. Nothing here calls the code under
// test, so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace testref {

// Limiting density of the noise singular values for aspect ratio c and
// observation probability p, supported on [sqrt(p)(1-sqrt(c)), sqrt(p)(1+sqrt(c))].
// Integrates h against it via x^2 = p(1+c) + 2 p sqrt(c) sin(t), which turns
// the edge square roots into a smooth cos^2 factor.
inline double mp_integrate(const std::function<double(double)>& h, double c,
                           double p, int panels = 40000) {
  const double half_pi = std::asin(1.0);
  const double dt = 2.0 * half_pi / panels;
  auto integrand = [&](double t) {
    const double sin_t = std::sin(t);
    const double u = p * (1.0 + c) + 2.0 * p * std::sqrt(c) * sin_t;
    // at c = 1 the support touches zero and cos^2(t) / u has the finite
    // limit (1 - sin t) / (2 p) at the lower endpoint
    const double ratio = u > 0.0 ? (1.0 - sin_t * sin_t) / u
                                 : (1.0 - sin_t) / (2.0 * p);
    return h(std::sqrt(std::max(u, 0.0))) * 2.0 * p * ratio / (half_pi * 2.0);
  };
  double acc = integrand(-half_pi) + integrand(half_pi);
  for (int k = 1; k < panels; ++k) {
    const double t = -half_pi + k * dt;
    acc += integrand(t) * (k % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * dt / 3.0;
}

inline double mp_phi(double z, double c, double p) {
  return mp_integrate([z](double x) { return z / (z * z - x * x); }, c, p);
}

// D(z) = phi(z) * phi_tilde(z) with phi_tilde over the zero-padded spectrum.
inline double mp_d_quadrature(double z, double c, double p) {
  const double phi = mp_phi(z, c, p);
  return phi * (c * phi + (1.0 - c) / z);
}

inline double central_difference(const std::function<double(double)>& f,
                                 double z, double h) {
  return (f(z + h) - f(z - h)) / (2.0 * h);
}

struct SupportSearch {
  std::vector<int> support;  // ascending indices
  Eigen::VectorXd weights;   // full-length vector, zeros off support
  double objective = 0.0;    // sum over support of w^2 - 2 w k
};

// Exhaustive minimizer of ||S - sum w_i u_i v_i^T||^2 over nonnegative
// weights with at most r_hat nonzeros. Per support the objective separates,
// so the optimum on the support is w_i = max(k_i, 0); supports are scanned
// in lexicographic order and only strict improvements are kept, which makes
// the first-best (lowest-index) support the winner on ties.
inline SupportSearch brute_force_best_support(const Eigen::VectorXd& k_values,
                                              int r_hat) {
  const int q = static_cast<int>(k_values.size());
  std::vector<char> selector(static_cast<std::size_t>(q), 0);
  std::fill(selector.begin(), selector.begin() + r_hat, 1);

  SupportSearch best;
  best.objective = std::numeric_limits<double>::infinity();
  do {
    double objective = 0.0;
    for (int i = 0; i < q; ++i) {
      if (!selector[static_cast<std::size_t>(i)]) continue;
      const double w = std::max(k_values[i], 0.0);
      objective += w * w - 2.0 * w * k_values[i];
    }
    if (objective < best.objective) {
      best.objective = objective;
      best.support.clear();
      best.weights = Eigen::VectorXd::Zero(q);
      for (int i = 0; i < q; ++i) {
        if (!selector[static_cast<std::size_t>(i)]) continue;
        best.support.push_back(i);
        best.weights[i] = std::max(k_values[i], 0.0);
      }
    }
  } while (std::prev_permutation(selector.begin(), selector.end()));
  return best;
}

}  // namespace testref
