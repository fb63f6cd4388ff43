#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace optshrink {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline void validate_finite(const Matrix& a, const std::string& what) {
  if (a.size() == 0) {
    throw std::invalid_argument(what + " must be non-empty");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument(what + " contains non-finite entries");
  }
}

inline double frobenius_norm_sq(const Matrix& a) {
  validate_finite(a, "matrix");
  return a.squaredNorm();
}

// Full SVD of a dense real matrix, singular values sorted descending.
struct SvdFactors {
  Vector singular_values;  // length q = min(rows, cols)
  Matrix left;             // rows x q, orthonormal columns
  Matrix right;            // cols x q, orthonormal columns

  Index rows() const { return left.rows(); }
  Index cols() const { return right.rows(); }
  Index q() const { return singular_values.size(); }
};

inline SvdFactors svd(const Matrix& a) {
  validate_finite(a, "svd input");
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return SvdFactors{dec.singularValues(), dec.matrixU(), dec.matrixV()};
}

// Planted low-rank signal S = sum_i theta_i u_i v_i^T with orthonormal frames.
struct SignalSpec {
  Vector thetas;  // strictly descending, positive
  Matrix left;    // n x r
  Matrix right;   // m x r

  Index rank() const { return thetas.size(); }

  Matrix materialize() const {
    return left * thetas.asDiagonal() * right.transpose();
  }
};

inline void validate_frame(const Matrix& frame, const std::string& what,
                           double tol = 1e-8) {
  validate_finite(frame, what);
  if (frame.rows() < frame.cols()) {
    throw std::invalid_argument(what + " must be tall (rows >= cols)");
  }
  Matrix gram = frame.transpose() * frame;
  gram.diagonal().array() -= 1.0;
  if (gram.cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument(what + " columns are not orthonormal");
  }
}

inline void validate_signal(const SignalSpec& spec) {
  if (spec.thetas.size() == 0) {
    throw std::invalid_argument("signal must have at least one component");
  }
  for (Index i = 0; i < spec.thetas.size(); ++i) {
    if (!(spec.thetas[i] > 0.0)) {
      throw std::invalid_argument("signal amplitudes must be positive");
    }
    if (i > 0 && !(spec.thetas[i] < spec.thetas[i - 1])) {
      throw std::invalid_argument("signal amplitudes must be strictly descending");
    }
  }
  if (spec.left.cols() != spec.rank() || spec.right.cols() != spec.rank()) {
    throw std::invalid_argument("signal frames must have one column per amplitude");
  }
  validate_frame(spec.left, "left signal frame");
  validate_frame(spec.right, "right signal frame");
}

}  // namespace optshrink
