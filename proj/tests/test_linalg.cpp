#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "optshrink/linalg.hpp"
#include "optshrink/random.hpp"

namespace {

using namespace optshrink;

double max_gram_deviation(const Matrix& frame) {
  Matrix gram = frame.transpose() * frame;
  gram.diagonal().array() -= 1.0;
  return gram.cwiseAbs().maxCoeff();
}

TEST(Svd, DiagonalMatrix) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  const SvdFactors f = svd(a);
  ASSERT_EQ(f.q(), 2);
  EXPECT_DOUBLE_EQ(f.singular_values[0], 3.0);
  EXPECT_DOUBLE_EQ(f.singular_values[1], 1.0);
  // singular vectors are the standard basis up to sign
  EXPECT_NEAR(std::abs(f.left(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(f.right(1, 1)), 1.0, 1e-12);
  const Matrix rebuilt =
      f.left * f.singular_values.asDiagonal() * f.right.transpose();
  EXPECT_NEAR((rebuilt - a).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Svd, ZeroMatrix) {
  const SvdFactors f = svd(Matrix::Zero(2, 3));
  ASSERT_EQ(f.q(), 2);
  EXPECT_EQ(f.singular_values[0], 0.0);
  EXPECT_EQ(f.singular_values[1], 0.0);
  EXPECT_LT(max_gram_deviation(f.left), 1e-12);
  EXPECT_LT(max_gram_deviation(f.right), 1e-12);
}

TEST(Svd, RankOneRecoversComponent) {
  const Vector u = sample_orthonormal_frame(5, 1, 11).col(0);
  const Vector v = sample_orthonormal_frame(4, 1, 12).col(0);
  const SvdFactors f = svd(5.0 * u * v.transpose());
  EXPECT_NEAR(f.singular_values[0], 5.0, 1e-10);
  for (Index i = 1; i < f.q(); ++i) {
    EXPECT_NEAR(f.singular_values[i], 0.0, 1e-10);
  }
  EXPECT_NEAR(std::abs(f.left.col(0).dot(u)), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(f.right.col(0).dot(v)), 1.0, 1e-10);
}

TEST(Svd, FactorsSatisfyContractOnRandomInputs) {
  const Index shapes[][2] = {{8, 12}, {12, 8}, {10, 10}};
  for (const auto& shape : shapes) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Matrix a = sample_gaussian_matrix(shape[0], shape[1], 1.0, seed);
      const SvdFactors f = svd(a);
      ASSERT_EQ(f.q(), std::min(shape[0], shape[1]));
      for (Index i = 0; i + 1 < f.q(); ++i) {
        EXPECT_GE(f.singular_values[i], f.singular_values[i + 1]);
      }
      EXPECT_GE(f.singular_values[f.q() - 1], 0.0);
      EXPECT_LT(max_gram_deviation(f.left), 1e-8);
      EXPECT_LT(max_gram_deviation(f.right), 1e-8);
      const Matrix rebuilt =
          f.left * f.singular_values.asDiagonal() * f.right.transpose();
      EXPECT_LT((rebuilt - a).norm(), 1e-6 * a.norm());
    }
  }
}

TEST(Svd, RejectsNonFiniteInput) {
  Matrix a = Matrix::Zero(3, 3);
  a(1, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(svd(a), std::invalid_argument);
  a(1, 2) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(svd(a), std::invalid_argument);
}

TEST(Frobenius, KnownValues) {
  EXPECT_DOUBLE_EQ(frobenius_norm_sq(Matrix::Identity(2, 2)), 2.0);
  EXPECT_DOUBLE_EQ(frobenius_norm_sq(Matrix::Zero(3, 4)), 0.0);
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  EXPECT_DOUBLE_EQ(frobenius_norm_sq(a), 30.0);
}

TEST(Frobenius, ParallelogramIdentity) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix a = sample_gaussian_matrix(5, 7, 1.0, seed);
    const Matrix b = sample_gaussian_matrix(5, 7, 1.0, seed + 100);
    const double lhs = frobenius_norm_sq(a + b) + frobenius_norm_sq(a - b);
    const double rhs = 2.0 * (frobenius_norm_sq(a) + frobenius_norm_sq(b));
    EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
  }
}

TEST(Sampling, GaussianMatrixMoments) {
  const Matrix a = sample_gaussian_matrix(400, 400, 1.0 / 400.0, 7);
  EXPECT_LT(std::abs(a.mean()), 0.005);
  const double sigma1 = svd(a).singular_values[0];
  EXPECT_GT(sigma1, 1.9);
  EXPECT_LT(sigma1, 2.1);
}

TEST(Sampling, GaussianMatrixIsReproducible) {
  const Matrix a = sample_gaussian_matrix(20, 30, 0.5, 99);
  const Matrix b = sample_gaussian_matrix(20, 30, 0.5, 99);
  EXPECT_TRUE((a.array() == b.array()).all());
  const Matrix c = sample_gaussian_matrix(20, 30, 0.5, 100);
  EXPECT_FALSE((a.array() == c.array()).all());
}

TEST(Sampling, GaussianMatrixValidation) {
  EXPECT_THROW(sample_gaussian_matrix(0, 3, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(sample_gaussian_matrix(3, 3, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(sample_gaussian_matrix(3, 3, -1.0, 1), std::invalid_argument);
}

TEST(Sampling, FrameIsOrthonormal) {
  const Matrix frame = sample_orthonormal_frame(12, 3, 5);
  EXPECT_LT(max_gram_deviation(frame), 1e-12);
  // square case must be a full orthogonal matrix
  const Matrix square = sample_orthonormal_frame(5, 5, 6);
  EXPECT_LT(max_gram_deviation(square), 1e-12);
  EXPECT_LT((square * square.transpose() - Matrix::Identity(5, 5))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(Sampling, FrameVectorsAreDelocalized) {
  const double bound = 5.0 * std::sqrt(std::log(400.0) / 400.0);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Matrix frame = sample_orthonormal_frame(400, 1, seed);
    EXPECT_LT(frame.cwiseAbs().maxCoeff(), bound) << "seed " << seed;
  }
}

TEST(Sampling, MaskMatchesProbability) {
  const Matrix all = sample_mask(10, 10, 1.0, 3);
  EXPECT_TRUE((all.array() == 1.0).all());
  const Matrix none = sample_mask(10, 10, 0.0, 3);
  EXPECT_TRUE((none.array() == 0.0).all());
  const Matrix half = sample_mask(400, 400, 0.5, 3);
  const double fraction = half.sum() / (400.0 * 400.0);
  EXPECT_GT(fraction, 0.49);
  EXPECT_LT(fraction, 0.51);
  EXPECT_TRUE(((half.array() == 0.0) || (half.array() == 1.0)).all());
  const Matrix again = sample_mask(400, 400, 0.5, 3);
  EXPECT_TRUE((half.array() == again.array()).all());
}

TEST(SignalSpec, ValidationAndMaterialize) {
  const Matrix left = sample_orthonormal_frame(6, 2, 21);
  const Matrix right = sample_orthonormal_frame(8, 2, 22);
  Vector thetas(2);
  thetas << 3.0, 1.0;
  const SignalSpec spec{thetas, left, right};
  EXPECT_NO_THROW(validate_signal(spec));
  const Matrix s = spec.materialize();
  EXPECT_NEAR(frobenius_norm_sq(s), 10.0, 1e-10);

  Vector ascending(2);
  ascending << 1.0, 3.0;
  EXPECT_THROW(validate_signal(SignalSpec{ascending, left, right}),
               std::invalid_argument);
  Matrix skewed = left;
  skewed(0, 0) += 0.5;
  EXPECT_THROW(validate_signal(SignalSpec{thetas, skewed, right}),
               std::invalid_argument);
}

TEST(Rng, DerivedSeedsDoNotCollide) {
  // xor-style derivations collide across (stream, index) pairs; ours must not
  std::vector<std::uint64_t> seen;
  for (std::uint64_t stream = 0; stream < 20; ++stream) {
    for (std::uint64_t index = 0; index < 20; ++index) {
      seen.push_back(rng::derive_seed(42, stream, index));
    }
  }
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
}

}  // namespace
