#include <gtest/gtest.h>

#include "cesr/hermitian.hpp"
#include "test_util.hpp"

using namespace cesr;
using cesr::test::random_complex;
using cesr::test::random_shape;
using cesr::test::rel_diff;

TEST(Vec, StacksColumns) {
  CMatrix a(2, 2);
  a << cdouble(1, 0), cdouble(3, 0), cdouble(2, 0), cdouble(4, 0);
  const CVector v = vec(a);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(v(k), cdouble(k + 1, 0));
  const CVector o = ovec(a);
  ASSERT_EQ(o.size(), 3);
  EXPECT_EQ(o(0), cdouble(2, 0));
  EXPECT_EQ(unvec(v, 2), a);
}

TEST(Vec, RejectsBadShapes) {
  EXPECT_THROW(ovec(CMatrix(2, 3)), DimensionMismatch);
  EXPECT_THROW(unvec(CVector(5), 2), DimensionMismatch);
}

TEST(Kron, MatchesEntrywiseDefinition) {
  Rng rng(3);
  const CMatrix a = random_complex(2, 3, rng);
  const CMatrix b = random_complex(3, 2, rng);
  const CMatrix k = kron(a, b);
  ASSERT_EQ(k.rows(), 6);
  ASSERT_EQ(k.cols(), 6);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index p = 0; p < 3; ++p)
        for (Index q = 0; q < 2; ++q) EXPECT_EQ(k(i * 3 + p, j * 2 + q), a(i, j) * b(p, q));
}

TEST(Kron, VecOfTripleProduct) {
  Rng rng(5);
  const CMatrix a = random_complex(3, 3, rng);
  const CMatrix x = random_complex(3, 3, rng);
  const CMatrix b = random_complex(3, 3, rng);
  const CVector lhs = vec(a * x * b);
  const CVector rhs = kron(CMatrix(b.transpose()), a) * vec(x);
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * lhs.norm());
}

TEST(HermitianSpectrum, SquareRootAndInverses) {
  Rng rng(7);
  for (Index n : {1, 2, 4, 7}) {
    const CMatrix a = random_complex(n, n, rng);
    const CMatrix h = a * a.adjoint() + CMatrix::Identity(n, n);
    const CMatrix root = psd_sqrt(h);
    EXPECT_LT(rel_diff(root * root, h), 1e-12);
    EXPECT_LT(hermitian_defect(root), 1e-14);
    EXPECT_LT(rel_diff(inverse(h) * h, CMatrix::Identity(n, n)), 1e-12);
    const CMatrix is = inverse_sqrt(h);
    EXPECT_LT(rel_diff(is * h * is, CMatrix::Identity(n, n)), 1e-12);
  }
}

TEST(HermitianSpectrum, ClampsTinyNegativeEigenvalues) {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = -1e-13;
  const CMatrix root = psd_sqrt(h);
  EXPECT_NEAR(root(1, 1).real(), 0.0, 1e-15);
  EXPECT_NEAR(root(0, 0).real(), 1.0, 1e-15);
}

TEST(HermitianSpectrum, Errors) {
  CMatrix h = CMatrix::Identity(2, 2);
  h(1, 1) = -0.5;
  EXPECT_THROW(psd_sqrt(h), NotPositiveSemidefinite);
  CMatrix s = CMatrix::Identity(2, 2);
  s(1, 1) = 0.0;
  EXPECT_THROW(inverse(s), SingularMatrix);
  EXPECT_THROW(inverse_sqrt(s), SingularMatrix);
  CMatrix nh = CMatrix::Identity(2, 2);
  nh(0, 1) = cdouble(1, 0);
  EXPECT_THROW(psd_sqrt(nh), DomainError);
  EXPECT_THROW(psd_sqrt(CMatrix(2, 3)), DimensionMismatch);
}

TEST(ShapeMatrix, NormalizesScatter) {
  CMatrix s(2, 2);
  s << cdouble(4, 0), cdouble(1, 1), cdouble(1, -1), cdouble(3, 0);
  const ShapeMatrix v = ShapeMatrix::from_scatter(s);
  EXPECT_EQ(v.matrix()(0, 0), cdouble(1, 0));
  EXPECT_LT(rel_diff(v.matrix(), s / 4.0), 1e-15);
  EXPECT_EQ(v.dim(), 2);
}

TEST(ShapeMatrix, Rejections) {
  CMatrix s = CMatrix::Identity(2, 2);
  s(0, 0) = 0.0;
  EXPECT_THROW(ShapeMatrix::from_scatter(s), DegenerateData);
  CMatrix indefinite(2, 2);
  indefinite << cdouble(1, 0), cdouble(2, 0), cdouble(2, 0), cdouble(1, 0);
  EXPECT_THROW(ShapeMatrix::from_normalized(indefinite), NotPositiveDefinite);
  EXPECT_THROW(ShapeMatrix::from_normalized(2.0 * CMatrix::Identity(2, 2)), DomainError);
}

TEST(Selector, DropsFirstCoordinateAndProjects) {
  Rng rng(11);
  const Index n = 3;
  const StructuredSelector sel = build_selector(n);
  const CMatrix a = random_complex(n, n, rng);
  EXPECT_LT((sel.p.cast<cdouble>() * vec(a) - ovec(a)).norm(), 1e-15);
  const CMatrix eye = CMatrix::Identity(n, n);
  EXPECT_LT((sel.projector.cast<cdouble>() * vec(eye)).norm(), 1e-15);
  // traceless matrices are left alone
  CMatrix t = a;
  t -= (a.trace() / static_cast<double>(n)) * eye;
  EXPECT_LT((sel.projector.cast<cdouble>() * vec(t) - vec(t)).norm(), 1e-14);
}

TEST(BuildL, Dimensions) {
  Rng rng(13);
  const ShapeMatrix v = random_shape(4, rng);
  const CMatrix l = build_L(v);
  EXPECT_EQ(l.rows(), 15);
  EXPECT_EQ(l.cols(), 16);
  const CMatrix g = l * l.adjoint();
  EXPECT_EQ(g.rows(), 15);
  EXPECT_TRUE(is_positive_definite(hermitian_part(g)));
}

TEST(BuildL, GramInverseIdentity) {
  Rng rng(17);
  for (Index n : {2, 3, 4}) {
    for (int rep = 0; rep < 5; ++rep) {
      const ShapeMatrix v = random_shape(n, rng);
      const CMatrix l = build_L(v);
      const RMatrix p = build_selector(n).p;
      const CMatrix lhs = p.transpose().cast<cdouble>() * inverse(hermitian_part(l * l.adjoint())) *
                          p.cast<cdouble>();
      CMatrix m = CMatrix::Identity(n * n, n * n);
      m.col(0) -= vec(v.matrix());
      const CMatrix rhs = m * kron(CMatrix(v.matrix().transpose()), v.matrix()) * m.adjoint();
      EXPECT_LT(rel_diff(lhs, rhs), 1e-8) << "N=" << n;
    }
  }
}
