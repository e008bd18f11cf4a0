#pragma once

// Dense complex linear algebra used by the estimators: Hermitian spectral
// functions, vec/ovec, the shape-constrained matrix type and the structured
// selector/projector matrices of the vectorized (O(N^4)) formulation.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>

#include "cesr/errors.hpp"

namespace cesr {

using cdouble = std::complex<double>;
using Index = Eigen::Index;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdClampTol = 1e-10;
inline constexpr double kSingularTol = 1e-14;

/// ||H - H^H||_F / max(1, ||H||_F).
inline double hermitian_defect(const CMatrix& h) {
  if (h.rows() != h.cols()) return INFINITY;
  return (h - h.adjoint()).norm() / std::max(1.0, h.norm());
}

inline bool all_finite(const CMatrix& a) { return a.allFinite(); }

inline void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch(std::string(what) + ": expected a square matrix, got " +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

inline void require_hermitian(const CMatrix& h, const char* what) {
  require_square(h, what);
  if (!all_finite(h)) throw DomainError(std::string(what) + ": non-finite entries");
  if (hermitian_defect(h) > kHermitianTol) {
    throw DomainError(std::string(what) + ": matrix is not Hermitian");
  }
}

/// (H + H^H)/2, which also zeroes the imaginary part of the diagonal.
inline CMatrix hermitian_part(const CMatrix& h) { return (h + h.adjoint()) * 0.5; }

/// Eigen-decomposition of a Hermitian matrix with the spectral functions the
/// estimators need. One decomposition serves H^{1/2}, H^{-1/2} and H^{-1}.
class HermitianSpectrum {
 public:
  explicit HermitianSpectrum(const CMatrix& h) {
    require_hermitian(h, "HermitianSpectrum");
    solver_.compute(hermitian_part(h));
    if (solver_.info() != Eigen::Success) {
      throw DomainError("HermitianSpectrum: eigen-decomposition failed");
    }
    const RVector& ev = solver_.eigenvalues();
    norm2_ = ev.size() == 0 ? 0.0 : std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }

  const RVector& eigenvalues() const { return solver_.eigenvalues(); }
  const CMatrix& eigenvectors() const { return solver_.eigenvectors(); }
  double min_eigenvalue() const { return eigenvalues()(0); }
  double spectral_norm() const { return norm2_; }

  /// Eigenvalues in [-1e-10 ||H||_2, 0) are clamped to zero.
  CMatrix sqrt() const {
    if (min_eigenvalue() < -kPsdClampTol * norm2_) {
      throw NotPositiveSemidefinite("smallest eigenvalue " + std::to_string(min_eigenvalue()));
    }
    RVector d = eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return apply(d);
  }

  CMatrix inverse() const {
    require_definite();
    return apply(eigenvalues().cwiseInverse());
  }

  CMatrix inverse_sqrt() const {
    require_definite();
    return apply(eigenvalues().cwiseSqrt().cwiseInverse());
  }

 private:
  void require_definite() const {
    if (!(min_eigenvalue() > kSingularTol * norm2_)) {
      throw SingularMatrix("smallest eigenvalue " + std::to_string(min_eigenvalue()) +
                           " vs norm " + std::to_string(norm2_));
    }
  }

  CMatrix apply(const RVector& d) const {
    const CMatrix& u = eigenvectors();
    CMatrix out = u * d.asDiagonal() * u.adjoint();
    return hermitian_part(out);
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> solver_;
  double norm2_ = 0.0;
};

inline CMatrix psd_sqrt(const CMatrix& h) { return HermitianSpectrum(h).sqrt(); }
inline CMatrix inverse(const CMatrix& h) { return HermitianSpectrum(h).inverse(); }
inline CMatrix inverse_sqrt(const CMatrix& h) { return HermitianSpectrum(h).inverse_sqrt(); }

/// Column stacking: top-to-bottom, left-to-right.
inline CVector vec(const CMatrix& a) {
  return Eigen::Map<const CVector>(a.data(), a.size());
}

/// vec(A) without its first element.
inline CVector ovec(const CMatrix& a) {
  require_square(a, "ovec");
  if (a.size() == 0) throw DimensionMismatch("ovec: empty matrix");
  return vec(a).tail(a.size() - 1);
}

inline CMatrix unvec(const CVector& v, Index n) {
  if (n < 1 || v.size() != n * n) {
    throw DimensionMismatch("unvec: vector of length " + std::to_string(v.size()) +
                            " cannot form a " + std::to_string(n) + "x" + std::to_string(n) +
                            " matrix");
  }
  return Eigen::Map<const CMatrix>(v.data(), n, n);
}

/// Kronecker product A (x) B.
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename Eigen::ScalarBinaryOpTraits<typename DerivedA::Scalar,
                                                      typename DerivedB::Scalar>::ReturnType;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                            a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Hermitian positive definite matrix whose (1,1) entry is exactly 1.
class ShapeMatrix {
 public:
  ShapeMatrix() : m_(CMatrix::Identity(1, 1)) {}

  static ShapeMatrix identity(Index n) { return ShapeMatrix(CMatrix::Identity(n, n)); }

  /// Wraps a matrix that is already normalized; (1,1) must equal 1 within
  /// 1e-12 and is then pinned to exactly 1.
  static ShapeMatrix from_normalized(const CMatrix& v) {
    require_hermitian(v, "ShapeMatrix");
    if (v.size() == 0) throw DimensionMismatch("ShapeMatrix: empty matrix");
    if (std::abs(v(0, 0) - cdouble(1.0, 0.0)) > kHermitianTol) {
      throw DomainError("ShapeMatrix: (1,1) entry is not 1");
    }
    return ShapeMatrix(v);
  }

  /// Scatter / [scatter]_{1,1}.
  static ShapeMatrix from_scatter(const CMatrix& scatter) {
    require_hermitian(scatter, "ShapeMatrix::from_scatter");
    if (scatter.size() == 0) throw DimensionMismatch("ShapeMatrix: empty matrix");
    const double s11 = scatter(0, 0).real();
    if (!(s11 > 0.0)) throw DegenerateData("ShapeMatrix::from_scatter: [S]_{1,1} <= 0");
    return ShapeMatrix(scatter / s11);
  }

  const CMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

 private:
  explicit ShapeMatrix(const CMatrix& v) : m_(hermitian_part(v)) {
    m_(0, 0) = cdouble(1.0, 0.0);
    Eigen::LLT<CMatrix> llt(m_);
    if (llt.info() != Eigen::Success || !m_.allFinite()) {
      throw NotPositiveDefinite("ShapeMatrix: matrix is not positive definite");
    }
  }

  CMatrix m_;
};

inline bool is_positive_definite(const CMatrix& h) {
  if (h.rows() != h.cols() || !h.allFinite()) return false;
  Eigen::LLT<CMatrix> llt(hermitian_part(h));
  return llt.info() == Eigen::Success;
}

/// Selection matrix P (drops the first coordinate of vec) and the projector
/// onto the orthogonal complement of vec(I_N).
struct StructuredSelector {
  Index n = 0;
  RMatrix p;
  RMatrix projector;
};

inline StructuredSelector build_selector(Index n) {
  if (n < 1) throw DomainError("build_selector: N must be >= 1");
  const Index n2 = n * n;
  StructuredSelector sel;
  sel.n = n;
  sel.p = RMatrix::Zero(n2 - 1, n2);
  for (Index i = 0; i < n2 - 1; ++i) sel.p(i, i + 1) = 1.0;
  RVector vec_i = RVector::Zero(n2);
  for (Index k = 0; k < n; ++k) vec_i(k * n + k) = 1.0;
  sel.projector = RMatrix::Identity(n2, n2) - (vec_i * vec_i.transpose()) / static_cast<double>(n);
  return sel;
}

/// P (V^{-T/2} (x) V^{-1/2}) Pi_perp, the (N^2-1) x N^2 matrix of the
/// vectorized formulation. Reference path only.
inline CMatrix build_L(const ShapeMatrix& v1, const StructuredSelector& sel) {
  const Index n = v1.dim();
  if (sel.n != n) throw DimensionMismatch("build_L: selector built for another dimension");
  const CMatrix inv_half = inverse_sqrt(v1.matrix());
  const CMatrix middle = kron(CMatrix(inv_half.transpose()), inv_half);
  return sel.p.cast<cdouble>() * middle * sel.projector.cast<cdouble>();
}

inline CMatrix build_L(const ShapeMatrix& v1) { return build_L(v1, build_selector(v1.dim())); }

}  // namespace cesr
