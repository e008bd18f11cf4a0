#pragma once

// Location/shape estimators for CES data: the sample baseline, Tyler's joint
// M-estimator, and the rank-based one-step R-estimator of shape in its
// N x N matrix form together with the vectorized (N^2 x N^2) reference form.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cesr/ces_model.hpp"
#include "cesr/errors.hpp"
#include "cesr/hermitian.hpp"
#include "cesr/random.hpp"
#include "cesr/score.hpp"

namespace cesr {

inline constexpr double kDegenerateQ = 1e-30;

struct JointEstimate {
  CVector mu_hat;
  ShapeMatrix v1_hat;
  int iterations = 0;
  bool converged = true;
};

/// Quadratic forms q_l and whitened unit directions u_l (columns of u).
struct Residuals {
  RVector q;
  CMatrix u;
};

/// 1-based ranks; always a permutation of 1..L.
struct RankVector {
  std::vector<int> r;
};

/// Hermitian perturbation with a zero (1,1) entry.
struct PerturbationMatrix {
  CMatrix h;
  double scale = 0.0;  // ||h||_F

  static PerturbationMatrix from_matrix(const CMatrix& h) {
    require_hermitian(h, "PerturbationMatrix");
    if (std::abs(h(0, 0)) > kHermitianTol) {
      throw DomainError("PerturbationMatrix: (1,1) entry must be 0");
    }
    PerturbationMatrix p;
    p.h = hermitian_part(h);
    p.h(0, 0) = 0.0;
    p.scale = p.h.norm();
    return p;
  }
};

struct RankStatistic {
  CMatrix r;  // (1/sqrt L) sum K u u^H
  double zeta = 0.0;
};

struct REstimateDiagnostics {
  double alpha_hat = 0.0;
  CMatrix w;
  double zeta = 0.0;
  CMatrix r_matrix;
  CVector z_vec;  // central sequence at the preliminary shape
};

/// One-step update result. When the update leaves the positive definite cone
/// `positive_definite` is false and `v1` holds the raw update.
struct REstimate {
  CMatrix v1;
  bool positive_definite = false;
  REstimateDiagnostics diagnostics;

  ShapeMatrix shape() const {
    if (!positive_definite) throw NotPositiveDefinite("one-step update left the PD cone");
    return ShapeMatrix::from_normalized(v1);
  }
};

struct TylerOptions {
  double tol = 1e-8;
  int max_iter = 1000;
};

/// K(r/(L+1)) for r = 1..L.
using ScoreTable = std::vector<double>;

inline CVector sample_mean(const Dataset& d) {
  d.validate();
  return d.z.rowwise().mean();
}

/// Sample mean with the (1,1)-normalized sample covariance.
inline JointEstimate scm_shape(const Dataset& d) {
  d.validate();
  if (d.size() < 2) throw DegenerateData("scm_shape: need at least 2 observations");
  JointEstimate est;
  est.mu_hat = sample_mean(d);
  const CMatrix x = d.z.colwise() - est.mu_hat;
  const CMatrix scatter = hermitian_part(x * x.adjoint()) / static_cast<double>(d.size());
  if (scatter(0, 0).real() <= 1e-14) {
    throw DegenerateData("scm_shape: [Sigma_SCM]_{1,1} vanishes");
  }
  est.v1_hat = ShapeMatrix::from_scatter(scatter);
  return est;
}

/// Tyler's joint fixed point, started from (sample mean, I). Both updates of
/// a pass use the quadratic forms of the previous iterate.
inline JointEstimate tyler_joint(const Dataset& d, const TylerOptions& opt = {}) {
  d.validate();
  const Index n = d.dim();
  const Index l = d.size();
  if (l <= n) throw DomainError("tyler_joint: need L > N");
  if (!(opt.tol > 0.0) || opt.max_iter < 1) throw DomainError("tyler_joint: bad options");

  CVector mu = d.z.rowwise().mean();
  CMatrix v = CMatrix::Identity(n, n);
  // Scale-equivariant reference length for the location stopping rule.
  const double spread = std::sqrt((d.z.colwise() - mu).squaredNorm() / static_cast<double>(l));
  if (!(spread > 0.0)) throw DegenerateSample("tyler_joint: all observations coincide");

  JointEstimate est;
  est.converged = false;
  for (int k = 1; k <= opt.max_iter; ++k) {
    Eigen::LLT<CMatrix> llt(v);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("tyler_joint: iterate lost PD");
    const CMatrix x = d.z.colwise() - mu;
    const CMatrix y = llt.matrixL().solve(x);
    const RVector q = y.colwise().squaredNorm().transpose();
    if (q.minCoeff() < kDegenerateQ) {
      throw DegenerateSample("tyler_joint: an observation coincides with the location iterate");
    }
    const RVector w = q.cwiseSqrt().cwiseInverse();
    const CVector mu_next = (d.z * w.cast<cdouble>()) / w.sum();
    CMatrix v_next = x * q.cwiseInverse().cast<cdouble>().asDiagonal() * x.adjoint();
    v_next *= static_cast<double>(n) / static_cast<double>(l);
    v_next = hermitian_part(v_next);
    v_next /= v_next(0, 0).real();
    v_next(0, 0) = 1.0;

    const double dmu = (mu_next - mu).norm() / (mu_next.norm() + spread);
    const double dv = (v_next - v).norm() / v.norm();
    mu = mu_next;
    v = v_next;
    est.iterations = k;
    if (std::max(dmu, dv) < opt.tol) {
      est.converged = true;
      break;
    }
  }
  est.mu_hat = mu;
  est.v1_hat = ShapeMatrix::from_normalized(v);
  return est;
}

/// Residuals given a precomputed V^{-1/2}.
inline Residuals residuals(const Dataset& d, const CVector& mu, const CMatrix& inv_sqrt_v) {
  if (mu.size() != d.dim() || inv_sqrt_v.rows() != d.dim()) {
    throw DimensionMismatch("residuals: dimension of location/shape differs from data");
  }
  Residuals res;
  res.u = inv_sqrt_v * (d.z.colwise() - mu);
  res.q = res.u.colwise().squaredNorm().transpose();
  if (res.q.size() > 0 && res.q.minCoeff() < kDegenerateQ) {
    throw DegenerateSample("residuals: vanishing quadratic form");
  }
  res.u *= res.q.cwiseSqrt().cwiseInverse().cast<cdouble>().asDiagonal();
  return res;
}

/// q_l = (z_l - mu)^H V^{-1} (z_l - mu), u_l = q_l^{-1/2} V^{-1/2} (z_l - mu).
inline Residuals residuals(const Dataset& d, const CVector& mu, const ShapeMatrix& v1) {
  return residuals(d, mu, inverse_sqrt(v1.matrix()));
}

/// Ascending ranks, ties broken by original position.
inline RankVector ranks(std::span<const double> values) {
  const std::size_t l = values.size();
  std::vector<std::size_t> order(l);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  RankVector rk;
  rk.r.resize(l);
  for (std::size_t pos = 0; pos < l; ++pos) rk.r[order[pos]] = static_cast<int>(pos + 1);
  return rk;
}

inline RankVector ranks(const RVector& values) {
  return ranks(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

inline RankStatistic r_stat_and_zeta(const Residuals& res, const RankVector& rk,
                                     std::span<const double> scores) {
  const Index l = res.u.cols();
  const Index n = res.u.rows();
  if (static_cast<Index>(rk.r.size()) != l || static_cast<Index>(scores.size()) != l) {
    throw DimensionMismatch("r_stat_and_zeta: inconsistent lengths");
  }
  RVector k(l);
  for (Index i = 0; i < l; ++i) k(i) = scores[static_cast<std::size_t>(rk.r[i] - 1)];
  const double root_l = std::sqrt(static_cast<double>(l));
  RankStatistic st;
  st.r = hermitian_part(res.u * k.cast<cdouble>().asDiagonal() * res.u.adjoint()) / root_l;
  st.zeta = k.sum() / (static_cast<double>(n) * root_l);
  return st;
}

inline RankStatistic r_stat_and_zeta(const Residuals& res, const RankVector& rk,
                                     const ScoreFunction& score) {
  const ScoreTable table = score.rank_scores(static_cast<int>(res.u.cols()));
  return r_stat_and_zeta(res, rk, table);
}

namespace detail {

/// Spectral factors of a shape matrix shared by the matrix-form path.
struct ShapeFactors {
  CMatrix sqrt;
  CMatrix inv_sqrt;
  CMatrix inv;

  explicit ShapeFactors(const CMatrix& v) {
    const HermitianSpectrum spec(v);
    sqrt = spec.sqrt();
    inv_sqrt = spec.inverse_sqrt();
    inv = spec.inverse();
  }
};

inline CVector central_seq_from(const RankStatistic& st, const ShapeFactors& f) {
  return ovec(f.inv_sqrt * st.r * f.inv_sqrt - st.zeta * f.inv);
}

/// Everything the matrix-form path computes at one shape value.
struct RankState {
  Residuals res;
  RankVector rk;
  RankStatistic stat;
  CVector z;
};

inline RankState rank_state(const Dataset& d, const CVector& mu, const ShapeFactors& f,
                            std::span<const double> scores) {
  RankState s;
  s.res = residuals(d, mu, f.inv_sqrt);
  s.rk = ranks(s.res.q);
  s.stat = r_stat_and_zeta(s.res, s.rk, scores);
  s.z = central_seq_from(s.stat, f);
  return s;
}

inline CVector perturbation_response(const ShapeFactors& f, const CMatrix& h) {
  const double n = static_cast<double>(h.rows());
  const cdouble tr = (f.inv * h).trace();
  return ovec(f.inv * h * f.inv - (tr / n) * f.inv);
}

inline ShapeMatrix perturbed_shape(const ShapeMatrix& v1, const PerturbationMatrix& h0,
                                   Index l) {
  return ShapeMatrix::from_normalized(v1.matrix() +
                                      h0.h / std::sqrt(static_cast<double>(l)));
}

inline void require_same_dim(const Dataset& d, const ShapeMatrix& v1, const char* what) {
  if (v1.dim() != d.dim()) throw DimensionMismatch(std::string(what) + ": shape/data mismatch");
}

}  // namespace detail

/// ovec(V^{-1/2} R V^{-1/2} - zeta V^{-1}), the L-free central sequence.
inline CVector central_seq(const Residuals& res, const RankVector& rk, const ScoreFunction& score,
                           const ShapeMatrix& v1) {
  if (v1.dim() != res.u.rows()) throw DimensionMismatch("central_seq: shape/residual mismatch");
  const RankStatistic st = r_stat_and_zeta(res, rk, score);
  return detail::central_seq_from(st, detail::ShapeFactors(v1.matrix()));
}

/// Random Hermitian H0 with [H0]_{1,1} = 0 and ||H0||_F = 0.01 ||V1||_F,
/// halved until V1 + H0/sqrt(L) is positive definite.
inline PerturbationMatrix gen_perturbation(Index n, const ShapeMatrix& v1, Index l, Rng& rng) {
  if (v1.dim() != n) throw DimensionMismatch("gen_perturbation: N differs from shape");
  if (l < 1) throw DomainError("gen_perturbation: L must be >= 1");
  CMatrix h = CMatrix::Zero(n, n);
  constexpr double kHalf = 0.70710678118654752440;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      h(i, j) = cdouble(rng.normal() * kHalf, rng.normal() * kHalf);
      h(j, i) = std::conj(h(i, j));
    }
    h(j, j) = rng.normal();
  }
  h(0, 0) = 0.0;
  const double hn = h.norm();
  if (!(hn > 0.0)) throw PerturbationFailure("gen_perturbation: degenerate draw");
  h *= 0.01 * v1.matrix().norm() / hn;
  const double root_l = std::sqrt(static_cast<double>(l));
  for (int halvings = 0; halvings <= 50; ++halvings) {
    if (is_positive_definite(v1.matrix() + h / root_l)) return PerturbationMatrix::from_matrix(h);
    h *= 0.5;
  }
  throw PerturbationFailure("gen_perturbation: no PD perturbation after 50 halvings");
}

inline double alpha_hat(const Dataset& d, const CVector& mu, const ShapeMatrix& v1,
                        std::span<const double> scores, const PerturbationMatrix& h0) {
  detail::require_same_dim(d, v1, "alpha_hat");
  const detail::ShapeFactors f(v1.matrix());
  const CVector r0 = detail::perturbation_response(f, h0.h);
  const double den = r0.norm();
  if (den < 1e-30) throw ZeroDenominator("alpha_hat: perturbation response vanishes");
  const CVector z = detail::rank_state(d, mu, f, scores).z;
  const detail::ShapeFactors fp(detail::perturbed_shape(v1, h0, d.size()).matrix());
  const CVector zp = detail::rank_state(d, mu, fp, scores).z;
  return (zp - z).norm() / den;
}

/// ||z(V1 + L^{-1/2} H0) - z(V1)|| / ||ovec(V1^{-1} H0 V1^{-1} - N^{-1} tr(V1^{-1} H0) V1^{-1})||.
inline double alpha_hat(const Dataset& d, const CVector& mu, const ShapeMatrix& v1,
                        const ScoreFunction& score, const PerturbationMatrix& h0) {
  return alpha_hat(d, mu, v1, score.rank_scores(static_cast<int>(d.size())), h0);
}

/// Matrix-form one-step R-estimator with a fixed perturbation.
inline REstimate r_estimator(const Dataset& d, const JointEstimate& prelim,
                             std::span<const double> scores, const PerturbationMatrix& h0) {
  d.validate();
  detail::require_same_dim(d, prelim.v1_hat, "r_estimator");
  const Index l = d.size();
  if (l <= d.dim()) throw DomainError("r_estimator: need L > N");
  const CMatrix& v = prelim.v1_hat.matrix();

  const detail::ShapeFactors f(v);
  const detail::RankState st = detail::rank_state(d, prelim.mu_hat, f, scores);

  REstimate out;
  auto& diag = out.diagnostics;
  diag.r_matrix = st.stat.r;
  diag.zeta = st.stat.zeta;
  diag.z_vec = st.z;
  diag.w = hermitian_part(f.sqrt * st.stat.r * f.sqrt) / std::sqrt(static_cast<double>(l));

  const CVector r0 = detail::perturbation_response(f, h0.h);
  const double den = r0.norm();
  if (den < 1e-30) throw ZeroDenominator("r_estimator: perturbation response vanishes");
  const detail::ShapeFactors fp(detail::perturbed_shape(prelim.v1_hat, h0, l).matrix());
  const CVector zp = detail::rank_state(d, prelim.mu_hat, fp, scores).z;
  diag.alpha_hat = (zp - st.z).norm() / den;
  if (!(diag.alpha_hat > 0.0)) throw ZeroDenominator("r_estimator: alpha_hat is zero");

  const CMatrix direction = diag.w - diag.w(0, 0) * v;
  out.v1 = hermitian_part(v + direction / diag.alpha_hat);
  out.v1(0, 0) = 1.0;
  out.positive_definite = is_positive_definite(out.v1);
  return out;
}

inline REstimate r_estimator(const Dataset& d, const JointEstimate& prelim,
                             const ScoreFunction& score, const PerturbationMatrix& h0) {
  return r_estimator(d, prelim, score.rank_scores(static_cast<int>(d.size())), h0);
}

/// Draws a fresh perturbation from `rng`, then applies the one-step update.
inline REstimate r_estimator(const Dataset& d, const JointEstimate& prelim,
                             std::span<const double> scores, Rng& rng) {
  const PerturbationMatrix h0 = gen_perturbation(d.dim(), prelim.v1_hat, d.size(), rng);
  return r_estimator(d, prelim, scores, h0);
}

inline REstimate r_estimator(const Dataset& d, const JointEstimate& prelim,
                             const ScoreFunction& score, Rng& rng) {
  return r_estimator(d, prelim, score.rank_scores(static_cast<int>(d.size())), rng);
}

namespace detail {

/// sum_l K(r_l/(L+1)) vec(u_l u_l^H), length N^2.
inline CVector weighted_outer_sum(const Residuals& res, const RankVector& rk,
                                  std::span<const double> scores) {
  const Index n = res.u.rows();
  CVector acc = CVector::Zero(n * n);
  for (Index i = 0; i < res.u.cols(); ++i) {
    const double k = scores[static_cast<std::size_t>(rk.r[i] - 1)];
    const CVector u = res.u.col(i);
    acc += k * kron(CVector(u.conjugate()), u);
  }
  return acc;
}

}  // namespace detail

/// Vectorized one-step R-estimator built on the explicit P, Pi_perp and L
/// matrices: ovec(V_R) = ovec(V*) + (1/(L alpha)) [L L^H]^{-1} L sum K vec(u u^H).
/// diagnostics carries alpha_hat and the central sequence only.
inline REstimate r_estimator_vectorized(const Dataset& d, const JointEstimate& prelim,
                                        std::span<const double> scores,
                                        const PerturbationMatrix& h0) {
  d.validate();
  detail::require_same_dim(d, prelim.v1_hat, "r_estimator_vectorized");
  const Index n = d.dim();
  const Index l = d.size();
  if (l <= n) throw DomainError("r_estimator_vectorized: need L > N");
  const double root_l = std::sqrt(static_cast<double>(l));
  const StructuredSelector sel = build_selector(n);

  auto delta = [&](const ShapeMatrix& shape, CMatrix* lmat_out, CVector* sum_out) {
    const CMatrix lmat = build_L(shape, sel);
    const Residuals res = residuals(d, prelim.mu_hat, shape);
    const RankVector rk = ranks(res.q);
    const CVector sum = detail::weighted_outer_sum(res, rk, scores);
    if (lmat_out) *lmat_out = lmat;
    if (sum_out) *sum_out = sum;
    return CVector(lmat * sum / root_l);
  };

  CMatrix lmat;
  CVector sum;
  const CVector delta0 = delta(prelim.v1_hat, &lmat, &sum);
  const CVector delta1 = delta(detail::perturbed_shape(prelim.v1_hat, h0, l), nullptr, nullptr);

  const CMatrix gram = hermitian_part(lmat * lmat.adjoint());
  const double den = (gram * ovec(h0.h)).norm();
  if (den < 1e-30) throw ZeroDenominator("r_estimator_vectorized: perturbation response vanishes");

  REstimate out;
  out.diagnostics.alpha_hat = (delta1 - delta0).norm() / den;
  out.diagnostics.z_vec = delta0;
  if (!(out.diagnostics.alpha_hat > 0.0)) {
    throw ZeroDenominator("r_estimator_vectorized: alpha_hat is zero");
  }

  const CVector step = inverse(gram) * (lmat * sum);
  CVector full(n * n);
  full(0) = 1.0;
  full.tail(n * n - 1) =
      ovec(prelim.v1_hat.matrix()) + step / (static_cast<double>(l) * out.diagnostics.alpha_hat);
  out.v1 = unvec(full, n);
  out.positive_definite = is_positive_definite(out.v1);
  return out;
}

inline REstimate r_estimator_vectorized(const Dataset& d, const JointEstimate& prelim,
                                        const ScoreFunction& score,
                                        const PerturbationMatrix& h0) {
  return r_estimator_vectorized(d, prelim, score.rank_scores(static_cast<int>(d.size())), h0);
}

}  // namespace cesr
