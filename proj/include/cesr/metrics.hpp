#pragma once

#include <span>
#include <utility>

#include "cesr/ces_model.hpp"
#include "cesr/estimators.hpp"
#include "cesr/hermitian.hpp"

namespace cesr {

/// Running first and second moments of complex error vectors, accumulated in
/// call order (so the reduction order is under the caller's control).
class ErrorMoments {
 public:
  explicit ErrorMoments(Index dim = 0) : sum_(CVector::Zero(dim)), outer_(CMatrix::Zero(dim, dim)) {}

  void add(const CVector& e) {
    if (e.size() != sum_.size()) throw DimensionMismatch("ErrorMoments: wrong error length");
    sum_ += e;
    outer_.noalias() += e * e.adjoint();
    ++count_;
  }

  Index count() const { return count_; }
  CVector mean() const { return count_ ? CVector(sum_ / static_cast<double>(count_)) : sum_; }
  CMatrix second_moment() const {
    return count_ ? CMatrix(outer_ / static_cast<double>(count_)) : outer_;
  }
  /// ||E{e}||_2
  double bias() const { return mean().norm(); }
  /// ||E{e e^H}||_F
  double mse() const { return second_moment().norm(); }

 private:
  CVector sum_;
  CMatrix outer_;
  Index count_ = 0;
};

/// (e^T, e^H)^T
inline CVector augmented(const CVector& e) {
  CVector a(2 * e.size());
  a.head(e.size()) = e;
  a.tail(e.size()) = e.conjugate();
  return a;
}

inline CVector location_error(const JointEstimate& est, const Scenario& truth) {
  return est.mu_hat - truth.mu0;
}

inline CVector shape_error(const JointEstimate& est, const Scenario& truth) {
  return ovec(est.v1_hat.matrix() - truth.v10.matrix());
}

/// (beta, phi): norms of the trial-averaged location and ovec-shape errors.
inline std::pair<double, double> bias_indices(std::span<const JointEstimate> estimates,
                                              const Scenario& truth) {
  if (estimates.empty()) throw DomainError("bias_indices: empty estimate list");
  CVector loc = CVector::Zero(truth.n);
  CVector shp = CVector::Zero(static_cast<Index>(truth.n) * truth.n - 1);
  for (const auto& e : estimates) {
    loc += location_error(e, truth);
    shp += shape_error(e, truth);
  }
  const double t = static_cast<double>(estimates.size());
  return {(loc / t).norm(), (shp / t).norm()};
}

/// (varrho, varsigma): Frobenius norms of the trial-averaged outer products
/// of augmented location errors and ovec-shape errors.
inline std::pair<double, double> mse_indices(std::span<const JointEstimate> estimates,
                                             const Scenario& truth) {
  if (estimates.empty()) throw DomainError("mse_indices: empty estimate list");
  ErrorMoments loc(2 * truth.n);
  ErrorMoments shp(static_cast<Index>(truth.n) * truth.n - 1);
  for (const auto& e : estimates) {
    loc.add(augmented(location_error(e, truth)));
    shp.add(shape_error(e, truth));
  }
  return {loc.mse(), shp.mse()};
}

/// (||SCRB(mu)||_F / L, ||SCRB(ovec V1)||_F / L).
inline std::pair<double, double> bound_indices(const Scenario& sc, Index l) {
  if (l < 1) throw DomainError("bound_indices: L must be >= 1");
  const FisherMoments m = gg_fisher_moments(sc.gg);
  const double ld = static_cast<double>(l);
  return {scrb_location(sc.v10, m).norm() / ld, scrb_shape(sc.v10, m).norm() / ld};
}

}  // namespace cesr
