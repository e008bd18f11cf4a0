#pragma once

// Complex elliptically symmetric data under the Generalized Gaussian density
// generator h(t) ~ exp(-t^s / b), and the semiparametric Cramer-Rao bounds
// for location and shape.

#include <cmath>
#include <numbers>

#include "cesr/errors.hpp"
#include "cesr/hermitian.hpp"
#include "cesr/random.hpp"

namespace cesr {

/// Generalized Gaussian generator parameters: shape exponent s, scale b,
/// data dimension N.
struct GGParams {
  double s = 1.0;
  double b = 1.0;
  int n = 1;

  void validate() const {
    if (!(s > 0.0) || !(b > 0.0) || n < 1) {
      throw DomainError("GGParams: need s > 0, b > 0, N >= 1");
    }
  }
};

/// Observations stored column-wise: N rows, L columns.
struct Dataset {
  CMatrix z;

  Index dim() const { return z.rows(); }
  Index size() const { return z.cols(); }

  void validate() const {
    if (z.rows() < 1 || z.cols() < 1) throw DimensionMismatch("Dataset: empty");
    if (!z.allFinite()) throw DomainError("Dataset: non-finite observation");
  }
};

struct Scenario {
  int n = 0;
  CVector mu0;
  CMatrix sigma0;
  ShapeMatrix v10;
  GGParams gg;
  double sigma_x2 = 0.0;
};

/// E{Q psi(Q)^2} and E{Q^2 psi(Q)^2}.
struct FisherMoments {
  double e_q_psi2 = 0.0;
  double e_q2_psi2 = 0.0;
};

/// Scale b that makes E{Q} = N sigma_x2.
inline double gg_scale_b(double s, int n, double sigma_x2) {
  if (!(s > 0.0) || n < 1 || !(sigma_x2 > 0.0)) {
    throw DomainError("gg_scale_b: need s > 0, N >= 1, sigma_x2 > 0");
  }
  const double nd = n;
  return std::exp(s * (std::log(sigma_x2) + std::log(nd) + std::lgamma(nd / s) -
                       std::lgamma((nd + 1.0) / s)));
}

/// d ln h(t) / dt = -(s/b) t^{s-1}.
inline double gg_psi(double t, const GGParams& gg) {
  if (!(t > 0.0)) throw DomainError("gg_psi: t must be > 0");
  return -(gg.s / gg.b) * std::pow(t, gg.s - 1.0);
}

/// Density of the modular variate Q, s q^{N-1} exp(-q^s/b) / (b^{N/s} Gamma(N/s)).
inline double gg_q_pdf(double q, const GGParams& gg) {
  if (q <= 0.0) return 0.0;
  const double a = gg.n / gg.s;
  return std::exp(std::log(gg.s) + (gg.n - 1.0) * std::log(q) - std::pow(q, gg.s) / gg.b -
                  a * std::log(gg.b) - std::lgamma(a));
}

/// Both moments follow from Q^s / b ~ Gamma(N/s, 1).
inline FisherMoments gg_fisher_moments(const GGParams& gg) {
  gg.validate();
  const double s = gg.s;
  const double nd = gg.n;
  FisherMoments m;
  m.e_q_psi2 = s * s * std::pow(gg.b, -1.0 / s) *
               std::exp(std::lgamma((nd + 2.0 * s - 1.0) / s) - std::lgamma(nd / s));
  m.e_q2_psi2 = nd * (nd + s);
  return m;
}

/// Uniform draw on the complex unit sphere of C^N.
inline CVector sample_unit_sphere(int n, Rng& rng) {
  if (n < 1) throw DomainError("sample_unit_sphere: N must be >= 1");
  CVector u(n);
  for (int i = 0; i < n; ++i) u(i) = cdouble(rng.normal(), rng.normal());
  return u / u.norm();
}

/// Q = (b T)^{1/s} with T ~ Gamma(N/s, 1).
inline double sample_gg_q(const GGParams& gg, Rng& rng) {
  const double log_t = rng.log_gamma_variate(gg.n / gg.s);
  return std::exp((std::log(gg.b) + log_t) / gg.s);
}

/// z_l = mu0 + sqrt(Q_l) Sigma0^{1/2} u_l, with Q_l drawn by `draw_q`.
template <typename QSource>
Dataset sample_ces(Index l, const Scenario& sc, Rng& rng, QSource&& draw_q) {
  if (l < 1) throw DomainError("sample_ces: L must be >= 1");
  const CMatrix root = psd_sqrt(sc.sigma0);
  Dataset d;
  d.z.resize(sc.n, l);
  for (Index k = 0; k < l; ++k) {
    const double q = draw_q(rng);
    const CVector u = sample_unit_sphere(sc.n, rng);
    d.z.col(k) = sc.mu0 + std::sqrt(q) * (root * u);
  }
  return d;
}

inline Dataset sample_ces(Index l, const Scenario& sc, Rng& rng) {
  return sample_ces(l, sc, rng, [&sc](Rng& r) { return sample_gg_q(sc.gg, r); });
}

/// (N / E{Q psi^2}) blockdiag(V1, conj(V1)), size 2N x 2N.
inline CMatrix scrb_location(const ShapeMatrix& v1, const FisherMoments& m) {
  const Index n = v1.dim();
  CMatrix out = CMatrix::Zero(2 * n, 2 * n);
  const double factor = static_cast<double>(n) / m.e_q_psi2;
  out.topLeftCorner(n, n) = factor * v1.matrix();
  out.bottomRightCorner(n, n) = factor * v1.matrix().conjugate();
  return out;
}

/// (N(N+1) / E{Q^2 psi^2}) [L L^H]^{-1}, size (N^2-1) x (N^2-1).
inline CMatrix scrb_shape(const ShapeMatrix& v1, const FisherMoments& m) {
  const double nd = static_cast<double>(v1.dim());
  const CMatrix lmat = build_L(v1);
  const CMatrix gram = hermitian_part(lmat * lmat.adjoint());
  return (nd * (nd + 1.0) / m.e_q2_psi2) * inverse(gram);
}

/// Hermitian Toeplitz matrix with first column [1, rho, ..., rho^{N-1}].
inline CMatrix toeplitz_scatter(int n, cdouble rho) {
  CMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cdouble v = std::pow(rho, std::abs(i - j));
      out(i, j) = i >= j ? v : std::conj(v);
    }
  }
  return out;
}

/// Toeplitz scatter with rho = 0.8 e^{i 2 pi/5}, location [mu0]_n =
/// 0.5 e^{i pi (n-1)/7}, GG generator with E{Q}/N = sigma_x2.
inline Scenario make_scenario(int n, double s, double sigma_x2 = 4.0) {
  if (n < 1) throw DomainError("make_scenario: N must be >= 1");
  using std::numbers::pi;
  Scenario sc;
  sc.n = n;
  sc.sigma0 = toeplitz_scatter(n, std::polar(0.8, 2.0 * pi / 5.0));
  sc.mu0.resize(n);
  for (int k = 0; k < n; ++k) sc.mu0(k) = std::polar(0.5, pi * k / 7.0);
  sc.v10 = ShapeMatrix::from_scatter(sc.sigma0);
  sc.sigma_x2 = sigma_x2;
  sc.gg = GGParams{s, gg_scale_b(s, n, sigma_x2), n};
  return sc;
}

inline Scenario default_scenario(double s = 1.0) { return make_scenario(8, s, 4.0); }

}  // namespace cesr
