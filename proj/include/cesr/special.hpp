#pragma once

// Regularized incomplete gamma and beta functions and the quantile solvers
// built on them. Series / continued-fraction split follows the usual
// argument-regime rule; quantiles are found by Brent's method in log space,
// always on the smaller tail so extreme probabilities keep full precision.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "cesr/errors.hpp"

namespace cesr {

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTiny = 1e-300;
inline constexpr int kMaxSeriesTerms = 100000;

// P(a, x) by its power series, valid for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the Legendre continued fraction (modified Lentz), x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Continued fraction for I_x(a, b), modified Lentz.
inline double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxSeriesTerms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

// x^a (1-x)^b / (a B(a, b))
inline double beta_prefactor(double a, double b, double x) {
  return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                  b * std::log1p(-x)) /
         a;
}

/// Brent's method on an increasing function g with g(lo) <= 0 <= g(hi).
template <typename F>
double brent_increasing(F&& g, double lo, double hi, double glo, double ghi, double xtol,
                        int max_iter) {
  double a = lo, b = hi, fa = glo, fb = ghi;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = g(b);
  }
  return b;
}

/// Root of an increasing g on the real line (here: a log-coordinate),
/// bracketed by geometric expansion from `start`, optionally capped above.
template <typename F>
double solve_increasing(F&& g, double start, double upper_cap, int max_iter) {
  double lo = std::min(start, upper_cap);
  double glo = g(lo);
  double hi = lo;
  double ghi = glo;
  double step = 1.0;
  if (glo > 0.0) {
    for (int i = 0; glo > 0.0; ++i) {
      if (i > 2000) throw DomainError("quantile bracket search failed (lower)");
      hi = lo;
      ghi = glo;
      lo -= step;
      step *= 2.0;
      glo = g(lo);
    }
  } else {
    for (int i = 0; ghi < 0.0; ++i) {
      if (i > 2000) throw DomainError("quantile bracket search failed (upper)");
      lo = hi;
      glo = ghi;
      hi = std::min(hi + step, upper_cap);
      step *= 2.0;
      ghi = g(hi);
      if (hi == upper_cap && ghi < 0.0) throw DomainError("quantile above cap");
    }
  }
  return brent_increasing(g, lo, hi, glo, ghi, 1e-15, max_iter);
}

inline void require_probability(double u, const char* what) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError(std::string(what) + ": probability must lie in (0,1), got " +
                      std::to_string(u));
  }
}

}  // namespace detail

inline constexpr int kQuantileMaxIter = 200;

/// Regularized lower incomplete gamma P(a, x) paired with its complement
/// Q(a, x); whichever is computed directly keeps full relative precision.
inline std::pair<double, double> regularized_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || std::isnan(x)) {
    throw DomainError("regularized_gamma: need a > 0 and x >= 0");
  }
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  if (x < a + 1.0) {
    const double p = detail::gamma_p_series(a, x);
    return {p, 1.0 - p};
  }
  const double q = detail::gamma_q_fraction(a, x);
  return {1.0 - q, q};
}

inline double regularized_gamma_p(double a, double x) { return regularized_gamma(a, x).first; }
inline double regularized_gamma_q(double a, double x) { return regularized_gamma(a, x).second; }

/// Regularized incomplete beta I_x(a, b) and its complement 1 - I_x(a, b).
inline std::pair<double, double> regularized_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw DomainError("regularized_beta: need a, b > 0 and x in [0,1]");
  }
  if (x == 0.0) return {0.0, 1.0};
  if (x == 1.0) return {1.0, 0.0};
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = detail::beta_prefactor(a, b, x) * detail::beta_fraction(a, b, x);
    return {lower, 1.0 - lower};
  }
  const double upper = detail::beta_prefactor(b, a, 1.0 - x) * detail::beta_fraction(b, a, 1.0 - x);
  return {1.0 - upper, upper};
}

inline double gamma_cdf(double shape, double x) {
  return x <= 0.0 ? 0.0 : regularized_gamma_p(shape, x);
}

/// Fisher-Snedecor CDF with (d1, d2) degrees of freedom.
inline double f_cdf(double d1, double d2, double x) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw DomainError("f_cdf: degrees of freedom must be > 0");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  // I_{d1 x/(d1 x + d2)}(d1/2, d2/2), evaluated through y = d2/(d1 x + d2)
  // for the complement so neither branch subtracts from 1 needlessly.
  const double denom = d1 * x + d2;
  const double w = d1 * x / denom;
  if (w < 0.5) return regularized_beta(d1 / 2.0, d2 / 2.0, w).first;
  return 1.0 - regularized_beta(d2 / 2.0, d1 / 2.0, d2 / denom).first;
}

/// x with P(shape, x) = u.
inline double gamma_quantile(double shape, double u) {
  if (!(shape > 0.0)) throw DomainError("gamma_quantile: shape must be > 0");
  detail::require_probability(u, "gamma_quantile");
  const double start = std::log(shape);
  double t;
  if (u <= 0.5) {
    auto g = [&](double lx) { return regularized_gamma(shape, std::exp(lx)).first - u; };
    t = detail::solve_increasing(g, start, 800.0, kQuantileMaxIter);
  } else {
    const double tail = 1.0 - u;
    auto g = [&](double lx) { return tail - regularized_gamma(shape, std::exp(lx)).second; };
    t = detail::solve_increasing(g, start, 800.0, kQuantileMaxIter);
  }
  return std::exp(t);
}

/// x with FisherCDF_{d1,d2}(x) = u.
inline double f_quantile(double d1, double d2, double u) {
  if (!(d1 >= 1.0) || !(d2 > 0.0)) throw DomainError("f_quantile: need d1 >= 1 and d2 > 0");
  detail::require_probability(u, "f_quantile");
  const double a = d1 / 2.0;
  const double b = d2 / 2.0;
  // Solve for the beta variable on whichever side keeps precision, in log
  // coordinates, then map back: F = (d2/d1) x / (1 - x).
  if (u <= 0.5) {
    auto g = [&](double lx) { return regularized_beta(a, b, std::exp(lx)).first - u; };
    const double x = std::exp(detail::solve_increasing(g, std::log(0.5), 0.0, kQuantileMaxIter));
    return (d2 / d1) * x / (1.0 - x);
  }
  const double tail = 1.0 - u;
  // y = 1 - x satisfies I_y(b, a) = 1 - u.
  auto g = [&](double ly) { return regularized_beta(b, a, std::exp(ly)).first - tail; };
  const double y = std::exp(detail::solve_increasing(g, std::log(0.5), 0.0, kQuantileMaxIter));
  return (d2 / d1) * (1.0 - y) / y;
}

}  // namespace cesr
