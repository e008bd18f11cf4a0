#pragma once

#include <cstdio>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "cesr/errors.hpp"
#include "cesr/special.hpp"

namespace cesr {

/// Complex van der Waerden score: the Gamma(N, 1) quantile.
inline double k_vdw(double u, int n) {
  if (n < 1) throw DomainError("k_vdw: N must be >= 1");
  return gamma_quantile(static_cast<double>(n), u);
}

/// Complex t_nu score, N(2N+nu) F^{-1}(u) / (nu + 2N F^{-1}(u)) with
/// F the Fisher law on (2N, nu) degrees of freedom.
inline double k_tnu(double u, int n, double nu) {
  if (n < 1) throw DomainError("k_tnu: N must be >= 1");
  if (!(nu > 0.0)) throw DomainError("k_tnu: nu must be > 0");
  const double f = f_quantile(2.0 * n, nu, u);
  return n * (2.0 * n + nu) * f / (nu + 2.0 * n * f);
}

struct VanDerWaerden {
  int n = 1;
};

struct StudentT {
  int n = 1;
  double nu = 5.0;
};

/// Score function K_h: (0,1) -> R+.
class ScoreFunction {
 public:
  static ScoreFunction van_der_waerden(int n) { return ScoreFunction(VanDerWaerden{n}); }
  static ScoreFunction t_nu(int n, double nu) { return ScoreFunction(StudentT{n, nu}); }

  double operator()(double u) const {
    return std::visit(
        [u](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, VanDerWaerden>) {
            return k_vdw(u, k.n);
          } else {
            return k_tnu(u, k.n, k.nu);
          }
        },
        kind_);
  }

  /// K(r / (L+1)) for r = 1..L, indexed by r - 1.
  std::vector<double> rank_scores(int sample_size) const {
    if (sample_size < 1) throw DomainError("rank_scores: L must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(sample_size));
    for (int r = 1; r <= sample_size; ++r) {
      out[static_cast<std::size_t>(r - 1)] = (*this)(static_cast<double>(r) / (sample_size + 1.0));
    }
    return out;
  }

  int dimension() const {
    return std::visit([](const auto& k) { return k.n; }, kind_);
  }

  std::string name() const {
    if (const auto* t = std::get_if<StudentT>(&kind_)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "t%g", t->nu);
      return buf;
    }
    return "vdW";
  }

  const std::variant<VanDerWaerden, StudentT>& kind() const { return kind_; }

 private:
  explicit ScoreFunction(std::variant<VanDerWaerden, StudentT> kind) : kind_(kind) {
    std::visit(
        [](const auto& k) {
          if (k.n < 1) throw DomainError("ScoreFunction: N must be >= 1");
        },
        kind_);
    if (const auto* t = std::get_if<StudentT>(&kind_); t && !(t->nu > 0.0)) {
      throw DomainError("ScoreFunction: nu must be > 0");
    }
  }

  std::variant<VanDerWaerden, StudentT> kind_;
};

}  // namespace cesr
