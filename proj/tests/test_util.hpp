#pragma once

#include <cmath>

#include "cesr/hermitian.hpp"
#include "cesr/random.hpp"

namespace cesr::test {

inline double rel_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline CMatrix random_complex(Index rows, Index cols, Rng& rng) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = cdouble(rng.normal(), rng.normal());
  return m;
}

/// A A^H + 0.2 I, normalized to a unit (1,1) entry.
inline ShapeMatrix random_shape(Index n, Rng& rng) {
  const CMatrix a = random_complex(n, n, rng);
  return ShapeMatrix::from_scatter(a * a.adjoint() + 0.2 * CMatrix::Identity(n, n));
}

}  // namespace cesr::test
