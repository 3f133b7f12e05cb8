#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "mpf/linalg.hpp"

namespace mpf {

enum class BasisFamily { OrthogonalPolynomial };

std::string_view to_string(BasisFamily family) noexcept;
BasisFamily parse_basis_family(std::string_view name);

struct BasisSpec {
  BasisFamily family = BasisFamily::OrthogonalPolynomial;
  std::size_t degrees_of_freedom = 1;
  std::vector<double> aheads;  // strictly increasing, non-negative

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

/// Smooth basis evaluated at the ahead values. `h` is q x d with orthonormal
/// columns; column j is a polynomial of degree j in the ahead.
struct BasisMatrix {
  BasisSpec spec;
  Matrix h;

  std::size_t q() const noexcept { return h.rows(); }
  std::size_t d() const noexcept { return h.cols(); }
};

/// Discrete orthonormal polynomials on the ahead set.
///
/// Aheads are mapped affinely onto [-1, 1]. Column j+1 is built by
/// multiplying column j pointwise by the mapped aheads and orthogonalizing
/// against every earlier column (two passes of modified Gram-Schmidt), which
/// spans the same space as the monomials {1, a, ..., a^j} without forming the
/// ill-conditioned Vandermonde matrix. Each column is signed so its last
/// nonzero entry (largest ahead) is positive. Column j never depends on
/// columns after it, so the first d' columns of a d-column basis are
/// bit-identical to the d'-column basis.
///
/// Throws DegreesOfFreedomTooLarge when d > q, InvalidArgument when the
/// aheads are not strictly increasing and non-negative or d == 0.
BasisMatrix build_basis(const BasisSpec& spec);

}  // namespace mpf
