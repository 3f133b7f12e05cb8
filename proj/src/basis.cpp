#include "mpf/basis.hpp"

#include <cmath>
#include <string>

namespace mpf {

std::string_view to_string(BasisFamily family) noexcept {
  switch (family) {
    case BasisFamily::OrthogonalPolynomial: return "orthogonal-polynomial";
  }
  return "unknown";
}

BasisFamily parse_basis_family(std::string_view name) {
  if (name == "orthogonal-polynomial") return BasisFamily::OrthogonalPolynomial;
  throw Error(ErrorCode::SchemaError,
              "unknown basis family '" + std::string(name) + "'");
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void validate(const BasisSpec& spec) {
  const auto& a = spec.aheads;
  if (a.empty()) throw Error(ErrorCode::InvalidArgument, "no ahead values");
  if (spec.degrees_of_freedom == 0) {
    throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be >= 1");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || a[i] < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "aheads must be non-negative");
    }
    if (i > 0 && !(a[i] > a[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "aheads must be strictly increasing");
    }
  }
  if (spec.degrees_of_freedom > a.size()) {
    throw Error(ErrorCode::DegreesOfFreedomTooLarge,
                "d = " + std::to_string(spec.degrees_of_freedom) +
                    " exceeds q = " + std::to_string(a.size()));
  }
}

}  // namespace

BasisMatrix build_basis(const BasisSpec& spec) {
  validate(spec);
  const std::size_t q = spec.aheads.size();
  const std::size_t d = spec.degrees_of_freedom;

  const double lo = spec.aheads.front();
  const double hi = spec.aheads.back();
  std::vector<double> x(q, 0.0);
  if (q > 1) {
    for (std::size_t i = 0; i < q; ++i) {
      x[i] = (2.0 * spec.aheads[i] - lo - hi) / (hi - lo);
    }
  }

  std::vector<std::vector<double>> cols;
  cols.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> v(q, 1.0);
    if (j > 0) {
      for (std::size_t i = 0; i < q; ++i) v[i] = x[i] * cols[j - 1][i];
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& prev : cols) {
        const double c = dot(prev, v);
        for (std::size_t i = 0; i < q; ++i) v[i] -= c * prev[i];
      }
    }
    const double norm = std::sqrt(dot(v, v));
    if (!(norm > 1e-8)) {
      throw Error(ErrorCode::RankDeficient,
                  "polynomial basis lost rank at column " + std::to_string(j));
    }
    for (double& e : v) e /= norm;
    for (std::size_t i = q; i-- > 0;) {
      if (std::abs(v[i]) > 1e-14) {
        if (v[i] < 0.0) {
          for (double& e : v) e = -e;
        }
        break;
      }
    }
    cols.push_back(std::move(v));
  }

  Matrix h(q, d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < q; ++i) h(i, j) = cols[j][i];
  return {spec, std::move(h)};
}

}  // namespace mpf
