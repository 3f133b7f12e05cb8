#pragma once

#include <numeric>
#include <string>

#include "mpf/basis.hpp"
#include "mpf/panel.hpp"

namespace mpf::testing {

/// Design with synthetic row/column labels: rows are ("r<i>", i), columns
/// ("x<k>", 1), aheads 0..q-1 unless given.
inline DesignSet make_design(Matrix x, Matrix y, Matrix w, std::vector<int> aheads = {}) {
  DesignSet d;
  if (aheads.empty()) {
    aheads.resize(y.cols());
    std::iota(aheads.begin(), aheads.end(), 0);
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    d.row_index.push_back({"r" + std::to_string(i), static_cast<TimeIndex>(i)});
  }
  for (std::size_t k = 0; k < x.cols(); ++k) d.column_index.push_back({"x" + std::to_string(k), 1});
  d.x = std::move(x);
  d.y = std::move(y);
  d.w = std::move(w);
  d.aheads = std::move(aheads);
  return d;
}

inline DesignSet make_complete_design(Matrix x, Matrix y) {
  Matrix w(y.rows(), y.cols(), 1.0);
  return make_design(std::move(x), std::move(y), std::move(w));
}

inline BasisMatrix basis_for(const DesignSet& d, std::size_t df) {
  BasisSpec spec;
  spec.degrees_of_freedom = df;
  spec.aheads.assign(d.aheads.begin(), d.aheads.end());
  return build_basis(spec);
}

}  // namespace mpf::testing
