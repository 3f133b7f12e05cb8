#pragma once

// Test-only reference computations. None of these touch the QR, Eigen or
// interior-point code paths they are used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mpf/linalg.hpp"
#include "mpf/quantile.hpp"

namespace mpf::testing {

/// Gaussian elimination with partial pivoting; nullopt when a pivot is
/// below `tiny` (singular to working precision).
inline std::optional<std::vector<double>> gauss_solve(std::vector<std::vector<double>> a,
                                                      std::vector<double> b,
                                                      double tiny = 1e-12) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < tiny) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Least squares through explicitly formed normal equations X'X c = X'y.
inline std::vector<double> normal_equations(const Matrix& x, std::span<const double> y) {
  const std::size_t k = x.cols();
  std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      xty[i] += x(r, i) * y[r];
      for (std::size_t j = 0; j < k; ++j) xtx[i][j] += x(r, i) * x(r, j);
    }
  }
  return gauss_solve(std::move(xtx), std::move(xty), 0.0).value();
}

/// Exhaustive search over basic solutions: every k-subset of the weighted
/// rows whose square system is nonsingular gives a candidate; the LP optimum
/// of weighted quantile regression is attained at one of them.
inline double exhaustive_qr_optimum(const Matrix& x, std::span<const double> y,
                                    std::span<const double> w, QuantileLevel tau) {
  const std::size_t k = x.cols();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < x.rows(); ++i)
    if (w[i] > 0.0) rows.push_back(i);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(k);
  std::vector<bool> sel(rows.size(), false);
  std::fill(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    std::size_t c = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (sel[i]) pick[c++] = rows[i];
    std::vector<std::vector<double>> a(k, std::vector<double>(k));
    std::vector<double> b(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) a[i][j] = x(pick[i], j);
      b[i] = y[pick[i]];
    }
    auto theta = gauss_solve(a, b, 1e-10);
    if (!theta) continue;
    double obj = 0.0;
    for (std::size_t r : rows) {
      double fit = 0.0;
      for (std::size_t j = 0; j < k; ++j) fit += x(r, j) * (*theta)[j];
      obj += w[r] * pinball(y[r], fit, tau);
    }
    best = std::min(best, obj);
  } while (std::prev_permutation(sel.begin(), sel.end()));
  return best;
}

inline Matrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(gen);
  return m;
}

inline Matrix random_mask(std::mt19937_64& gen, std::size_t rows, std::size_t cols,
                          double missing) {
  std::bernoulli_distribution drop(missing);
  Matrix m(rows, cols, 1.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (drop(gen)) m(i, j) = 0.0;
  return m;
}

}  // namespace mpf::testing
