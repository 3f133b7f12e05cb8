#include "doctest.h"

#include <Eigen/SVD>
#include <algorithm>
#include <random>

#include "mpf/ls_forecaster.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace mpf;
using mpf::testing::basis_for;
using mpf::testing::make_complete_design;
using mpf::testing::make_design;
using mpf::testing::random_mask;
using mpf::testing::random_matrix;

namespace {

// Dense row-deleted Kronecker system built entry by entry, solved through
// the normal equations.
std::vector<double> kronecker_oracle(const DesignSet& d, const Matrix& h) {
  const std::size_t m = d.x.cols(), dd = h.cols();
  Matrix rows(d.observed_cells(), dd * m);
  std::vector<double> y;
  std::size_t r = 0;
  for (std::size_t j = 0; j < d.y.cols(); ++j)
    for (std::size_t i = 0; i < d.rows(); ++i) {
      if (d.w(i, j) == 0.0) continue;
      for (std::size_t l = 0; l < dd; ++l)
        for (std::size_t k = 0; k < m; ++k) rows(r, l * m + k) = h(j, l) * d.x(i, k);
      y.push_back(d.y(i, j));
      ++r;
    }
  return mpf::testing::normal_equations(rows, y);
}

std::vector<double> singular_values(const Matrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(a.view()));
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

ErrorCode code_of(auto&& fn, std::optional<std::size_t>* index = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (index) *index = e.index();
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

Matrix fitted_values(const CoefficientSet& c, const DesignSet& d) {
  return predict(c, d.x, d.row_index).values;
}

}  // namespace

TEST_CASE("baseline: identity design returns Y transposed") {
  const Matrix y{{1, 2, 3}, {4, 5, 6}};
  const auto c = fit_baseline(make_complete_design(Matrix::identity(2), y));
  CHECK(c.kind == ModelKind::Baseline);
  CHECK(max_abs_diff(c.coefficients(), y.transpose()) < 1e-14);
}

TEST_CASE("baseline: noiseless exact recovery") {
  std::mt19937_64 gen(1);
  const Matrix x = random_matrix(gen, 30, 4);
  const Matrix c = random_matrix(gen, 5, 4);
  const auto fit = fit_baseline(make_complete_design(x, x * c.transpose()));
  CHECK(max_abs_diff(fit.coefficients(), c) < 1e-10);
}

TEST_CASE("baseline: masked fit matches per-ahead normal equations") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = random_matrix(gen, 20, 3);
    const Matrix y = random_matrix(gen, 20, 4);
    const Matrix w = random_mask(gen, 20, 4, 0.3);
    const auto fit = fit_baseline(make_design(x, y, w));
    const Matrix b = fit.coefficients();
    for (std::size_t j = 0; j < 4; ++j) {
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < 20; ++i)
        if (w(i, j) == 1.0) keep.push_back(i);
      const auto oracle =
          mpf::testing::normal_equations(x.select_rows(keep), y.select_rows(keep).column_values(j));
      for (std::size_t k = 0; k < 3; ++k) CHECK(b(j, k) == doctest::Approx(oracle[k]).epsilon(1e-10));
    }
  }
}

TEST_CASE("baseline errors carry the ahead index") {
  std::mt19937_64 gen(3);
  const Matrix x = random_matrix(gen, 6, 3);
  Matrix w(6, 3, 1.0);
  for (std::size_t i = 0; i < 4; ++i) w(i, 2) = 0.0;  // two rows left for ahead 2
  std::optional<std::size_t> idx;
  CHECK(code_of([&] { fit_baseline(make_design(x, random_matrix(gen, 6, 3), w)); }, &idx) ==
        ErrorCode::InsufficientRows);
  CHECK(idx == 2);

  Matrix collinear = x;
  for (std::size_t i = 0; i < 6; ++i) collinear(i, 2) = 2 * collinear(i, 0);
  CHECK(code_of([&] { fit_baseline(make_complete_design(collinear, random_matrix(gen, 6, 2))); },
                &idx) == ErrorCode::RankDeficient);
  CHECK(idx == 0);
}

TEST_CASE("smooth: full basis reproduces the baseline") {
  std::mt19937_64 gen(4);
  const auto d = make_complete_design(random_matrix(gen, 200, 6), random_matrix(gen, 200, 8));
  const auto base = fit_baseline(d);
  const auto smooth = fit_smooth(d, basis_for(d, 8));
  CHECK(smooth.kind == ModelKind::Smooth);
  CHECK(max_abs_diff(smooth.coefficients(), base.coefficients()) <= 1e-8);
  CHECK(max_abs_diff(smooth.coefficients(), smooth.basis->h * *smooth.theta) == 0.0);
}

TEST_CASE("smooth: noiseless exact recovery of Theta") {
  std::mt19937_64 gen(5);
  const Matrix x = random_matrix(gen, 40, 3);
  const auto tmp = make_complete_design(x, Matrix(40, 10));
  const auto basis = basis_for(tmp, 3);
  const Matrix theta = random_matrix(gen, 3, 3);
  const auto d = make_complete_design(x, x * theta.transpose() * basis.h.transpose());
  CHECK(max_abs_diff(*fit_smooth(d, basis).theta, theta) < 1e-10);
}

TEST_CASE("smooth: d = 1 is OLS of Y h1 on X") {
  std::mt19937_64 gen(6);
  const auto d = make_complete_design(random_matrix(gen, 25, 2), random_matrix(gen, 25, 5));
  const auto basis = basis_for(d, 1);
  const auto fit = fit_smooth(d, basis);
  std::vector<double> yh(25, 0.0);
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t j = 0; j < 5; ++j) yh[i] += d.y(i, j) * basis.h(j, 0);
  const auto oracle = mpf::testing::normal_equations(d.x, yh);
  for (std::size_t k = 0; k < 2; ++k) CHECK((*fit.theta)(0, k) == doctest::Approx(oracle[k]).epsilon(1e-10));
  const Matrix b = fit.coefficients();
  for (std::size_t j = 1; j < 5; ++j)
    for (std::size_t k = 0; k < 2; ++k) CHECK(b(j, k) == doctest::Approx(b(0, k)).epsilon(1e-12));
}

TEST_CASE("smooth: fast path refuses incomplete responses") {
  std::mt19937_64 gen(7);
  Matrix w(10, 3, 1.0);
  w(4, 1) = 0.0;
  const auto d = make_design(random_matrix(gen, 10, 2), random_matrix(gen, 10, 3), w);
  CHECK(code_of([&] { fit_smooth(d, basis_for(d, 2)); }) == ErrorCode::IncompleteResponses);
}

TEST_CASE("weighted: all-ones mask agrees with the fast path") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 15 + trial, m = 1 + trial % 4, q = 3 + trial % 6;
    const auto d = make_complete_design(random_matrix(gen, n, m), random_matrix(gen, n, q));
    const auto basis = basis_for(d, 1 + trial % q);
    CHECK(max_abs_diff(*fit_smooth_weighted(d, basis).theta, *fit_smooth(d, basis).theta) <= 1e-8);
  }
}

TEST_CASE("weighted: single missing cell keeps exact recovery") {
  std::mt19937_64 gen(9);
  const Matrix x = random_matrix(gen, 30, 3);
  const auto basis = basis_for(make_complete_design(x, Matrix(30, 6)), 2);
  const Matrix theta = random_matrix(gen, 2, 3);
  Matrix y = x * theta.transpose() * basis.h.transpose();
  Matrix w(30, 6, 1.0);
  w(7, 3) = 0.0;
  y(7, 3) = 0.0;
  CHECK(max_abs_diff(*fit_smooth_weighted(make_design(x, y, w), basis).theta, theta) < 1e-10);
}

TEST_CASE("weighted: matches the explicit Kronecker oracle under a 10% mask") {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = random_matrix(gen, 25, 3);
    const Matrix w = random_mask(gen, 25, 7, 0.1);
    const Matrix y = hadamard(random_matrix(gen, 25, 7), w);
    const auto d = make_design(x, y, w);
    const auto basis = basis_for(d, 3);
    const auto fit = fit_smooth_weighted(d, basis);
    const auto oracle = kronecker_oracle(d, basis.h);
    CHECK(max_abs_diff(*fit.theta, theta_from_vec(oracle, 3, 3)) <= 1e-10);

    // Any other Theta does no better on the observed cells.
    const double best = masked_sse(d, fitted_values(fit, d));
    CoefficientSet other = fit;
    other.theta = *fit.theta + random_matrix(gen, 3, 3) * Matrix(3, 3, 0.01);
    CHECK(best <= masked_sse(d, fitted_values(other, d)));
  }
}

TEST_CASE("expanded system ordering") {
  const Matrix x{{1, 2}, {3, 4}};
  const Matrix y{{10, 11}, {12, 13}};
  Matrix w(2, 2, 1.0);
  w(0, 1) = 0.0;
  const auto d = make_design(x, hadamard(y, w), w);
  const Matrix h{{1, 5}, {2, 7}};
  BasisMatrix basis{{BasisFamily::OrthogonalPolynomial, 2, {0, 1}}, h};
  const auto sys = expand_observed(d, basis);
  // Cells in column-stacked order: (0,0), (1,0), (1,1).
  CHECK(sys.y == std::vector<double>{10, 12, 13});
  CHECK(sys.x == Matrix{{1, 2, 5, 10}, {3, 4, 15, 20}, {6, 8, 21, 28}});
  CHECK(theta_from_vec(std::vector<double>{1, 2, 3, 4}, 2, 2) == Matrix{{1, 2}, {3, 4}});
}

TEST_CASE("predict") {
  std::mt19937_64 gen(11);
  const auto d = make_complete_design(random_matrix(gen, 12, 3), random_matrix(gen, 12, 5));
  const auto smooth = fit_smooth(d, basis_for(d, 2));
  const auto zero = predict(smooth, Matrix(1, 3, 0.0), {{"z", 0}});
  CHECK(zero.values == Matrix(1, 5, 0.0));

  const auto full = fit_smooth(d, basis_for(d, 5));
  CoefficientSet as_baseline;
  as_baseline.kind = ModelKind::Baseline;
  as_baseline.b = full.coefficients();
  as_baseline.column_index = full.column_index;
  as_baseline.aheads = full.aheads;
  CHECK(max_abs_diff(predict(full, d.x, d.row_index).values,
                     predict(as_baseline, d.x, d.row_index).values) <= 1e-12);

  CHECK(code_of([&] { predict(smooth, Matrix(2, 4), {{"a", 0}, {"b", 1}}); }) ==
        ErrorCode::ShapeMismatch);
}

TEST_CASE("predict: saturated noiseless model interpolates a training row") {
  std::mt19937_64 gen(12);
  const Matrix x = random_matrix(gen, 4, 4);
  const Matrix c = random_matrix(gen, 3, 4);
  const auto d = make_complete_design(x, x * c.transpose());
  const auto fit = fit_baseline(d);
  const auto row = predict(fit, x.select_rows(std::vector<std::size_t>{2}), {d.row_index[2]});
  for (std::size_t j = 0; j < 3; ++j) CHECK(row.values(0, j) == doctest::Approx(d.y(2, j)).epsilon(1e-10));
}

TEST_CASE("smooth predictions have rank at most d") {
  std::mt19937_64 gen(13);
  const auto d = make_complete_design(random_matrix(gen, 50, 6), random_matrix(gen, 50, 12));
  for (std::size_t df = 1; df <= 4; ++df) {
    const auto s = singular_values(fitted_values(fit_smooth(d, basis_for(d, df)), d));
    CHECK(s[df] <= 1e-8 * s[0]);
  }
}

TEST_CASE("training SSE is non-increasing in d and meets the baseline at d = q") {
  std::mt19937_64 gen(14);
  for (double missing : {0.0, 0.15}) {
    const Matrix w = random_mask(gen, 60, 9, missing);
    const auto d = make_design(random_matrix(gen, 60, 4), hadamard(random_matrix(gen, 60, 9), w), w);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t df = 1; df <= 9; ++df) {
      const double sse = masked_sse(d, fitted_values(fit_smooth_weighted(d, basis_for(d, df)), d));
      CHECK(sse <= prev * (1 + 1e-8));
      prev = sse;
    }
    const double base = masked_sse(d, fitted_values(fit_baseline(d), d));
    CHECK(prev == doctest::Approx(base).epsilon(1e-8));
  }
}

TEST_CASE("row permutation leaves coefficients unchanged") {
  std::mt19937_64 gen(15);
  const Matrix w = random_mask(gen, 40, 6, 0.1);
  const auto d = make_design(random_matrix(gen, 40, 3), hadamard(random_matrix(gen, 40, 6), w), w);
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto shuffled = d.subset(perm);
  const auto basis = basis_for(d, 3);
  CHECK(max_abs_diff(fit_baseline(d).coefficients(), fit_baseline(shuffled).coefficients()) <= 1e-12);
  CHECK(max_abs_diff(*fit_smooth_weighted(d, basis).theta,
                     *fit_smooth_weighted(shuffled, basis).theta) <= 1e-12);
}

TEST_CASE("ridge augmentation shrinks toward zero") {
  std::mt19937_64 gen(16);
  const auto d = make_complete_design(random_matrix(gen, 30, 3), random_matrix(gen, 30, 4));
  const auto aug = augment_ridge(d, 4.0);
  CHECK(aug.rows() == 33);
  CHECK(aug.x(30, 0) == 2.0);
  CHECK(aug.y.row(31)[0] == 0.0);
  // Closed form (X'X + lambda I)^{-1} X'y for the first ahead.
  Matrix gram = d.x.transpose() * d.x;
  for (std::size_t k = 0; k < 3; ++k) gram(k, k) += 4.0;
  const Matrix xty = d.x.transpose() * d.y;
  std::vector<std::vector<double>> a(3, std::vector<double>(3));
  std::vector<double> b(3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) a[i][j] = gram(i, j);
    b[i] = xty(i, 0);
  }
  const auto oracle = mpf::testing::gauss_solve(a, b).value();
  const Matrix coef = fit_baseline(aug).coefficients();
  for (std::size_t k = 0; k < 3; ++k) CHECK(coef(0, k) == doctest::Approx(oracle[k]).epsilon(1e-10));
}

TEST_CASE("model kind names") {
  CHECK(to_string(ModelKind::Baseline) == "baseline");
  CHECK(parse_model_kind("smooth") == ModelKind::Smooth);
  CHECK_THROWS_AS(parse_model_kind("lasso"), Error);
}
