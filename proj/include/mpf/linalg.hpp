#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "mpf/error.hpp"

namespace mpf {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;

/// Dense row-major matrix of finite reals.
///
/// Finiteness is checked when a matrix is built from external values; the
/// mutable accessors are for assembly code that writes computed entries.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix column(std::span<const double> values);
  static Matrix from_eigen(const Eigen::Ref<const Eigen::MatrixXd>& m);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> values() const noexcept { return data_; }

  ConstMatrixMap view() const noexcept {
    return {data_.data(), static_cast<Eigen::Index>(rows_),
            static_cast<Eigen::Index>(cols_)};
  }
  MatrixMap view() noexcept {
    return {data_.data(), static_cast<Eigen::Index>(rows_),
            static_cast<Eigen::Index>(cols_)};
  }

  Matrix transpose() const;
  std::vector<double> column_values(std::size_t c) const;
  /// Rows selected in the given order.
  Matrix select_rows(std::span<const std::size_t> rows) const;
  /// Leading `n` columns.
  Matrix left_cols(std::size_t n) const;

  double max_abs() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);

/// Relative rank tolerance applied to the R diagonal of every QR factor.
inline constexpr double kRankTolerance = 1e-10;

/// Least-squares solution C minimizing ||Y - X C||_F, computed from a
/// column-pivoted Householder QR of X. Throws RankDeficient when the smallest
/// R diagonal falls below kRankTolerance times the largest.
Matrix solve_least_squares(const Matrix& x, const Matrix& y);

struct QrFactors {
  Matrix q;  // rows x cols, orthonormal columns
  Matrix r;  // cols x cols, upper triangular, positive diagonal
};

/// Thin QR factorization with R's diagonal made positive.
QrFactors qr_orthonormalize(const Matrix& h);

Matrix kronecker(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Column-stacked vectorization, returned as an (rows*cols) x 1 matrix.
Matrix vec(const Matrix& a);

}  // namespace mpf
