#include "mpf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mpf {

namespace {

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFinite, "matrix entry is not finite");
    }
  }
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegreesOfFreedomTooLarge: return "DegreesOfFreedomTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::EmptyDesign: return "EmptyDesign";
    case ErrorCode::InsufficientRows: return "InsufficientRows";
    case ErrorCode::IncompleteResponses: return "IncompleteResponses";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::EmptyCalibrationSet: return "EmptyCalibrationSet";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonFinite:
    case ErrorCode::RankDeficient:
    case ErrorCode::DegreesOfFreedomTooLarge:
    case ErrorCode::InsufficientRows:
    case ErrorCode::IncompleteResponses:
    case ErrorCode::NonConvergence:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      index_(index) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  require_finite(std::span<const double>(&fill, 1));
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::ShapeMismatch,
                "entry count " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
  require_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::ShapeMismatch, "ragged initializer list");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1,
                std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::from_eigen(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Matrix out(static_cast<std::size_t>(m.rows()),
             static_cast<std::size_t>(m.cols()));
  out.view() = m;
  require_finite(out.data_);
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

std::vector<double> Matrix::column_values(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, c);
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix Matrix::left_cols(std::size_t n) const {
  if (n > cols_) throw Error(ErrorCode::ShapeMismatch, "left_cols out of range");
  Matrix out(rows_, n);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = (*this)(i, j);
  return out;
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "cannot multiply " + shape(a) + " by " + shape(b));
  }
  Matrix out(a.rows(), b.cols());
  out.view().noalias() = a.view() * b.view();
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch,
                "cannot subtract " + shape(b) + " from " + shape(a));
  }
  Matrix out(a.rows(), a.cols());
  out.view() = a.view() - b.view();
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch,
                "cannot add " + shape(a) + " and " + shape(b));
  }
  Matrix out(a.rows(), a.cols());
  out.view() = a.view() + b.view();
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).max_abs();
}

Matrix solve_least_squares(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "design has " + std::to_string(x.rows()) +
                    " rows but response has " + std::to_string(y.rows()));
  }
  if (x.rows() < x.cols() || x.cols() == 0) {
    throw Error(ErrorCode::RankDeficient,
                "need at least as many rows as columns (" +
                    std::to_string(x.rows()) + " < " +
                    std::to_string(x.cols()) + ")");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.view());
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  const double largest = diag.maxCoeff();
  const double smallest = diag.minCoeff();
  if (!(largest > 0.0) || smallest <= kRankTolerance * largest) {
    throw Error(ErrorCode::RankDeficient,
                "design matrix is rank deficient (R diagonal ratio " +
                    std::to_string(largest > 0 ? smallest / largest : 0.0) +
                    ")");
  }
  Eigen::MatrixXd solution = qr.solve(Eigen::MatrixXd(y.view()));
  return Matrix::from_eigen(solution);
}

QrFactors qr_orthonormalize(const Matrix& h) {
  const std::size_t q = h.rows();
  const std::size_t d = h.cols();
  if (d == 0 || d > q) {
    throw Error(ErrorCode::RankDeficient,
                "QR needs 1 <= cols <= rows, got " + shape(h));
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(h.view());
  Eigen::MatrixXd thin_q =
      qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(q),
                                                    static_cast<Eigen::Index>(d));
  Eigen::MatrixXd r = qr.matrixQR()
                          .topRows(static_cast<Eigen::Index>(d))
                          .triangularView<Eigen::Upper>();
  const auto diag = r.diagonal().cwiseAbs();
  if (!(diag.maxCoeff() > 0.0) ||
      diag.minCoeff() <= kRankTolerance * diag.maxCoeff()) {
    throw Error(ErrorCode::RankDeficient, "basis matrix is rank deficient");
  }
  for (Eigen::Index j = 0; j < r.rows(); ++j) {
    if (r(j, j) < 0.0) {
      r.row(j) *= -1.0;
      thin_q.col(j) *= -1.0;
    }
  }
  return {Matrix::from_eigen(thin_q), Matrix::from_eigen(r)};
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double s = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k) {
        for (std::size_t l = 0; l < b.cols(); ++l) {
          out(i * b.rows() + k, j * b.cols() + l) = s * b(k, l);
        }
      }
    }
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch,
                "hadamard of " + shape(a) + " and " + shape(b));
  }
  Matrix out(a.rows(), a.cols());
  out.view() = a.view().cwiseProduct(b.view());
  return out;
}

Matrix vec(const Matrix& a) {
  Matrix out(a.size(), 1);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) out(j * a.rows() + i, 0) = a(i, j);
  return out;
}

}  // namespace mpf
