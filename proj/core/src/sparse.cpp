#include "gglr/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "gglr/error.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "sparse-core";

}  // namespace

SparseMatrix::SparseMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), row_ptr_(static_cast<std::size_t>(rows) + 1, 0) {
  if (rows < 0 || cols < 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "negative dimension");
  }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols,
                                         std::vector<Triplet> triplets) {
  SparseMatrix m(rows, cols);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "triplet index out of bounds");
    }
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::vector<Index> counts(static_cast<std::size_t>(rows), 0);
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (!m.col_idx_.empty() && k > 0 && triplets[k - 1].row == t.row &&
        triplets[k - 1].col == t.col) {
      m.values_.back() += t.value;
      continue;
    }
    m.col_idx_.push_back(t.col);
    m.values_.push_back(t.value);
    ++counts[static_cast<std::size_t>(t.row)];
  }
  for (Index r = 0; r < rows; ++r) {
    m.row_ptr_[r + 1] = m.row_ptr_[r] + counts[static_cast<std::size_t>(r)];
  }
  return m;
}

SparseMatrix SparseMatrix::identity(Index n) {
  return diagonal(Vector::Ones(n));
}

SparseMatrix SparseMatrix::diagonal(const Vector& d) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Index i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
  return from_triplets(d.size(), d.size(), std::move(t));
}

std::span<const Index> SparseMatrix::row_indices(Index r) const {
  const auto b = static_cast<std::size_t>(row_ptr_[r]);
  const auto e = static_cast<std::size_t>(row_ptr_[r + 1]);
  return {col_idx_.data() + b, e - b};
}

std::span<const double> SparseMatrix::row_values(Index r) const {
  const auto b = static_cast<std::size_t>(row_ptr_[r]);
  const auto e = static_cast<std::size_t>(row_ptr_[r + 1]);
  return {values_.data() + b, e - b};
}

double SparseMatrix::coeff(Index r, Index c) const {
  const auto cols = row_indices(r);
  const auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
}

void SparseMatrix::multiply(const Vector& x, Vector& y) const {
  if (x.size() != cols_) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "multiply: size mismatch");
  }
  y.resize(rows_);
  for (Index r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      acc += values_[static_cast<std::size_t>(k)] *
             x[col_idx_[static_cast<std::size_t>(k)]];
    }
    y[r] = acc;
  }
}

Vector SparseMatrix::operator*(const Vector& x) const {
  Vector y;
  multiply(x, y);
  return y;
}

void SparseMatrix::multiply_transpose(const Vector& x, Vector& y) const {
  if (x.size() != rows_) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "multiply_transpose: size mismatch");
  }
  y.setZero(cols_);
  for (Index r = 0; r < rows_; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      y[col_idx_[static_cast<std::size_t>(k)]] +=
          values_[static_cast<std::size_t>(k)] * xr;
    }
  }
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      t.push_back({col_idx_[static_cast<std::size_t>(k)], r,
                   values_[static_cast<std::size_t>(k)]});
    }
  }
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::scaled(double s) const {
  SparseMatrix out = *this;
  for (auto& v : out.values_) v *= s;
  return out;
}

Vector SparseMatrix::diagonal_values() const {
  const Index n = std::min(rows_, cols_);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d[i] = coeff(i, i);
  return d;
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (Index r = 0; r < rows_; ++r) {
    const auto cols = row_indices(r);
    const auto vals = row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const Index c = cols[k];
      const auto other = row_indices(c);
      if (!std::binary_search(other.begin(), other.end(), r)) return false;
      if (std::abs(vals[k] - coeff(c, r)) > tol) return false;
    }
  }
  return true;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      d(r, col_idx_[static_cast<std::size_t>(k)]) =
          values_[static_cast<std::size_t>(k)];
    }
  }
  return d;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      t.push_back({r, col_idx_[static_cast<std::size_t>(k)],
                   values_[static_cast<std::size_t>(k)]});
    }
  }
  return t;
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha,
                 double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "add: shape mismatch");
  }
  auto t = a.scaled(alpha).triplets();
  auto tb = b.scaled(beta).triplets();
  t.insert(t.end(), tb.begin(), tb.end());
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

}  // namespace gglr
