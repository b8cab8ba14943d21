#pragma once

#include <span>
#include <vector>

#include "gglr/types.hpp"

namespace gglr {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed-row sparse matrix with sorted column indices in every row.
///
/// Assembly goes through coordinate triplets: they are sorted and duplicate
/// (row, col) pairs are summed. The matrix is immutable afterwards, so all
/// const members are safe to call concurrently.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols);

  static SparseMatrix from_triplets(Index rows, Index cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(Index n);
  static SparseMatrix diagonal(const Vector& d);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_indices(Index r) const;
  std::span<const double> row_values(Index r) const;

  // Zero when the entry is not stored.
  double coeff(Index r, Index c) const;

  void multiply(const Vector& x, Vector& y) const;
  Vector operator*(const Vector& x) const;
  // y = A^T x without forming the transpose.
  void multiply_transpose(const Vector& x, Vector& y) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double s) const;
  Vector diagonal_values() const;

  // Exact pattern and |a_ij - a_ji| <= tol.
  bool is_symmetric(double tol = 0.0) const;

  DenseMatrix to_dense() const;
  std::vector<Triplet> triplets() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// alpha * a + beta * b.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b,
                 double alpha = 1.0, double beta = 1.0);

}  // namespace gglr
