#pragma once

#include <functional>
#include <memory>

#include "gglr/sparse.hpp"
#include "gglr/types.hpp"

namespace gglr {

/// Square linear map applied matrix-free. Copies share the underlying
/// callable; `apply` must be reentrant.
class LinearOperator {
 public:
  using ApplyFn = std::function<void(const Vector& in, Vector& out)>;

  LinearOperator() = default;
  LinearOperator(Index dim, ApplyFn apply);

  static LinearOperator from_matrix(SparseMatrix m);
  static LinearOperator from_dense(DenseMatrix m);
  static LinearOperator identity(Index n);

  Index dim() const noexcept { return dim_; }
  void apply(const Vector& x, Vector& y) const;
  Vector operator()(const Vector& x) const;

 private:
  Index dim_ = 0;
  std::shared_ptr<const ApplyFn> apply_;
};

/// alpha * a + beta * b.
LinearOperator combine(const LinearOperator& a, const LinearOperator& b,
                       double alpha = 1.0, double beta = 1.0);

/// Dense matrix of `op` by probing with unit vectors. Test and small-scale
/// diagnostic use only.
DenseMatrix densify(const LinearOperator& op);

}  // namespace gglr
