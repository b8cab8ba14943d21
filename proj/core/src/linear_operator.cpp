#include "gglr/linear_operator.hpp"

#include "gglr/error.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "sparse-core";

}  // namespace

LinearOperator::LinearOperator(Index dim, ApplyFn apply)
    : dim_(dim), apply_(std::make_shared<const ApplyFn>(std::move(apply))) {}

LinearOperator LinearOperator::from_matrix(SparseMatrix m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "operator matrix must be square");
  }
  auto shared = std::make_shared<const SparseMatrix>(std::move(m));
  const Index n = shared->rows();
  return LinearOperator(
      n, [shared](const Vector& x, Vector& y) { shared->multiply(x, y); });
}

LinearOperator LinearOperator::from_dense(DenseMatrix m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "operator matrix must be square");
  }
  auto shared = std::make_shared<const DenseMatrix>(std::move(m));
  const Index n = shared->rows();
  return LinearOperator(
      n, [shared](const Vector& x, Vector& y) { y.noalias() = *shared * x; });
}

LinearOperator LinearOperator::identity(Index n) {
  return LinearOperator(n, [](const Vector& x, Vector& y) { y = x; });
}

void LinearOperator::apply(const Vector& x, Vector& y) const {
  if (!apply_) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "empty operator");
  }
  if (x.size() != dim_) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "operator applied to vector of wrong length");
  }
  (*apply_)(x, y);
}

Vector LinearOperator::operator()(const Vector& x) const {
  Vector y;
  apply(x, y);
  return y;
}

LinearOperator combine(const LinearOperator& a, const LinearOperator& b,
                       double alpha, double beta) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "combine: operator dimensions differ");
  }
  return LinearOperator(a.dim(), [a, b, alpha, beta](const Vector& x, Vector& y) {
    Vector tmp;
    a.apply(x, y);
    b.apply(x, tmp);
    y = alpha * y + beta * tmp;
  });
}

DenseMatrix densify(const LinearOperator& op) {
  const Index n = op.dim();
  DenseMatrix d(n, n);
  Vector e = Vector::Zero(n);
  Vector col;
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    d.col(j) = col;
    e[j] = 0.0;
  }
  return d;
}

}  // namespace gglr
