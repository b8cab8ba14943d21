#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gglr/linear_operator.hpp"
#include "gglr/sparse.hpp"
#include "gglr/types.hpp"

namespace gglr {

// ---------------------------------------------------------------------------
// Conjugate gradients
// ---------------------------------------------------------------------------

struct CgOptions {
  double tol = 1e-8;    // relative residual ||Ax - b|| / ||b||
  Index max_iter = 0;   // 0 means 10 * dimension
  // Jacobi preconditioner as the inverse diagonal; empty means none.
  Vector inverse_diagonal;
};

struct CgResult {
  Vector x;
  Index iterations = 0;
  double relative_residual = 0.0;
};

/// Solves op(x) = rhs for a symmetric positive-definite `op`, starting at 0.
///
/// Throws kNonConvergence when the iteration cap is hit and
/// kBreakdownNegativeCurvature when p^T A p <= 0 shows the operator is not
/// positive definite on the Krylov space.
CgResult cg_solve(const LinearOperator& op, const Vector& rhs,
                  const CgOptions& options = {});

// ---------------------------------------------------------------------------
// Symmetric eigenproblems
// ---------------------------------------------------------------------------

struct EigenOptions {
  double tol = 1e-9;          // residual ||Av - lv|| relative to ||A||_est
  Index max_iter = 0;         // 0 means max(500, 10 * dimension)
  std::uint64_t seed = 0x5eed5eedULL;
  Index dense_limit = 2000;   // largest dimension the dense path accepts
  bool allow_dense_fallback = true;
  bool force_dense = false;
};

struct EigenPairs {
  Vector values;        // ascending
  DenseMatrix vectors;  // unit-norm columns, same order as values
  Index iterations = 0;
  bool used_dense = false;
};

/// The `k` smallest eigenpairs of a symmetric PSD operator restricted to the
/// orthogonal complement of `known_null`.
///
/// Runs a preconditioner-free blocked LOBPCG iteration with hard deflation.
/// When it fails to converge and the dimension is within
/// `options.dense_limit`, falls back to a dense decomposition.
EigenPairs smallest_eigenpairs(const LinearOperator& op, Index k,
                               std::span<const Vector> known_null = {},
                               const EigenOptions& options = {});

/// Same contract as `smallest_eigenpairs`, computed by dense
/// eigendecomposition of the operator compressed to the complement of
/// `known_null`. This is the fallback path and the test oracle.
EigenPairs dense_smallest_eigenpairs(const LinearOperator& op, Index k,
                                     std::span<const Vector> known_null = {});

struct LargestEigenpair {
  double value = 0.0;
  Vector vector;
  Index iterations = 0;
};

/// Largest eigenpair of a symmetric PSD operator by Lanczos with full
/// reorthogonalization.
LargestEigenpair largest_eigenpair(const LinearOperator& op,
                                   const EigenOptions& options = {});

double largest_eigenvalue(const LinearOperator& op,
                          const EigenOptions& options = {});

// ---------------------------------------------------------------------------
// Pseudo-inverses
// ---------------------------------------------------------------------------

inline constexpr double kPseudoInverseRcond = 1e-10;
inline constexpr Index kDenseSmallLimit = 64;

/// (M^T M)^{-1} M^T for a small full-column-rank matrix. Throws
/// kRankDeficient when the reciprocal condition number of M^T M is below
/// kPseudoInverseRcond.
DenseMatrix left_pseudo_inverse(const DenseMatrix& m);

/// Reciprocal 2-norm condition number of M^T M.
double gram_rcond(const DenseMatrix& m);

/// Minimum-norm u with G u = b: solves (G G^T) t = b by CG and returns G^T t.
/// Throws kRankDeficient when G is not full row rank.
Vector right_pseudo_inverse_apply(const SparseMatrix& g, const Vector& b);

}  // namespace gglr
