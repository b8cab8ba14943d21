#include "gglr/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gglr/error.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "sparse-core";

double uniform_pm1(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

// Orthonormal basis for span(vectors); dependent vectors are dropped.
DenseMatrix orthonormal_basis(std::span<const Vector> vectors, Index n) {
  DenseMatrix basis(n, static_cast<Index>(vectors.size()));
  Index kept = 0;
  for (const auto& v : vectors) {
    if (v.size() != n) {
      throw Error(ErrorCode::kLengthMismatch, kModule,
                  "deflation vector has wrong length");
    }
    Vector w = v;
    const double original = w.norm();
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < kept; ++j) w -= basis.col(j).dot(w) * basis.col(j);
    }
    const double nrm = w.norm();
    if (nrm <= 1e-10 * original) continue;
    basis.col(kept++) = w / nrm;
  }
  return basis.leftCols(kept);
}

// Columns of `s` together with their images `as` under the operator.
// Orthonormalizes s against `fixed` (projected out, images via `a_fixed`)
// and against itself, applying the same linear combinations to the images.
// Columns that become numerically dependent are dropped.
void orthonormalize_pairs(DenseMatrix& s, DenseMatrix& as,
                          const DenseMatrix& fixed, const DenseMatrix& a_fixed,
                          Index first_to_process) {
  const Index n = s.rows();
  DenseMatrix out_s(n, s.cols());
  DenseMatrix out_as(n, s.cols());
  Index kept = 0;
  for (Index c = 0; c < s.cols(); ++c) {
    Vector v = s.col(c);
    Vector av = as.col(c);
    const double original = v.norm();
    if (original == 0.0 || !std::isfinite(original)) continue;
    if (c >= first_to_process) {
      for (int pass = 0; pass < 2; ++pass) {
        if (fixed.cols() > 0) {
          const Vector coef = fixed.transpose() * v;
          v -= fixed * coef;
          av -= a_fixed * coef;
        }
        for (Index j = 0; j < kept; ++j) {
          const double coef = out_s.col(j).dot(v);
          v -= coef * out_s.col(j);
          av -= coef * out_as.col(j);
        }
      }
      const double nrm = v.norm();
      if (nrm <= 1e-10 * original) continue;
      v /= nrm;
      av /= nrm;
    }
    out_s.col(kept) = v;
    out_as.col(kept) = av;
    ++kept;
  }
  s = out_s.leftCols(kept);
  as = out_as.leftCols(kept);
}

DenseMatrix apply_columns(const LinearOperator& op, const DenseMatrix& x) {
  DenseMatrix out(x.rows(), x.cols());
  Vector in;
  Vector y;
  for (Index j = 0; j < x.cols(); ++j) {
    in = x.col(j);
    op.apply(in, y);
    out.col(j) = y;
  }
  return out;
}

Index default_eigen_iters(const EigenOptions& o, Index n) {
  return o.max_iter > 0 ? o.max_iter : std::max<Index>(500, 10 * n);
}

}  // namespace

// ---------------------------------------------------------------------------

CgResult cg_solve(const LinearOperator& op, const Vector& rhs,
                  const CgOptions& options) {
  const Index n = op.dim();
  if (rhs.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "cg: rhs length mismatch");
  }
  if (!rhs.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "cg: rhs not finite");
  }
  const Index max_iter = options.max_iter > 0 ? options.max_iter : 10 * n;
  CgResult result;
  result.x = Vector::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return result;
  const double target = options.tol * bnorm;
  const bool precondition = options.inverse_diagonal.size() > 0;
  if (precondition && options.inverse_diagonal.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "cg: preconditioner length mismatch");
  }
  auto apply_m = [&](const Vector& r) -> Vector {
    if (!precondition) return r;
    return options.inverse_diagonal.cwiseProduct(r);
  };

  Vector r = rhs;
  Vector z = apply_m(r);
  Vector p = z;
  Vector ap;
  double rz = r.dot(z);
  Index it = 0;
  while (it < max_iter) {
    ++it;
    op.apply(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      if (r.norm() <= target) break;
      throw Error(ErrorCode::kBreakdownNegativeCurvature, kModule,
                  "cg: p^T A p <= 0, operator not positive definite", it);
    }
    const double step = rz / pap;
    result.x += step * p;
    r -= step * ap;
    if (r.norm() <= target) {
      // Guard against drift of the recursive residual.
      Vector ax;
      op.apply(result.x, ax);
      r = rhs - ax;
      if (r.norm() <= target) break;
      z = apply_m(r);
      rz = r.dot(z);
      p = z;
      continue;
    }
    z = apply_m(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  result.iterations = it;
  Vector ax;
  op.apply(result.x, ax);
  result.relative_residual = (rhs - ax).norm() / bnorm;
  if (result.relative_residual > options.tol) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", result.relative_residual);
    throw Error(ErrorCode::kNonConvergence, kModule,
                std::string("cg: iteration cap reached with relative residual ") + buf, it);
  }
  return result;
}

// ---------------------------------------------------------------------------

EigenPairs dense_smallest_eigenpairs(const LinearOperator& op, Index k,
                                     std::span<const Vector> known_null) {
  const Index n = op.dim();
  const DenseMatrix z = orthonormal_basis(known_null, n);
  const Index avail = n - z.cols();
  if (k <= 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "k must be positive");
  }
  if (k >= n || k > avail) {
    throw Error(ErrorCode::kDimensionTooSmall, kModule,
                "requested eigenpairs exceed available dimension");
  }
  DenseMatrix a = densify(op);
  a = 0.5 * (a + a.transpose());

  DenseMatrix basis;
  if (z.cols() > 0) {
    Eigen::HouseholderQR<DenseMatrix> qr(z);
    const DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(n, n);
    basis = q.rightCols(avail);
  } else {
    basis = DenseMatrix::Identity(n, n);
  }
  const DenseMatrix compressed = basis.transpose() * a * basis;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(compressed);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigensolverFailure, kModule,
                "dense eigendecomposition failed");
  }
  EigenPairs out;
  out.values = es.eigenvalues().head(k);
  out.vectors = basis * es.eigenvectors().leftCols(k);
  for (Index j = 0; j < k; ++j) out.vectors.col(j).normalize();
  out.used_dense = true;
  return out;
}

EigenPairs smallest_eigenpairs(const LinearOperator& op, Index k,
                               std::span<const Vector> known_null,
                               const EigenOptions& options) {
  const Index n = op.dim();
  if (k <= 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "k must be positive");
  }
  const DenseMatrix z = orthonormal_basis(known_null, n);
  const Index avail = n - z.cols();
  if (k >= n || k > avail) {
    throw Error(ErrorCode::kDimensionTooSmall, kModule,
                "requested eigenpairs exceed available dimension");
  }
  if (options.force_dense) {
    if (n > options.dense_limit) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "dense eigensolver requested above dense_limit");
    }
    return dense_smallest_eigenpairs(op, k, known_null);
  }

  const DenseMatrix az = apply_columns(op, z);
  const Index block = std::min(avail, std::max(k + 4, 2 * k));
  const Index max_iter = default_eigen_iters(options, n);

  std::mt19937_64 rng(options.seed);
  DenseMatrix x(n, block);
  for (Index j = 0; j < block; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = uniform_pm1(rng);
  }
  DenseMatrix ax = apply_columns(op, x);
  orthonormalize_pairs(x, ax, z, az, 0);

  DenseMatrix p(n, 0);
  DenseMatrix ap(n, 0);
  Vector theta;
  double norm_est = 0.0;

  // Initial Rayleigh-Ritz on X.
  {
    DenseMatrix h = x.transpose() * ax;
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
    x = x * es.eigenvectors();
    ax = ax * es.eigenvectors();
    theta = es.eigenvalues();
    norm_est = theta.cwiseAbs().maxCoeff();
  }

  EigenPairs out;
  for (Index iter = 1; iter <= max_iter; ++iter) {
    const Index m = x.cols();
    DenseMatrix r = ax - x * theta.asDiagonal();
    const double threshold =
        options.tol * std::max(norm_est, std::numeric_limits<double>::min());
    bool all_converged = true;
    std::vector<Index> active;
    for (Index j = 0; j < m; ++j) {
      const double res = r.col(j).norm();
      if (res > threshold) {
        active.push_back(j);
        if (j < k) all_converged = false;
      }
    }
    if (all_converged && m >= k) {
      out.values = theta.head(k);
      out.vectors = x.leftCols(k);
      for (Index j = 0; j < k; ++j) out.vectors.col(j).normalize();
      out.iterations = iter - 1;
      return out;
    }

    DenseMatrix w(n, static_cast<Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) {
      w.col(static_cast<Index>(a)) = r.col(active[a]).normalized();
    }
    // Project W out of the deflation space before applying the operator.
    if (z.cols() > 0) {
      for (int pass = 0; pass < 2; ++pass) w -= z * (z.transpose() * w);
    }
    DenseMatrix aw = apply_columns(op, w);

    // Every 20 iterations refresh the images of X and P to limit drift.
    if (iter % 20 == 0) {
      ax = apply_columns(op, x);
      if (p.cols() > 0) ap = apply_columns(op, p);
    }

    const Index mx = m;
    DenseMatrix s(n, mx + w.cols() + p.cols());
    DenseMatrix as(n, s.cols());
    s << x, w, p;
    as << ax, aw, ap;
    orthonormalize_pairs(s, as, z, az, mx);
    // X occupies the first mx columns (already orthonormal).
    DenseMatrix h = s.transpose() * as;
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::kEigensolverFailure, kModule,
                  "Rayleigh-Ritz eigendecomposition failed");
    }
    norm_est = std::max(norm_est, es.eigenvalues().cwiseAbs().maxCoeff());
    const Index keep = std::min(mx, s.cols());
    const DenseMatrix c = es.eigenvectors().leftCols(keep);
    theta = es.eigenvalues().head(keep);

    const Index rest = s.cols() - mx;
    if (rest > 0) {
      p = s.rightCols(rest) * c.bottomRows(rest);
      ap = as.rightCols(rest) * c.bottomRows(rest);
    } else {
      p.resize(n, 0);
      ap.resize(n, 0);
    }
    x = s * c;
    ax = as * c;
    // Once the subspace exhausts the complement, Rayleigh-Ritz is exact.
    if (s.cols() >= avail) {
      ax = apply_columns(op, x);
    }
  }

  if (options.allow_dense_fallback && n <= options.dense_limit) {
    return dense_smallest_eigenpairs(op, k, known_null);
  }
  throw Error(ErrorCode::kNonConvergence, kModule,
              "blocked eigensolver did not converge", max_iter);
}

// ---------------------------------------------------------------------------

LargestEigenpair largest_eigenpair(const LinearOperator& op,
                                   const EigenOptions& options) {
  const Index n = op.dim();
  if (n == 0) {
    throw Error(ErrorCode::kDimensionTooSmall, kModule, "empty operator");
  }
  std::mt19937_64 rng(options.seed);
  Vector start(n);
  for (Index i = 0; i < n; ++i) start[i] = uniform_pm1(rng);
  start.normalize();

  const Index max_steps = std::min<Index>(n, 300);
  const Index max_restarts = std::max<Index>(1, default_eigen_iters(options, n) / 50);
  LargestEigenpair out;
  Index total = 0;
  for (Index restart = 0; restart < max_restarts; ++restart) {
    DenseMatrix q(n, max_steps + 1);
    Vector alpha(max_steps);
    Vector beta(max_steps);
    q.col(0) = start;
    Vector w;
    Index steps = 0;
    bool invariant = false;
    double theta = 0.0;
    Vector ritz;
    for (Index j = 0; j < max_steps; ++j) {
      const Vector qj = q.col(j);
      op.apply(qj, w);
      ++total;
      alpha[j] = qj.dot(w);
      for (int pass = 0; pass < 2; ++pass) {
        w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
      }
      beta[j] = w.norm();
      steps = j + 1;
      const bool check = (steps % 5 == 0) || steps == max_steps ||
                         beta[j] <= 1e-14 * std::abs(alpha[j]) || beta[j] == 0.0;
      if (check) {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es;
        const Vector d = alpha.head(steps);
        const Vector e = beta.head(std::max<Index>(steps - 1, 0));
        es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        theta = es.eigenvalues()[steps - 1];
        const Vector s = es.eigenvectors().col(steps - 1);
        const double residual = std::abs(beta[j] * s[steps - 1]);
        ritz = q.leftCols(steps) * s;
        if (beta[j] <= 1e-14 * std::max(1.0, std::abs(alpha[j]))) {
          invariant = true;
        }
        if (invariant || residual <= options.tol * std::max(std::abs(theta), 1e-300)) {
          out.value = theta;
          out.vector = ritz.normalized();
          out.iterations = total;
          return out;
        }
      }
      if (invariant) break;
      q.col(j + 1) = w / beta[j];
    }
    start = ritz.normalized();
  }
  throw Error(ErrorCode::kNonConvergence, kModule,
              "Lanczos did not converge for the largest eigenvalue", total);
}

double largest_eigenvalue(const LinearOperator& op, const EigenOptions& options) {
  return largest_eigenpair(op, options).value;
}

// ---------------------------------------------------------------------------

double gram_rcond(const DenseMatrix& m) {
  const DenseMatrix g = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(g, Eigen::EigenvaluesOnly);
  const double hi = es.eigenvalues().maxCoeff();
  const double lo = es.eigenvalues().minCoeff();
  if (!(hi > 0.0)) return 0.0;
  return std::max(lo, 0.0) / hi;
}

DenseMatrix left_pseudo_inverse(const DenseMatrix& m) {
  if (m.rows() > kDenseSmallLimit || m.cols() > kDenseSmallLimit ||
      m.cols() == 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "left_pseudo_inverse expects a small dense matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "non-finite entries");
  }
  if (m.rows() < m.cols()) {
    throw Error(ErrorCode::kRankDeficient, kModule,
                "more columns than rows: no left inverse");
  }
  const DenseMatrix g = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(g);
  const Vector& lambda = es.eigenvalues();
  const double hi = lambda.maxCoeff();
  const double lo = lambda.minCoeff();
  if (!(hi > 0.0) || lo / hi < kPseudoInverseRcond) {
    throw Error(ErrorCode::kRankDeficient, kModule,
                "M^T M reciprocal condition number below threshold "
                "(collinear sample points)");
  }
  const DenseMatrix& v = es.eigenvectors();
  return v * lambda.cwiseInverse().asDiagonal() * v.transpose() *
         m.transpose();
}

Vector right_pseudo_inverse_apply(const SparseMatrix& g, const Vector& b) {
  if (b.size() != g.rows()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "right_pseudo_inverse_apply: rhs length mismatch");
  }
  auto gs = std::make_shared<const SparseMatrix>(g);
  LinearOperator ggt(g.rows(), [gs](const Vector& t, Vector& out) {
    Vector u;
    gs->multiply_transpose(t, u);
    gs->multiply(u, out);
  });
  CgResult solved;
  try {
    solved = cg_solve(ggt, b, {.tol = 1e-13, .max_iter = 20 * g.rows() + 100, .inverse_diagonal = {}});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonConvergence ||
        e.code() == ErrorCode::kBreakdownNegativeCurvature) {
      throw Error(ErrorCode::kRankDeficient, kModule,
                  "G G^T is singular: G is not full row rank");
    }
    throw;
  }
  Vector u;
  g.multiply_transpose(solved.x, u);
  const Vector gu = g * u;
  if ((gu - b).norm() > 1e-8 * std::max(b.norm(), 1e-300)) {
    throw Error(ErrorCode::kRankDeficient, kModule,
                "G u = b not satisfied: G is not full row rank");
  }
  return u;
}

}  // namespace gglr
