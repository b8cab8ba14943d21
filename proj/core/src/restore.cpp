#include "gglr/restore.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "gglr/error.hpp"
#include "gglr/solvers.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "restore";

// ---------------------------------------------------------------------------
// Regularizer models shared by the restoration loops.

class Regularizer {
 public:
  virtual ~Regularizer() = default;
  // Rebuilds the operator from estimate x (or the base weights).
  virtual void refresh(const Vector& x, bool base_weights) = 0;
  virtual const LinearOperator& op() const = 0;
  virtual const Vector& diagonal() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual std::vector<Index> remove_false_gradients(const Vector&, double) {
    return {};
  }
  virtual std::vector<Vector> null_vectors() const = 0;
};

class GglrRegularizer final : public Regularizer {
 public:
  GglrRegularizer(std::vector<const DagGradientPlan*> plans, const Graph& base,
                  WeightMode mode, double sigma_alpha)
      : plans_(std::move(plans)), base_(base), mode_(mode), sigma_(sigma_alpha) {
    for (const auto* p : plans_) {
      grads_.push_back(GradientOperator::build(*p));
      removed_.emplace_back();
    }
  }

  void refresh(const Vector& x, bool base_weights) override {
    ops_.clear();
    for (std::size_t k = 0; k < plans_.size(); ++k) {
      const GradientField field = field_of(k, x);
      const GradientGraph gg = gradient_graph(
          *plans_[k], field, base_weights ? WeightMode::kPlanarFixed : mode_,
          sigma_, base_, removed_[k]);
      ops_.emplace_back(grads_[k], gg.laplacian());
    }
    diag_ = Vector::Zero(base_.node_count());
    for (const auto& o : ops_) diag_ += o.diagonal();
    if (ops_.size() == 1) {
      op_ = ops_.front().as_operator();
    } else {
      auto shared = std::make_shared<const std::vector<GnlOperator>>(ops_);
      op_ = LinearOperator(base_.node_count(), [shared](const Vector& in, Vector& out) {
        out = Vector::Zero(in.size());
        Vector part;
        for (const auto& o : *shared) {
          o.apply(in, part);
          out += part;
        }
      });
    }
  }

  const LinearOperator& op() const override { return op_; }
  const Vector& diagonal() const override { return diag_; }

  double value(const Vector& x) const override {
    double v = 0.0;
    for (const auto& o : ops_) v += o.value(x);
    return v;
  }

  std::vector<Index> remove_false_gradients(const Vector& x,
                                            double multiplier) override {
    std::set<Index> all;
    for (std::size_t k = 0; k < plans_.size(); ++k) {
      const auto found = detect_false_gradients(field_of(k, x), multiplier);
      removed_[k].insert(removed_[k].end(), found.begin(), found.end());
      all.insert(found.begin(), found.end());
    }
    return {all.begin(), all.end()};
  }

  std::vector<Vector> null_vectors() const override {
    std::vector<Vector> out{Vector::Ones(base_.node_count())};
    if (base_.has_coords()) {
      const DenseMatrix& p = base_.coords();
      for (Index k = 0; k < p.cols(); ++k) out.emplace_back(p.col(k));
      // Per-axis operators on a grid also annihilate the bilinear term.
      if (plans_.size() == 2 && p.cols() == 2) {
        out.emplace_back(p.col(0).cwiseProduct(p.col(1)));
      }
    }
    return out;
  }

 private:
  GradientField field_of(std::size_t k, const Vector& x) const {
    GradientField field;
    field.dim = plans_[k]->dim();
    field.nodes = plans_[k]->computable();
    grads_[k]->rg.multiply(x, field.alpha);
    return field;
  }

  std::vector<const DagGradientPlan*> plans_;
  const Graph& base_;
  WeightMode mode_;
  double sigma_;
  std::vector<std::shared_ptr<const GradientOperator>> grads_;
  std::vector<std::vector<Index>> removed_;
  std::vector<GnlOperator> ops_;
  LinearOperator op_;
  Vector diag_;
};

class SdglrRegularizer final : public Regularizer {
 public:
  SdglrRegularizer(const Graph& g, double sigma_f, double sigma_x)
      : g_(g), sigma_f_(sigma_f), sigma_x_(sigma_x) {}

  void refresh(const Vector& x, bool base_weights) override {
    current_ = std::make_shared<const Graph>(
        base_weights ? g_ : sdglr_weights(g_, x, sigma_f_, sigma_x_));
    SparseMatrix l = laplacian(*current_);
    diag_ = l.diagonal_values();
    op_ = LinearOperator::from_matrix(std::move(l));
  }
  const LinearOperator& op() const override { return op_; }
  const Vector& diagonal() const override { return diag_; }
  double value(const Vector& x) const override { return glr(*current_, x); }
  std::vector<Vector> null_vectors() const override {
    return {Vector::Ones(g_.node_count())};
  }

 private:
  const Graph& g_;
  double sigma_f_;
  double sigma_x_;
  std::shared_ptr<const Graph> current_;
  LinearOperator op_;
  Vector diag_;
};

// ---------------------------------------------------------------------------

RestoreReport run_loop(const RestoreProblem& problem, Index n,
                       Regularizer& reg) {
  const ObservationMap h = problem.h ? *problem.h : ObservationMap::identity(n);
  if (h.cols() != n) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "observation map width does not match the graph");
  }
  if (problem.y.size() != h.rows()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "observation length does not match the observation map");
  }
  if (!problem.y.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "observation not finite");
  }
  if (problem.mu && !(*problem.mu >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "mu must be non-negative");
  }
  if (problem.max_iters <= 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "max_iters must be positive");
  }

  RestoreReport report;
  Vector x = h.apply_transpose(problem.y);
  // Lifted samples carry no gradient information yet, and weights taken
  // from a noisy y are close to zero, so by default the first operator uses
  // the base weights.
  const bool pilot = problem.pilot || !h.is_identity();
  reg.refresh(x, pilot);

  double mu = 0.0;
  if (problem.mu) {
    mu = *problem.mu;
  } else {
    if (!h.is_identity()) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "automatic mu is only defined for denoising; give mu explicitly");
    }
    if (!problem.sigma_z || !(*problem.sigma_z >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "automatic mu needs the noise level sigma_z");
    }
    // The spectrum is fitted on the base-weight operator: weights taken
    // from the noisy observation are unreliable and often disconnect the
    // gradient graph.
    const auto nulls = reg.null_vectors();
    if (!pilot) reg.refresh(x, true);
    const SpectralFit fit = fit_spectrum(reg.op(), nulls, problem.y, *problem.sigma_z);
    if (!pilot) reg.refresh(x, false);
    const MuChoice choice = minimize_mu(fit);
    mu = choice.mu;
    report.mu_automatic = true;
    if (!choice.warning.empty()) report.warnings.push_back(choice.warning);
  }
  report.mu_used = mu;

  if (!h.is_identity()) check_solvability(h, reg.op(), &report.warnings);

  auto objective = [&](const Vector& v) {
    return (problem.y - h.apply(v)).squaredNorm() + mu * reg.value(v);
  };
  report.objective_trace.push_back(objective(x));

  bool removal_done = !(problem.false_gradient_multiplier > 0.0);
  for (Index t = 1; t <= problem.max_iters; ++t) {
    const Vector target =
        (problem.anchor == Anchor::kPreviousEstimate && t > 1) ? h.apply(x)
                                                               : problem.y;
    CgStat stat;
    Vector next;
    try {
      next = solve_quadratic(h, reg.op(), mu, target, problem.cg_tol,
                             problem.cg_max_iter, &stat, &reg.diagonal());
    } catch (const Error& e) {
      throw Error(e.code(), e.module(),
                  e.message() + " (outer iteration " +
                      std::to_string(t) + ")",
                  t);
    }
    report.cg_stats.push_back(stat);
    report.objective_trace.push_back(objective(next));
    const double change = (next - x).norm() / std::max(x.norm(), 1e-300);
    x = std::move(next);
    report.iterations = t;
    const bool settled = change < problem.conv_tol;

    if (!removal_done && (t >= problem.warmup_iters || settled)) {
      removal_done = true;
      const auto removed =
          reg.remove_false_gradients(x, problem.false_gradient_multiplier);
      if (!removed.empty()) {
        report.removed_false_gradients = removed;
        reg.refresh(x, false);
        continue;
      }
    }
    if (settled) {
      report.converged = true;
      break;
    }
    reg.refresh(x, false);
  }
  reg.refresh(x, false);
  report.final_regularizer = reg.value(x);
  report.x_star = std::move(x);
  return report;
}

void validate_problem(const RestoreProblem& p) {
  if (p.mode == WeightMode::kSignalDependent && !(p.sigma_alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "sigma_alpha must be positive");
  }
  if (p.false_gradient_multiplier < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "false-gradient multiplier must be non-negative");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ObservationMap

ObservationMap ObservationMap::identity(Index n) {
  ObservationMap h;
  h.kind_ = Kind::kIdentity;
  h.rows_ = n;
  h.cols_ = n;
  return h;
}

ObservationMap ObservationMap::sampling(Index n, std::vector<Index> observed) {
  std::sort(observed.begin(), observed.end());
  observed.erase(std::unique(observed.begin(), observed.end()), observed.end());
  if (observed.empty()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "sampling mask is empty");
  }
  if (observed.front() < 0 || observed.back() >= n) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "sampled node out of range");
  }
  ObservationMap h;
  h.kind_ = Kind::kSampling;
  h.rows_ = static_cast<Index>(observed.size());
  h.cols_ = n;
  h.observed_ = std::move(observed);
  return h;
}

ObservationMap ObservationMap::blur(SparseMatrix kernel) {
  if (kernel.rows() == 0 || kernel.rows() > kernel.cols()) {
    throw Error(ErrorCode::kRankDeficient, kModule,
                "blur kernel must have 1..N rows");
  }
  if (kernel.cols() <= 2000) {
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(kernel.to_dense());
    qr.setThreshold(1e-10);
    if (qr.rank() < kernel.rows()) {
      throw Error(ErrorCode::kRankDeficient, kModule,
                  "blur kernel is not full row rank");
    }
  }
  ObservationMap h;
  h.kind_ = Kind::kBlur;
  h.rows_ = kernel.rows();
  h.cols_ = kernel.cols();
  h.kernel_ = std::move(kernel);
  return h;
}

Vector ObservationMap::apply(const Vector& x) const {
  if (x.size() != cols_) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "H x: length mismatch");
  }
  switch (kind_) {
    case Kind::kIdentity:
      return x;
    case Kind::kSampling: {
      Vector y(rows_);
      for (Index r = 0; r < rows_; ++r) y[r] = x[observed_[static_cast<std::size_t>(r)]];
      return y;
    }
    case Kind::kBlur:
      return kernel_ * x;
  }
  return x;
}

Vector ObservationMap::apply_transpose(const Vector& y) const {
  if (y.size() != rows_) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "H^T y: length mismatch");
  }
  switch (kind_) {
    case Kind::kIdentity:
      return y;
    case Kind::kSampling: {
      Vector x = Vector::Zero(cols_);
      for (Index r = 0; r < rows_; ++r) x[observed_[static_cast<std::size_t>(r)]] = y[r];
      return x;
    }
    case Kind::kBlur: {
      Vector x;
      kernel_.multiply_transpose(y, x);
      return x;
    }
  }
  return y;
}

Vector ObservationMap::gram_apply(const Vector& x) const {
  return apply_transpose(apply(x));
}

Vector ObservationMap::gram_diagonal() const {
  switch (kind_) {
    case Kind::kIdentity:
      return Vector::Ones(cols_);
    case Kind::kSampling: {
      Vector d = Vector::Zero(cols_);
      for (Index i : observed_) d[i] = 1.0;
      return d;
    }
    case Kind::kBlur: {
      Vector d = Vector::Zero(cols_);
      for (Index r = 0; r < kernel_.rows(); ++r) {
        const auto idx = kernel_.row_indices(r);
        const auto val = kernel_.row_values(r);
        for (std::size_t k = 0; k < idx.size(); ++k) d[idx[k]] += val[k] * val[k];
      }
      return d;
    }
  }
  return Vector::Ones(cols_);
}

Vector ObservationMap::row_space_project(const Vector& v) const {
  switch (kind_) {
    case Kind::kIdentity:
      return v;
    case Kind::kSampling:
      return gram_apply(v);
    case Kind::kBlur:
      return right_pseudo_inverse_apply(kernel_, kernel_ * v);
  }
  return v;
}

// ---------------------------------------------------------------------------

Vector solve_quadratic(const ObservationMap& h, const LinearOperator& reg,
                       double mu, const Vector& y, double cg_tol,
                       Index cg_max_iter, CgStat* stat,
                       const Vector* reg_diagonal) {
  const Index n = h.cols();
  if (reg.dim() != n) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "regularizer dimension does not match H");
  }
  if (!(mu >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "mu must be non-negative");
  }
  const Vector rhs = h.apply_transpose(y);
  const auto hp = std::make_shared<const ObservationMap>(h);
  LinearOperator phi(n, [hp, reg, mu](const Vector& x, Vector& out) {
    reg.apply(x, out);
    out *= mu;
    out += hp->gram_apply(x);
  });
  CgOptions opts;
  opts.tol = cg_tol;
  opts.max_iter = cg_max_iter > 0 ? cg_max_iter : 20 * n;
  if (reg_diagonal) {
    if (reg_diagonal->size() != n) {
      throw Error(ErrorCode::kLengthMismatch, kModule,
                  "regularizer diagonal has the wrong length");
    }
    const Vector d = h.gram_diagonal() + mu * *reg_diagonal;
    opts.inverse_diagonal = d.unaryExpr([](double v) { return v > 0.0 ? 1.0 / v : 1.0; });
  }
  CgResult res;
  try {
    res = cg_solve(phi, rhs, opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBreakdownNegativeCurvature) {
      throw Error(ErrorCode::kSingularPhi, kModule,
                  "H^T H + mu L is singular: the observations do not pin down "
                  "the regularizer's null space",
                  e.index());
    }
    throw;
  }
  if (stat) {
    stat->iterations = res.iterations;
    stat->relative_residual = res.relative_residual;
  }
  return res.x;
}

Vector solve_quadratic(const ObservationMap& h, const GnlOperator& op,
                       double mu, const Vector& y) {
  return solve_quadratic(h, op.as_operator(), mu, y);
}

void check_solvability(const ObservationMap& h, const LinearOperator& reg,
                       std::vector<std::string>* warnings) {
  const Index n = reg.dim();
  if (h.is_identity()) return;
  if (n > kSolvabilityCheckLimit) {
    if (warnings) {
      warnings->push_back("solvability of H^T H + mu L not verified for N = " +
                          std::to_string(n) + " (dense check limited to " +
                          std::to_string(kSolvabilityCheckLimit) + ")");
    }
    return;
  }
  DenseMatrix a = densify(reg);
  a = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigensolverFailure, kModule,
                "dense eigendecomposition failed");
  }
  const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  std::vector<Index> null_idx;
  for (Index i = 0; i < n; ++i) {
    if (es.eigenvalues()[i] <= 1e-9 * top) null_idx.push_back(i);
  }
  if (null_idx.empty()) return;
  DenseMatrix proj(n, static_cast<Index>(null_idx.size()));
  for (std::size_t k = 0; k < null_idx.size(); ++k) {
    proj.col(static_cast<Index>(k)) =
        h.row_space_project(es.eigenvectors().col(null_idx[k]));
  }
  Eigen::JacobiSVD<DenseMatrix> svd(proj);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || !(s[0] > 0.0) || s[s.size() - 1] < 1e-8 * s[0]) {
    throw Error(ErrorCode::kSingularPhi, kModule,
                "projections of the regularizer null space onto the row space "
                "of H are linearly dependent");
  }
}

// ---------------------------------------------------------------------------

RestoreReport restore(const RestoreProblem& problem, const Graph& g) {
  const DagGradientPlan plan = build_dag(g, problem.k_plus);
  return restore(problem, g, plan);
}

RestoreReport restore(const RestoreProblem& problem, const Graph& g,
                      const DagGradientPlan& plan) {
  validate_problem(problem);
  if (plan.node_count() != g.node_count()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "plan does not match the graph");
  }
  GglrRegularizer reg({&plan}, g, problem.mode, problem.sigma_alpha);
  RestoreReport report = run_loop(problem, g.node_count(), reg);
  report.excluded_nodes = plan.excluded_nodes();
  report.excluded_nodes.insert(report.excluded_nodes.end(),
                               plan.collinear_nodes().begin(),
                               plan.collinear_nodes().end());
  std::sort(report.excluded_nodes.begin(), report.excluded_nodes.end());
  return report;
}

RestoreReport restore_sdglr(const RestoreProblem& problem, const Graph& g) {
  if (!(problem.sigma_x > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "sigma_x must be positive");
  }
  RestoreProblem p = problem;
  p.false_gradient_multiplier = 0.0;
  SdglrRegularizer reg(g, problem.sigma_f, problem.sigma_x);
  return run_loop(p, g.node_count(), reg);
}

GridShape detect_grid(const Graph& g) {
  if (!g.has_coords() || g.coord_dim() != 2) {
    throw Error(ErrorCode::kNotAGrid, kModule,
                "grid detection needs 2D (row, col) coordinates");
  }
  const DenseMatrix& p = g.coords();
  const Index n = g.node_count();
  if (n < 4) throw Error(ErrorCode::kNotAGrid, kModule, "too few nodes");
  GridShape shape;
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < 2; ++k) {
      const double v = p(i, k);
      if (v < 0.0 || v != std::floor(v)) {
        throw Error(ErrorCode::kNotAGrid, kModule,
                    "coordinates are not non-negative integers", i);
      }
    }
    shape.height = std::max(shape.height, static_cast<Index>(p(i, 0)) + 1);
    shape.width = std::max(shape.width, static_cast<Index>(p(i, 1)) + 1);
  }
  if (shape.height < 2 || shape.width < 2 || shape.height * shape.width != n) {
    throw Error(ErrorCode::kNotAGrid, kModule, "coordinates do not tile a rectangle");
  }
  std::vector<Index> at(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    const auto cell = static_cast<std::size_t>(
        static_cast<Index>(p(i, 0)) * shape.width + static_cast<Index>(p(i, 1)));
    if (at[cell] >= 0) {
      throw Error(ErrorCode::kNotAGrid, kModule, "two nodes share a cell", i);
    }
    at[cell] = i;
  }
  const Index expected = shape.height * (shape.width - 1) +
                         (shape.height - 1) * shape.width;
  if (g.edge_count() != expected) {
    throw Error(ErrorCode::kNotAGrid, kModule, "edge count is not 4-connected");
  }
  for (const auto& e : g.edges()) {
    const double dr = std::abs(p(e.u, 0) - p(e.v, 0));
    const double dc = std::abs(p(e.u, 1) - p(e.v, 1));
    if (dr + dc != 1.0) {
      throw Error(ErrorCode::kNotAGrid, kModule, "edge joins non-adjacent cells");
    }
  }
  return shape;
}

SeparableGrid build_separable_grid(const Graph& g,
                                   const std::vector<char>* node_mask) {
  const GridShape shape = detect_grid(g);
  const Index n = g.node_count();
  if (node_mask && static_cast<Index>(node_mask->size()) != n) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "node mask length mismatch");
  }
  const DenseMatrix& p = g.coords();
  std::vector<Index> at(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    at[static_cast<std::size_t>(static_cast<Index>(p(i, 0)) * shape.width +
                                static_cast<Index>(p(i, 1)))] = i;
  }
  auto node = [&](Index r, Index c) {
    return at[static_cast<std::size_t>(r * shape.width + c)];
  };
  std::vector<std::vector<DagEdge>> horiz(static_cast<std::size_t>(n));
  std::vector<std::vector<DagEdge>> vert(static_cast<std::size_t>(n));
  for (Index r = 0; r < shape.height; ++r) {
    for (Index c = 0; c < shape.width; ++c) {
      const Index i = node(r, c);
      if (node_mask && !(*node_mask)[static_cast<std::size_t>(i)]) continue;
      if (c + 1 < shape.width) {
        const Index j = node(r, c + 1);
        horiz[static_cast<std::size_t>(i)].push_back({j, g.edge(g.find_edge(i, j)).weight});
      }
      if (r + 1 < shape.height) {
        const Index j = node(r + 1, c);
        vert[static_cast<std::size_t>(i)].push_back({j, g.edge(g.find_edge(i, j)).weight});
      }
    }
  }
  DenseMatrix col_coord = p.col(1);
  DenseMatrix row_coord = p.col(0);
  return SeparableGrid{
      shape,
      DagGradientPlan::from_out_edges(std::move(col_coord), std::move(horiz), 1),
      DagGradientPlan::from_out_edges(std::move(row_coord), std::move(vert), 1)};
}

RestoreReport separable_grid_restore(const RestoreProblem& problem,
                                     const Graph& g,
                                     const std::vector<char>* node_mask) {
  validate_problem(problem);
  const SeparableGrid grid = build_separable_grid(g, node_mask);
  GglrRegularizer reg({&grid.horizontal, &grid.vertical}, g, problem.mode,
                      problem.sigma_alpha);
  return run_loop(problem, g.node_count(), reg);
}

}  // namespace gglr
