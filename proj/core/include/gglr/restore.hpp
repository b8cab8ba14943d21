#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gglr/dag.hpp"
#include "gglr/gng.hpp"
#include "gglr/graph.hpp"
#include "gglr/linear_operator.hpp"
#include "gglr/sparse.hpp"
#include "gglr/tradeoff.hpp"

namespace gglr {

/// Linear observation y = H x: identity (denoising), 0-1 sampling
/// (interpolation) or a blur kernel (deblurring).
class ObservationMap {
 public:
  enum class Kind { kIdentity, kSampling, kBlur };

  ObservationMap() = default;
  static ObservationMap identity(Index n);
  // Observed node ids; must be non-empty and within [0, n).
  static ObservationMap sampling(Index n, std::vector<Index> observed);
  // M x N kernel. Full row rank is verified when N <= 2000.
  static ObservationMap blur(SparseMatrix kernel);

  Kind kind() const noexcept { return kind_; }
  bool is_identity() const noexcept { return kind_ == Kind::kIdentity; }
  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  const std::vector<Index>& observed() const noexcept { return observed_; }
  const SparseMatrix& kernel() const noexcept { return kernel_; }

  Vector apply(const Vector& x) const;
  Vector apply_transpose(const Vector& y) const;
  // H^T H x.
  Vector gram_apply(const Vector& x) const;
  // diag(H^T H).
  Vector gram_diagonal() const;
  // H^+ H v: orthogonal projection onto the row space of H.
  Vector row_space_project(const Vector& v) const;

 private:
  Kind kind_ = Kind::kIdentity;
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> observed_;
  SparseMatrix kernel_;
};

/// Which observation each inner solve is anchored to. kObservation keeps y
/// fixed; kPreviousEstimate re-filters the previous estimate (first solve
/// uses y, later ones H x^{t-1}).
enum class Anchor { kObservation, kPreviousEstimate };

struct RestoreProblem {
  Vector y;
  std::optional<ObservationMap> h;   // unset means identity
  std::optional<double> mu;          // unset means automatic (denoising only)
  double sigma_alpha = 1.5;
  WeightMode mode = WeightMode::kSignalDependent;
  double false_gradient_multiplier = 2.0;  // 0 disables removal
  Index warmup_iters = 5;
  Index max_iters = 100;
  double conv_tol = 1e-6;
  Index k_plus = 0;                  // 0 means K
  Anchor anchor = Anchor::kObservation;
  // First solve with the base weights (a smooth pilot estimate) rather
  // than weights taken from y. Always on when H is not the identity.
  bool pilot = true;
  std::optional<double> sigma_z;     // required for automatic mu
  double sigma_x = 1.0;              // SDGLR signal kernel width
  double sigma_f = kNoFeatureTerm;   // SDGLR feature kernel width
  double cg_tol = 1e-9;
  Index cg_max_iter = 0;             // 0 means 20 * N
};

struct CgStat {
  Index iterations = 0;
  double relative_residual = 0.0;
};

struct RestoreReport {
  Vector x_star;
  Index iterations = 0;
  // Entry 0 is the objective at the initial estimate; entry t is
  // |y - H x^t|^2 + mu x^t' L x^t with the operator used to compute x^t.
  std::vector<double> objective_trace;
  std::vector<Index> removed_false_gradients;
  double mu_used = 0.0;
  bool mu_automatic = false;
  std::vector<CgStat> cg_stats;
  bool converged = false;
  std::vector<std::string> warnings;
  std::vector<Index> excluded_nodes;
  // Regularizer at x_star with weights recomputed from x_star.
  double final_regularizer = 0.0;
};

/// Solves (H^T H + mu L) x = H^T y by CG. CG breakdown is reported as
/// kSingularPhi. `reg_diagonal`, when given, is diag(L) and enables Jacobi
/// preconditioning.
Vector solve_quadratic(const ObservationMap& h, const LinearOperator& reg,
                       double mu, const Vector& y, double cg_tol = 1e-9,
                       Index cg_max_iter = 0, CgStat* stat = nullptr,
                       const Vector* reg_diagonal = nullptr);
Vector solve_quadratic(const ObservationMap& h, const GnlOperator& op,
                       double mu, const Vector& y);

inline constexpr Index kSolvabilityCheckLimit = 512;

/// Verifies that the projections of the regularizer's null vectors onto the
/// row space of H are linearly independent. Dense, so only run when
/// N <= kSolvabilityCheckLimit; larger problems get a warning appended.
/// Throws kSingularPhi on failure.
void check_solvability(const ObservationMap& h, const LinearOperator& reg,
                       std::vector<std::string>* warnings);

/// Iterative GGLR restoration on the DAG built from `g`.
RestoreReport restore(const RestoreProblem& problem, const Graph& g);
RestoreReport restore(const RestoreProblem& problem, const Graph& g,
                      const DagGradientPlan& plan);

/// Iterative signal-dependent GLR (bilateral weights) baseline.
RestoreReport restore_sdglr(const RestoreProblem& problem, const Graph& g);

struct GridShape {
  Index height = 0;
  Index width = 0;
};

/// Checks that `g` is a 4-connected height x width lattice whose
/// coordinates are the integer (row, col) positions. Throws kNotAGrid.
GridShape detect_grid(const Graph& g);

/// Per-axis 1D plans of a grid: the horizontal plan links (r, c) -> (r, c+1),
/// the vertical one (r, c) -> (r+1, c). `node_mask`, when given, limits the
/// computable nodes of both plans to the masked ones.
struct SeparableGrid {
  GridShape shape;
  DagGradientPlan horizontal;
  DagGradientPlan vertical;
};
SeparableGrid build_separable_grid(const Graph& g,
                                   const std::vector<char>* node_mask = nullptr);

/// GGLR restoration with the sum of two 1D operators, one per grid axis.
RestoreReport separable_grid_restore(const RestoreProblem& problem,
                                     const Graph& g,
                                     const std::vector<char>* node_mask = nullptr);

}  // namespace gglr
