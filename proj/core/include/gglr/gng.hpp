#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "gglr/dag.hpp"
#include "gglr/graph.hpp"
#include "gglr/linear_operator.hpp"
#include "gglr/sparse.hpp"

namespace gglr {

enum class WeightMode { kPlanarFixed, kSignalDependent };

/// Graph over the computable nodes V-bar. Edge endpoints are slot indices
/// (positions in V-bar), not node ids.
struct GradientGraph {
  struct SlotEdge {
    Index a;
    Index b;
    double weight;
  };
  std::vector<Index> nodes;
  std::vector<SlotEdge> edges;

  Index size() const noexcept { return static_cast<Index>(nodes.size()); }
  SparseMatrix laplacian() const;
};

/// Connects computable nodes joined by a base-graph edge. Planar-fixed mode
/// copies the base weight; signal-dependent mode uses
/// exp(-|alpha^i - alpha^j|^2 / sigma_alpha^2). Nodes in `removed` keep
/// their slot but lose all their edges.
GradientGraph gradient_graph(const DagGradientPlan& plan,
                             const GradientField& field, WeightMode mode,
                             double sigma_alpha, const Graph& base,
                             std::span<const Index> removed = {});

/// Matrix-free G^T R^T Lbar^o R G, where Lbar^o repeats the gradient-graph
/// Laplacian once per coordinate.
class GnlOperator {
 public:
  GnlOperator(std::shared_ptr<const GradientOperator> gradient,
              SparseMatrix gradient_laplacian);

  Index dim() const noexcept { return gradient_->nodes; }
  Index coord_dim() const noexcept { return gradient_->dim; }
  const GradientOperator& gradient() const noexcept { return *gradient_; }
  const SparseMatrix& gradient_laplacian() const noexcept { return lbar_; }

  void apply(const Vector& x, Vector& y) const;
  Vector operator()(const Vector& x) const;
  // x^T L x computed as (RGx)^T Lbar^o (RGx).
  double value(const Vector& x) const;
  // Diagonal entries of the densified operator.
  Vector diagonal() const;
  LinearOperator as_operator() const;

 private:
  void apply_lbar(const Vector& a, Vector& out) const;

  std::shared_ptr<const GradientOperator> gradient_;
  SparseMatrix lbar_;
};

Vector gng_apply(const GnlOperator& op, const Vector& x);
double gglr_value(const GnlOperator& op, const Vector& x);
/// Sum over gradient-graph edges of w_ij |alpha^i - alpha^j|^2.
double gglr_edge_sum(const GradientGraph& gg, const GradientField& field);

/// The two null vectors of a 1D operator: the constant vector and G^+ 1.
std::pair<Vector, Vector> zero_eigenvectors_1d(const GnlOperator& op);

/// Nodes with |alpha^i| > multiplier * mean_j |alpha^j|.
std::vector<Index> detect_false_gradients(const GradientField& field,
                                          double multiplier = 2.0);

}  // namespace gglr
