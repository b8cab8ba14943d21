#pragma once

#include <memory>
#include <vector>

#include "gglr/graph.hpp"
#include "gglr/sparse.hpp"
#include "gglr/types.hpp"

namespace gglr {

/// True iff the first coordinate (in index order) where p_j and p_i differ
/// is larger in p_j. Identical points give false. Comparisons are exact.
bool acyclic_condition(const Vector& p_i, const Vector& p_j);

struct DagEdge {
  Index target;
  double weight;  // w^d: product of base weights along the discovery path
};

/// Directed out-edges of every node plus the per-node weighted least-squares
/// maps that turn signal differences into manifold gradients.
///
/// Gradient slots are numbered node-major (slot s of V-bar, coordinate k at
/// s * K + k); the reorder permutation maps them to coordinate-major order
/// k * |V-bar| + s.
class DagGradientPlan {
 public:
  /// `out_edges[i]` lists the targets of node i, nearest first. Nodes with
  /// exactly `k_plus` out-edges are candidates for V-bar. When
  /// `prune_collinear` is set, candidates whose W C is rank deficient are
  /// excluded and recorded; otherwise kRankDeficient is thrown for them.
  static DagGradientPlan from_out_edges(DenseMatrix coords,
                                        std::vector<std::vector<DagEdge>> out_edges,
                                        Index k_plus, bool prune_collinear = true);

  Index node_count() const noexcept { return coords_.rows(); }
  Index dim() const noexcept { return coords_.cols(); }
  Index k_plus() const noexcept { return k_plus_; }
  const DenseMatrix& coords() const noexcept { return coords_; }

  const std::vector<DagEdge>& out_edges(Index i) const;

  // V-bar, ascending node ids.
  const std::vector<Index>& computable() const noexcept { return computable_; }
  Index computable_count() const noexcept {
    return static_cast<Index>(computable_.size());
  }
  // Position of node i in V-bar, or -1.
  Index slot_of(Index i) const;
  bool is_computable(Index i) const { return slot_of(i) >= 0; }

  // C^i (K+ x K): row m is p_i - p_{target m}.
  DenseMatrix coordinate_matrix(Index i) const;
  // Diagonal of W^i.
  Vector dag_weights(Index i) const;
  // (W^i C^i)^+ W^i, K x K+; i must be computable.
  const DenseMatrix& gradient_map(Index i) const;

  // perm[node-major slot] = coordinate-major slot.
  std::vector<Index> reorder_permutation() const;
  SparseMatrix reorder_matrix() const;

  // Nodes with fewer than K+ reachable targets.
  const std::vector<Index>& excluded_nodes() const noexcept { return excluded_; }
  // Nodes with K+ targets whose coordinate matrix is rank deficient.
  const std::vector<Index>& collinear_nodes() const noexcept { return collinear_; }

 private:
  DenseMatrix coords_;
  Index k_plus_ = 0;
  std::vector<std::vector<DagEdge>> out_;
  std::vector<Index> computable_;
  std::vector<Index> slot_;
  std::vector<DenseMatrix> maps_;  // indexed by slot
  std::vector<Index> excluded_;
  std::vector<Index> collinear_;
};

/// Runs the DAG construction: for every node, repeatedly takes the closest
/// candidate (latent distance, ties to the smaller id) from a list seeded
/// with the acyclic 1-hop neighbors and grown with the acyclic neighbors of
/// each selected node, until `k_plus` targets are found. `k_plus` = 0 means K.
DagGradientPlan build_dag(const Graph& g, Index k_plus = 0,
                          bool prune_collinear = true);

/// Topological order of the plan's directed edges (Kahn). Throws
/// kInvalidArgument if a cycle exists.
std::vector<Index> topological_order(const DagGradientPlan& plan);

/// F^i x: entry m is x_i - x_{target m}.
Vector gradient_operator_apply(const DagGradientPlan& plan, Index i,
                               const Vector& x);

/// alpha^i = (W^i C^i)^+ W^i F^i x.
Vector manifold_gradient(const DagGradientPlan& plan, Index i, const Vector& x);

struct GradientField {
  Vector alpha;               // coordinate-major, length |V-bar| * K
  Index dim = 0;              // K
  std::vector<Index> nodes;   // V-bar

  Index size() const noexcept { return static_cast<Index>(nodes.size()); }
  Vector node_gradient(Index slot) const;
  double norm(Index slot) const { return node_gradient(slot).norm(); }
};

GradientField gradient_field(const DagGradientPlan& plan, const Vector& x);

/// The stacked gradient operator as sparse matrices: `g` is node-major
/// (|V-bar| K x N) and `rg` = R g is coordinate-major.
struct GradientOperator {
  SparseMatrix g;
  SparseMatrix rg;
  SparseMatrix rg_t;  // transpose of rg, one row per node
  Index slots = 0;  // |V-bar|
  Index dim = 0;    // K
  Index nodes = 0;  // N

  static std::shared_ptr<const GradientOperator> build(const DagGradientPlan& plan);
};

}  // namespace gglr
