#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gglr/sparse.hpp"
#include "gglr/types.hpp"

namespace gglr {

struct Edge {
  Index u;
  Index v;
  double weight;
};

/// Undirected weighted graph, optionally carrying latent coordinates (one
/// row per node) and feature vectors. Each edge is stored once with u < v.
class Graph {
 public:
  Graph() = default;
  Graph(Index node_count, std::vector<Edge> edges,
        std::optional<DenseMatrix> coords = std::nullopt,
        std::optional<DenseMatrix> features = std::nullopt);

  Index node_count() const noexcept { return n_; }
  Index edge_count() const noexcept { return static_cast<Index>(edges_.size()); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(Index e) const { return edges_[static_cast<std::size_t>(e)]; }

  bool has_coords() const noexcept { return coords_.has_value(); }
  // Throws kNoCoordinates when absent.
  const DenseMatrix& coords() const;
  Index coord_dim() const noexcept { return coords_ ? coords_->cols() : 0; }

  bool has_features() const noexcept { return features_.has_value(); }
  const DenseMatrix& features() const;

  std::span<const Index> neighbors(Index i) const;
  // Edge ids parallel to neighbors(i).
  std::span<const Index> incident_edges(Index i) const;
  Index degree(Index i) const { return static_cast<Index>(neighbors(i).size()); }
  // Edge id joining u and v, or -1.
  Index find_edge(Index u, Index v) const;

  Graph with_weights(const Vector& weights) const;
  Graph with_coords(DenseMatrix coords) const;
  Graph without_coords() const;

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
  std::optional<DenseMatrix> coords_;
  std::optional<DenseMatrix> features_;
  std::vector<Index> adj_ptr_{0};
  std::vector<Index> adj_node_;
  std::vector<Index> adj_edge_;
};

SparseMatrix adjacency(const Graph& g);

/// Combinatorial Laplacian D - W.
SparseMatrix laplacian(const Graph& g);

/// Sum over edges of w_ij (x_i - x_j)^2.
double glr(const Graph& g, const Vector& x);

/// L x without assembling L.
Vector laplacian_apply(const Graph& g, const Vector& x);

inline constexpr double kNoFeatureTerm = std::numeric_limits<double>::infinity();

/// Same topology with weights exp(-|f_i - f_j|^2 / sigma_f^2 - (x_i - x_j)^2 / sigma_x^2).
/// sigma_f = kNoFeatureTerm (or a graph without features) drops the feature term.
Graph sdglr_weights(const Graph& g, const Vector& x, double sigma_f,
                    double sigma_x);

/// min_i (m_ii - sum_{j != i} |m_ij|).
double gershgorin_lower_bound(const SparseMatrix& m);

bool is_connected(const Graph& g);

}  // namespace gglr
