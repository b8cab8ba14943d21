#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They trade speed for obviousness: dense matrices, recomputation
// from scratch, no shared code paths with the library beyond data types.

#include <cstdint>
#include <vector>

#include "gglr/dag.hpp"
#include "gglr/graph.hpp"
#include "gglr/rng.hpp"
#include "gglr/types.hpp"

namespace oracle {

using gglr::DenseMatrix;
using gglr::Graph;
using gglr::Index;
using gglr::Vector;

DenseMatrix dense_laplacian(const Graph& g);

// Ascending eigenvalues of a symmetric matrix.
Vector eigenvalues(const DenseMatrix& m);

Vector lu_solve(const DenseMatrix& a, const Vector& b);

// (A^T A)^{-1} A^T through the explicit inverse of a 2x2 Gram matrix.
DenseMatrix pinv_2col(const DenseMatrix& a);

struct DagTarget {
  Index node;
  double weight;
};

// DAG expansion recomputed from scratch at every step: the frontier is the
// set of unselected acyclic nodes adjacent to the source or to any selected
// node, and the closest one is taken. The weight of a target is the weight
// of the earliest-selected node it is adjacent to, times that edge weight.
std::vector<std::vector<DagTarget>> brute_force_dag(const Graph& g, Index k_plus);

// Dense G (|V-bar| K x N, node-major) from the plan's coordinate matrices and
// DAG weights via normal equations.
DenseMatrix dense_gradient_matrix(const gglr::DagGradientPlan& plan);

// sum_k D_k^T Lbar D_k where D_k collects the k-th gradient rows.
DenseMatrix dense_gnl(const gglr::DagGradientPlan& plan, const DenseMatrix& lbar);

// Betweenness by counting shortest paths through every node for every
// unordered pair, from an all-pairs BFS table.
Vector naive_betweenness(const Graph& g);

// Uniform points in the unit square/interval joined to their k nearest
// neighbours (symmetrized), unit weights, coordinates attached.
Graph random_knn_graph(Index n, Index dim, Index k, gglr::Rng& rng);

// Spanning path over a random permutation plus `extra` random chords,
// weights in [0.1, 2].
Graph random_connected_graph(Index n, Index extra, gglr::Rng& rng);

Graph path_graph(Index n);
Graph ring_graph(Index n);
Graph complete_graph(Index n);
Graph star_graph(Index leaves);

// Four-node rhombus of two triangles: (0,0), (0.5,0.866), (1,0), (1.5,0.866).
Graph rhombus_graph();

Vector random_vector(Index n, gglr::Rng& rng);

}  // namespace oracle
