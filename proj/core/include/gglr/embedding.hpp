#pragma once

#include <vector>

#include "gglr/graph.hpp"
#include "gglr/solvers.hpp"
#include "gglr/sparse.hpp"

namespace gglr {

/// Q = sum_i Theta_i over the disconnected two-hop neighbor sets T_i.
/// Theta_i = (1/T_i) sum_{j in T_i} (e_i - e_j)(e_i - e_j)^T, so Q is a
/// graph Laplacian (zero row sums).
struct TwoHopMatrix {
  SparseMatrix q;
  std::vector<Index> counts;  // T_i
  std::vector<std::vector<Index>> sets;
};

TwoHopMatrix two_hop_matrix(const Graph& g);

/// gamma = min over rows with Q_ii > 0 of
/// (L_ii + sum_{j != i} L_ij + eps) / (Q_ii - sum_{j != i} Q_ij).
/// `collapsed` drops the L terms, which cancel for a Laplacian. Returns 0
/// when Q has no two-hop structure.
double choose_gamma(const SparseMatrix& l, const TwoHopMatrix& q,
                    double epsilon, bool collapsed = true);

/// A = L - gamma Q + eps I.
SparseMatrix embedding_matrix(const SparseMatrix& l, const TwoHopMatrix& q,
                              double gamma, double epsilon);

struct Embedding {
  DenseMatrix p;   // N x K, orthonormal columns
  Vector eigenvalues;  // eigenvalues 2..K+1 of A
  double gamma = 0.0;
  double epsilon = 0.0;
};

inline constexpr Index kMaxEmbeddingDim = 8;

/// Latent coordinates from eigenvectors 2..K+1 of A. Each column is signed so
/// that its first clearly non-zero entry is positive.
Embedding embed(const Graph& g, Index k, const EigenOptions& options = {});

/// Unnormalized betweenness over unordered source/target pairs, with
/// hop-count shortest paths (Brandes). Sources are processed in
/// fixed chunks reduced in order, so the result does not depend on the
/// thread count.
Vector betweenness(const Graph& g);

/// Sample variance (ddof 1) of betweenness / ((N-1)(N-2)).
double vbc(const Graph& g);

inline constexpr double kDefaultVbcThreshold = 1e-4;

struct ManifoldCheck {
  bool qualified = false;
  double vbc = 0.0;
  double threshold = 0.0;
};

ManifoldCheck is_manifold_graph(const Graph& g,
                                double threshold = kDefaultVbcThreshold);

}  // namespace gglr
