#include "gglr/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gglr/error.hpp"
#include "gglr/linear_operator.hpp"
#include "gglr/parallel.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "embedding";

void require_connected(const Graph& g) {
  if (!is_connected(g)) {
    throw Error(ErrorCode::kNotConnected, kModule, "graph is not connected");
  }
}

}  // namespace

TwoHopMatrix two_hop_matrix(const Graph& g) {
  const Index n = g.node_count();
  TwoHopMatrix out;
  out.counts.assign(static_cast<std::size_t>(n), 0);
  out.sets.resize(static_cast<std::size_t>(n));
  std::vector<Index> mark(static_cast<std::size_t>(n), -1);
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    mark[static_cast<std::size_t>(i)] = i;
    for (Index j : g.neighbors(i)) mark[static_cast<std::size_t>(j)] = i;
    auto& set = out.sets[static_cast<std::size_t>(i)];
    for (Index j : g.neighbors(i)) {
      for (Index l : g.neighbors(j)) {
        if (mark[static_cast<std::size_t>(l)] != i) {
          mark[static_cast<std::size_t>(l)] = i;
          set.push_back(l);
        }
      }
    }
    std::sort(set.begin(), set.end());
    const auto count = static_cast<Index>(set.size());
    out.counts[static_cast<std::size_t>(i)] = count;
    if (count == 0) continue;
    const double inv = 1.0 / static_cast<double>(count);
    t.push_back({i, i, 1.0});
    for (Index j : set) {
      t.push_back({j, j, inv});
      t.push_back({i, j, -inv});
      t.push_back({j, i, -inv});
    }
  }
  out.q = SparseMatrix::from_triplets(n, n, std::move(t));
  return out;
}

double choose_gamma(const SparseMatrix& l, const TwoHopMatrix& q,
                    double epsilon, bool collapsed) {
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "epsilon must be non-negative");
  }
  double gamma = std::numeric_limits<double>::infinity();
  bool any = false;
  for (Index i = 0; i < q.q.rows(); ++i) {
    double diag = 0.0;
    double off = 0.0;
    const auto cols = q.q.row_indices(i);
    const auto vals = q.q.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == i) {
        diag += vals[k];
      } else {
        off += vals[k];
      }
    }
    if (!(diag > 0.0)) continue;
    double num = epsilon;
    if (!collapsed) {
      const auto lc = l.row_indices(i);
      const auto lv = l.row_values(i);
      for (std::size_t k = 0; k < lc.size(); ++k) num += lv[k];
    }
    const double gi = num / (diag - off);
    if (gi >= 0.0) {
      gamma = std::min(gamma, gi);
      any = true;
    }
  }
  return any ? gamma : 0.0;
}

SparseMatrix embedding_matrix(const SparseMatrix& l, const TwoHopMatrix& q,
                              double gamma, double epsilon) {
  const SparseMatrix shifted =
      add(l, SparseMatrix::identity(l.rows()), 1.0, epsilon);
  return add(shifted, q.q, 1.0, -gamma);
}

Embedding embed(const Graph& g, Index k, const EigenOptions& options) {
  const Index n = g.node_count();
  if (k < 1 || k > kMaxEmbeddingDim) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "embedding dimension must be in [1, 8]");
  }
  if (k + 2 > n) {
    throw Error(ErrorCode::kDimensionTooSmall, kModule,
                "embedding dimension must be at most N - 2");
  }
  require_connected(g);
  const SparseMatrix l = laplacian(g);
  const TwoHopMatrix q = two_hop_matrix(g);

  Embedding out;
  try {
    if (q.q.nnz() > 0) {
      const Vector ones = Vector::Ones(n);
      const EigenPairs qe = smallest_eigenpairs(LinearOperator::from_matrix(q.q),
                                                1, {&ones, 1}, options);
      out.epsilon = qe.values[0] > 1e-12 ? qe.values[0] : 0.0;
    }
    out.gamma = out.epsilon > 0.0 ? choose_gamma(l, q, out.epsilon) : 0.0;
    const SparseMatrix a = embedding_matrix(l, q, out.gamma, out.epsilon);
    const EigenPairs ae =
        smallest_eigenpairs(LinearOperator::from_matrix(a), k + 1, {}, options);
    out.p = ae.vectors.rightCols(k);
    out.eigenvalues = ae.values.tail(k);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonConvergence ||
        e.code() == ErrorCode::kEigensolverFailure) {
      throw Error(ErrorCode::kEigensolverFailure, kModule, e.what());
    }
    throw;
  }
  for (Index c = 0; c < k; ++c) {
    auto col = out.p.col(c);
    const double scale = col.cwiseAbs().maxCoeff();
    for (Index i = 0; i < n; ++i) {
      if (std::abs(col[i]) > 1e-8 * scale) {
        if (col[i] < 0.0) col *= -1.0;
        break;
      }
    }
  }
  return out;
}

Vector betweenness(const Graph& g) {
  const Index n = g.node_count();
  const Index chunks = std::min<Index>(n, 64);
  std::vector<Vector> partial(static_cast<std::size_t>(std::max<Index>(chunks, 1)),
                              Vector::Zero(n));
  parallel_chunks(n, chunks, [&](Index chunk, Index begin, Index end) {
    Vector& acc = partial[static_cast<std::size_t>(chunk)];
    std::vector<Index> dist(static_cast<std::size_t>(n));
    std::vector<double> sigma(static_cast<std::size_t>(n));
    std::vector<double> delta(static_cast<std::size_t>(n));
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n));
    for (Index s = begin; s < end; ++s) {
      std::fill(dist.begin(), dist.end(), -1);
      std::fill(sigma.begin(), sigma.end(), 0.0);
      std::fill(delta.begin(), delta.end(), 0.0);
      order.clear();
      dist[static_cast<std::size_t>(s)] = 0;
      sigma[static_cast<std::size_t>(s)] = 1.0;
      order.push_back(s);
      for (std::size_t head = 0; head < order.size(); ++head) {
        const Index v = order[head];
        const auto dv = dist[static_cast<std::size_t>(v)];
        for (Index w : g.neighbors(v)) {
          auto& dw = dist[static_cast<std::size_t>(w)];
          if (dw < 0) {
            dw = dv + 1;
            order.push_back(w);
          }
          if (dw == dv + 1) {
            sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(v)];
          }
        }
      }
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const Index w = *it;
        const auto dw = dist[static_cast<std::size_t>(w)];
        for (Index v : g.neighbors(w)) {
          if (dist[static_cast<std::size_t>(v)] == dw - 1) {
            delta[static_cast<std::size_t>(v)] +=
                sigma[static_cast<std::size_t>(v)] / sigma[static_cast<std::size_t>(w)] *
                (1.0 + delta[static_cast<std::size_t>(w)]);
          }
        }
        if (w != s) acc[w] += delta[static_cast<std::size_t>(w)];
      }
    }
  });
  Vector total = Vector::Zero(n);
  for (const auto& p : partial) total += p;
  // Each unordered pair was visited from both ends.
  return total * 0.5;
}

double vbc(const Graph& g) {
  const Index n = g.node_count();
  if (n < 3) {
    throw Error(ErrorCode::kDimensionTooSmall, kModule, "VBC needs at least 3 nodes");
  }
  require_connected(g);
  const Vector c = betweenness(g) / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
  const double mean = c.mean();
  return (c.array() - mean).square().sum() / static_cast<double>(n - 1);
}

ManifoldCheck is_manifold_graph(const Graph& g, double threshold) {
  ManifoldCheck out;
  out.vbc = vbc(g);
  out.threshold = threshold;
  out.qualified = out.vbc <= threshold;
  return out;
}

}  // namespace gglr
