#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include <Eigen/Dense>

namespace oracle {

DenseMatrix dense_laplacian(const Graph& g) {
  const Index n = g.node_count();
  DenseMatrix l = DenseMatrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    l(e.u, e.v) -= e.weight;
    l(e.v, e.u) -= e.weight;
    l(e.u, e.u) += e.weight;
    l(e.v, e.v) += e.weight;
  }
  return l;
}

Vector eigenvalues(const DenseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Vector lu_solve(const DenseMatrix& a, const Vector& b) {
  return a.fullPivLu().solve(b);
}

DenseMatrix pinv_2col(const DenseMatrix& a) {
  const double p = a.col(0).dot(a.col(0));
  const double q = a.col(0).dot(a.col(1));
  const double r = a.col(1).dot(a.col(1));
  const double det = p * r - q * q;
  DenseMatrix inv(2, 2);
  inv << r / det, -q / det, -q / det, p / det;
  return inv * a.transpose();
}

namespace {

bool acyclic(const DenseMatrix& p, Index i, Index j) {
  for (Index k = 0; k < p.cols(); ++k) {
    if (p(j, k) != p(i, k)) return p(j, k) > p(i, k);
  }
  return false;
}

}  // namespace

std::vector<std::vector<DagTarget>> brute_force_dag(const Graph& g, Index k_plus) {
  const DenseMatrix& p = g.coords();
  const Index n = g.node_count();
  std::vector<std::vector<DagTarget>> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    // Selection order, with the source itself first.
    std::vector<Index> chosen{i};
    std::vector<double> chosen_w{1.0};
    while (static_cast<Index>(chosen.size()) - 1 < k_plus) {
      Index best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      double best_w = 0.0;
      for (Index v = 0; v < n; ++v) {
        if (std::find(chosen.begin(), chosen.end(), v) != chosen.end()) continue;
        if (!acyclic(p, i, v)) continue;
        // Discovery parent: earliest chosen node adjacent to v.
        Index parent = -1;
        for (std::size_t c = 0; c < chosen.size(); ++c) {
          if (g.find_edge(chosen[c], v) >= 0) {
            parent = static_cast<Index>(c);
            break;
          }
        }
        if (parent < 0) continue;
        const double d = (p.row(v) - p.row(i)).squaredNorm();
        if (d < best_d || (d == best_d && v < best)) {
          best = v;
          best_d = d;
          const Index pn = chosen[static_cast<std::size_t>(parent)];
          best_w = chosen_w[static_cast<std::size_t>(parent)] *
                   g.edge(g.find_edge(pn, v)).weight;
        }
      }
      if (best < 0) break;
      chosen.push_back(best);
      chosen_w.push_back(best_w);
    }
    for (std::size_t c = 1; c < chosen.size(); ++c) {
      out[static_cast<std::size_t>(i)].push_back({chosen[c], chosen_w[c]});
    }
  }
  return out;
}

DenseMatrix dense_gradient_matrix(const gglr::DagGradientPlan& plan) {
  const Index n = plan.node_count();
  const Index k = plan.dim();
  const auto& nodes = plan.computable();
  DenseMatrix g = DenseMatrix::Zero(static_cast<Index>(nodes.size()) * k, n);
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    const Index i = nodes[s];
    const DenseMatrix c = plan.coordinate_matrix(i);
    const Vector w = plan.dag_weights(i);
    const DenseMatrix w2 = w.array().square().matrix().asDiagonal();
    const DenseMatrix normal = c.transpose() * w2 * c;
    const DenseMatrix map = normal.inverse() * c.transpose() * w2;
    const auto& out = plan.out_edges(i);
    DenseMatrix f = DenseMatrix::Zero(static_cast<Index>(out.size()), n);
    for (std::size_t m = 0; m < out.size(); ++m) {
      f(static_cast<Index>(m), i) += 1.0;
      f(static_cast<Index>(m), out[m].target) -= 1.0;
    }
    g.middleRows(static_cast<Index>(s) * k, k) = map * f;
  }
  return g;
}

DenseMatrix dense_gnl(const gglr::DagGradientPlan& plan, const DenseMatrix& lbar) {
  const DenseMatrix g = dense_gradient_matrix(plan);
  const Index k = plan.dim();
  const Index slots = plan.computable_count();
  const Index n = plan.node_count();
  DenseMatrix out = DenseMatrix::Zero(n, n);
  for (Index c = 0; c < k; ++c) {
    DenseMatrix d(slots, n);
    for (Index s = 0; s < slots; ++s) d.row(s) = g.row(s * k + c);
    out += d.transpose() * lbar * d;
  }
  return out;
}

Vector naive_betweenness(const Graph& g) {
  const Index n = g.node_count();
  const auto un = static_cast<std::size_t>(n);
  std::vector<std::vector<Index>> dist(un, std::vector<Index>(un, -1));
  std::vector<std::vector<double>> count(un, std::vector<double>(un, 0.0));
  for (Index s = 0; s < n; ++s) {
    auto& d = dist[static_cast<std::size_t>(s)];
    auto& c = count[static_cast<std::size_t>(s)];
    d[static_cast<std::size_t>(s)] = 0;
    c[static_cast<std::size_t>(s)] = 1.0;
    std::deque<Index> queue{s};
    while (!queue.empty()) {
      const Index u = queue.front();
      queue.pop_front();
      for (Index v : g.neighbors(u)) {
        const auto uv = static_cast<std::size_t>(v);
        const auto uu = static_cast<std::size_t>(u);
        if (d[uv] < 0) {
          d[uv] = d[uu] + 1;
          queue.push_back(v);
        }
        if (d[uv] == d[uu] + 1) c[uv] += c[uu];
      }
    }
  }
  Vector b = Vector::Zero(n);
  for (Index s = 0; s < n; ++s) {
    for (Index t = s + 1; t < n; ++t) {
      const auto us = static_cast<std::size_t>(s);
      const auto ut = static_cast<std::size_t>(t);
      if (dist[us][ut] < 0) continue;
      for (Index v = 0; v < n; ++v) {
        if (v == s || v == t) continue;
        const auto uv = static_cast<std::size_t>(v);
        if (dist[us][uv] >= 0 && dist[us][uv] + dist[uv][ut] == dist[us][ut]) {
          b[v] += count[us][uv] * count[uv][ut] / count[us][ut];
        }
      }
    }
  }
  return b;
}

Graph random_knn_graph(Index n, Index dim, Index k, gglr::Rng& rng) {
  DenseMatrix p(n, dim);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < dim; ++c) p(i, c) = rng.uniform();
  }
  std::set<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      return (p.row(a) - p.row(i)).squaredNorm() < (p.row(b) - p.row(i)).squaredNorm();
    });
    for (Index m = 1; m <= k && m < n; ++m) {
      const Index j = order[static_cast<std::size_t>(m)];
      pairs.insert({std::min(i, j), std::max(i, j)});
    }
  }
  std::vector<gglr::Edge> edges;
  for (const auto& [u, v] : pairs) edges.push_back({u, v, 0.5 + rng.uniform()});
  return Graph(n, std::move(edges), p);
}

Graph random_connected_graph(Index n, Index extra, gglr::Rng& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng.below(i + 1))]);
  }
  std::set<std::pair<Index, Index>> pairs;
  for (Index i = 0; i + 1 < n; ++i) {
    const Index a = perm[static_cast<std::size_t>(i)];
    const Index b = perm[static_cast<std::size_t>(i + 1)];
    pairs.insert({std::min(a, b), std::max(a, b)});
  }
  for (Index e = 0; e < extra; ++e) {
    const Index a = rng.below(n);
    const Index b = rng.below(n);
    if (a != b) pairs.insert({std::min(a, b), std::max(a, b)});
  }
  std::vector<gglr::Edge> edges;
  for (const auto& [u, v] : pairs) edges.push_back({u, v, 0.1 + 1.9 * rng.uniform()});
  return Graph(n, std::move(edges));
}

Graph path_graph(Index n) {
  std::vector<gglr::Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return Graph(n, std::move(edges));
}

Graph ring_graph(Index n) {
  std::vector<gglr::Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  edges.push_back({0, n - 1, 1.0});
  return Graph(n, std::move(edges));
}

Graph complete_graph(Index n) {
  std::vector<gglr::Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  }
  return Graph(n, std::move(edges));
}

Graph star_graph(Index leaves) {
  std::vector<gglr::Edge> edges;
  for (Index i = 1; i <= leaves; ++i) edges.push_back({0, i, 1.0});
  return Graph(leaves + 1, std::move(edges));
}

Graph rhombus_graph() {
  DenseMatrix p(4, 2);
  p << 0.0, 0.0, 0.5, 0.866, 1.0, 0.0, 1.5, 0.866;
  std::vector<gglr::Edge> edges{
      {0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}};
  return Graph(4, std::move(edges), p);
}

Vector random_vector(Index n, gglr::Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace oracle
