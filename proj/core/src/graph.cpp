#include "gglr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gglr/error.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "graph-model";

void check_length(const Graph& g, const Vector& x) {
  if (x.size() != g.node_count()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "signal length " + std::to_string(x.size()) +
                    " != node count " + std::to_string(g.node_count()));
  }
}

}  // namespace

Graph::Graph(Index node_count, std::vector<Edge> edges,
             std::optional<DenseMatrix> coords,
             std::optional<DenseMatrix> features)
    : n_(node_count),
      edges_(std::move(edges)),
      coords_(std::move(coords)),
      features_(std::move(features)) {
  if (n_ < 0) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "negative node count");
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    Edge& ed = edges_[e];
    const auto idx = static_cast<std::int64_t>(e);
    if (ed.u < 0 || ed.v < 0 || ed.u >= n_ || ed.v >= n_) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "edge endpoint out of range", idx);
    }
    if (ed.u == ed.v) {
      throw Error(ErrorCode::kSelfLoop, kModule,
                  "self-loop at node " + std::to_string(ed.u), idx);
    }
    if (!std::isfinite(ed.weight) || ed.weight < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "edge weight must be finite and non-negative", idx);
    }
    if (ed.u > ed.v) std::swap(ed.u, ed.v);
  }
  if (coords_) {
    if (coords_->rows() != n_ || coords_->cols() == 0) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "coordinate block must have one non-empty row per node");
    }
    if (!coords_->allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "non-finite coordinate");
    }
  }
  if (features_ && features_->rows() != n_) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "feature block must have one row per node");
  }

  std::vector<Index> counts(static_cast<std::size_t>(n_), 0);
  for (const auto& e : edges_) {
    ++counts[static_cast<std::size_t>(e.u)];
    ++counts[static_cast<std::size_t>(e.v)];
  }
  adj_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (Index i = 0; i < n_; ++i) {
    adj_ptr_[i + 1] = adj_ptr_[i] + counts[static_cast<std::size_t>(i)];
  }
  adj_node_.resize(static_cast<std::size_t>(adj_ptr_.back()));
  adj_edge_.resize(adj_node_.size());
  std::vector<Index> fill(adj_ptr_.begin(), adj_ptr_.end() - 1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& ed = edges_[e];
    auto pu = static_cast<std::size_t>(fill[static_cast<std::size_t>(ed.u)]++);
    adj_node_[pu] = ed.v;
    adj_edge_[pu] = static_cast<Index>(e);
    auto pv = static_cast<std::size_t>(fill[static_cast<std::size_t>(ed.v)]++);
    adj_node_[pv] = ed.u;
    adj_edge_[pv] = static_cast<Index>(e);
  }
  // Sort each adjacency row by neighbor id; detect duplicates.
  for (Index i = 0; i < n_; ++i) {
    const auto b = static_cast<std::size_t>(adj_ptr_[i]);
    const auto e = static_cast<std::size_t>(adj_ptr_[i + 1]);
    std::vector<std::pair<Index, Index>> row;
    row.reserve(e - b);
    for (auto k = b; k < e; ++k) row.emplace_back(adj_node_[k], adj_edge_[k]);
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0 && row[k].first == row[k - 1].first) {
        throw Error(ErrorCode::kDuplicateEdge, kModule,
                    "duplicate edge (" + std::to_string(std::min(i, row[k].first)) +
                        ", " + std::to_string(std::max(i, row[k].first)) + ")",
                    static_cast<std::int64_t>(std::max(row[k].second, row[k - 1].second)));
      }
      adj_node_[b + k] = row[k].first;
      adj_edge_[b + k] = row[k].second;
    }
  }
}

const DenseMatrix& Graph::coords() const {
  if (!coords_) {
    throw Error(ErrorCode::kNoCoordinates, kModule, "graph has no coordinates");
  }
  return *coords_;
}

const DenseMatrix& Graph::features() const {
  if (!features_) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "graph has no features");
  }
  return *features_;
}

std::span<const Index> Graph::neighbors(Index i) const {
  const auto b = static_cast<std::size_t>(adj_ptr_[i]);
  const auto e = static_cast<std::size_t>(adj_ptr_[i + 1]);
  return {adj_node_.data() + b, e - b};
}

std::span<const Index> Graph::incident_edges(Index i) const {
  const auto b = static_cast<std::size_t>(adj_ptr_[i]);
  const auto e = static_cast<std::size_t>(adj_ptr_[i + 1]);
  return {adj_edge_.data() + b, e - b};
}

Index Graph::find_edge(Index u, Index v) const {
  const auto nb = neighbors(u);
  const auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return -1;
  return incident_edges(u)[static_cast<std::size_t>(it - nb.begin())];
}

Graph Graph::with_weights(const Vector& weights) const {
  if (weights.size() != edge_count()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "one weight per edge required");
  }
  Graph out = *this;
  for (std::size_t e = 0; e < out.edges_.size(); ++e) {
    const double w = weights[static_cast<Index>(e)];
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "edge weight must be finite and non-negative",
                  static_cast<std::int64_t>(e));
    }
    out.edges_[e].weight = w;
  }
  return out;
}

Graph Graph::with_coords(DenseMatrix coords) const {
  return Graph(n_, edges_, std::move(coords), features_);
}

Graph Graph::without_coords() const {
  Graph out = *this;
  out.coords_.reset();
  return out;
}

SparseMatrix adjacency(const Graph& g) {
  std::vector<Triplet> t;
  t.reserve(2 * g.edges().size());
  for (const auto& e : g.edges()) {
    t.push_back({e.u, e.v, e.weight});
    t.push_back({e.v, e.u, e.weight});
  }
  return SparseMatrix::from_triplets(g.node_count(), g.node_count(), std::move(t));
}

SparseMatrix laplacian(const Graph& g) {
  const Index n = g.node_count();
  std::vector<Triplet> t;
  t.reserve(2 * g.edges().size() + static_cast<std::size_t>(n));
  Vector degree = Vector::Zero(n);
  for (const auto& e : g.edges()) {
    t.push_back({e.u, e.v, -e.weight});
    t.push_back({e.v, e.u, -e.weight});
    degree[e.u] += e.weight;
    degree[e.v] += e.weight;
  }
  for (Index i = 0; i < n; ++i) t.push_back({i, i, degree[i]});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

double glr(const Graph& g, const Vector& x) {
  check_length(g, x);
  double s = 0.0;
  for (const auto& e : g.edges()) {
    const double d = x[e.u] - x[e.v];
    s += e.weight * d * d;
  }
  return s;
}

Vector laplacian_apply(const Graph& g, const Vector& x) {
  check_length(g, x);
  Vector y = Vector::Zero(x.size());
  for (const auto& e : g.edges()) {
    const double d = e.weight * (x[e.u] - x[e.v]);
    y[e.u] += d;
    y[e.v] -= d;
  }
  return y;
}

Graph sdglr_weights(const Graph& g, const Vector& x, double sigma_f,
                    double sigma_x) {
  check_length(g, x);
  if (!(sigma_x > 0.0) || !(sigma_f > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "kernel widths must be positive");
  }
  const bool use_features = g.has_features() && std::isfinite(sigma_f);
  const double inv_x = 1.0 / (sigma_x * sigma_x);
  const double inv_f = use_features ? 1.0 / (sigma_f * sigma_f) : 0.0;
  Vector w(g.edge_count());
  for (Index k = 0; k < g.edge_count(); ++k) {
    const auto& e = g.edge(k);
    const double dx = x[e.u] - x[e.v];
    double expo = dx * dx * inv_x;
    if (use_features) {
      expo += (g.features().row(e.u) - g.features().row(e.v)).squaredNorm() * inv_f;
    }
    w[k] = std::exp(-expo);
  }
  return g.with_weights(w);
}

double gershgorin_lower_bound(const SparseMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "matrix must be square");
  }
  double bound = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m.rows(); ++i) {
    double center = 0.0;
    double radius = 0.0;
    const auto cols = m.row_indices(i);
    const auto vals = m.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == i) {
        center += vals[k];
      } else {
        radius += std::abs(vals[k]);
      }
    }
    bound = std::min(bound, center - radius);
  }
  return bound;
}

bool is_connected(const Graph& g) {
  const Index n = g.node_count();
  if (n <= 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  Index count = 1;
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (Index v : g.neighbors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

}  // namespace gglr
