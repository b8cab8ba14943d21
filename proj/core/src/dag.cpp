#include "gglr/dag.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gglr/error.hpp"
#include "gglr/solvers.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "dag-gradient";

bool acyclic_rows(const DenseMatrix& p, Index i, Index j) {
  for (Index k = 0; k < p.cols(); ++k) {
    const double a = p(i, k);
    const double b = p(j, k);
    if (b != a) return b > a;
  }
  return false;
}

struct Candidate {
  Index node;
  double dist2;
  double weight;
};

}  // namespace

bool acyclic_condition(const Vector& p_i, const Vector& p_j) {
  if (p_i.size() != p_j.size()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "coordinate dimensions differ");
  }
  for (Index k = 0; k < p_i.size(); ++k) {
    if (p_j[k] != p_i[k]) return p_j[k] > p_i[k];
  }
  return false;
}

DagGradientPlan DagGradientPlan::from_out_edges(
    DenseMatrix coords, std::vector<std::vector<DagEdge>> out_edges,
    Index k_plus, bool prune_collinear) {
  const Index n = coords.rows();
  const Index dim = coords.cols();
  if (dim == 0) {
    throw Error(ErrorCode::kNoCoordinates, kModule, "zero-dimensional coordinates");
  }
  if (k_plus < dim) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "K+ must be at least the coordinate dimension");
  }
  if (static_cast<Index>(out_edges.size()) != n) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "one out-edge list per node required");
  }
  DagGradientPlan plan;
  plan.coords_ = std::move(coords);
  plan.k_plus_ = k_plus;
  plan.out_ = std::move(out_edges);
  plan.slot_.assign(static_cast<std::size_t>(n), -1);

  for (Index i = 0; i < n; ++i) {
    const auto& out = plan.out_[static_cast<std::size_t>(i)];
    if (static_cast<Index>(out.size()) > k_plus) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "node has more than K+ out-edges", i);
    }
    for (const auto& e : out) {
      if (e.target < 0 || e.target >= n) {
        throw Error(ErrorCode::kInvalidArgument, kModule,
                    "out-edge target out of range", i);
      }
      if (!acyclic_rows(plan.coords_, i, e.target)) {
        throw Error(ErrorCode::kInvalidArgument, kModule,
                    "out-edge violates the acyclic condition", i);
      }
      if (!std::isfinite(e.weight) || e.weight < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, kModule,
                    "DAG weight must be finite and non-negative", i);
      }
    }
    if (static_cast<Index>(out.size()) < k_plus) {
      plan.excluded_.push_back(i);
      continue;
    }
    const DenseMatrix c = plan.coordinate_matrix(i);
    const Vector w = plan.dag_weights(i);
    const DenseMatrix wc = w.asDiagonal() * c;
    if (gram_rcond(wc) < kPseudoInverseRcond) {
      if (prune_collinear) {
        plan.collinear_.push_back(i);
        continue;
      }
      throw Error(ErrorCode::kRankDeficient, kModule,
                  "collinear targets at node " + std::to_string(i), i);
    }
    plan.slot_[static_cast<std::size_t>(i)] =
        static_cast<Index>(plan.computable_.size());
    plan.computable_.push_back(i);
    plan.maps_.push_back(left_pseudo_inverse(wc) * w.asDiagonal());
  }
  return plan;
}

const std::vector<DagEdge>& DagGradientPlan::out_edges(Index i) const {
  if (i < 0 || i >= node_count()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "node out of range", i);
  }
  return out_[static_cast<std::size_t>(i)];
}

Index DagGradientPlan::slot_of(Index i) const {
  if (i < 0 || i >= node_count()) return -1;
  return slot_[static_cast<std::size_t>(i)];
}

DenseMatrix DagGradientPlan::coordinate_matrix(Index i) const {
  const auto& out = out_edges(i);
  DenseMatrix c(static_cast<Index>(out.size()), dim());
  for (std::size_t m = 0; m < out.size(); ++m) {
    c.row(static_cast<Index>(m)) = coords_.row(i) - coords_.row(out[m].target);
  }
  return c;
}

Vector DagGradientPlan::dag_weights(Index i) const {
  const auto& out = out_edges(i);
  Vector w(static_cast<Index>(out.size()));
  for (std::size_t m = 0; m < out.size(); ++m) {
    w[static_cast<Index>(m)] = out[m].weight;
  }
  return w;
}

const DenseMatrix& DagGradientPlan::gradient_map(Index i) const {
  const Index s = slot_of(i);
  if (s < 0) {
    throw Error(ErrorCode::kNodeNotComputable, kModule,
                "node " + std::to_string(i) + " has no computable gradient", i);
  }
  return maps_[static_cast<std::size_t>(s)];
}

std::vector<Index> DagGradientPlan::reorder_permutation() const {
  const Index nv = computable_count();
  const Index k = dim();
  std::vector<Index> perm(static_cast<std::size_t>(nv * k));
  for (Index s = 0; s < nv; ++s) {
    for (Index c = 0; c < k; ++c) {
      perm[static_cast<std::size_t>(s * k + c)] = c * nv + s;
    }
  }
  return perm;
}

SparseMatrix DagGradientPlan::reorder_matrix() const {
  const auto perm = reorder_permutation();
  const auto n = static_cast<Index>(perm.size());
  std::vector<Triplet> t;
  t.reserve(perm.size());
  for (Index from = 0; from < n; ++from) {
    t.push_back({perm[static_cast<std::size_t>(from)], from, 1.0});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

DagGradientPlan build_dag(const Graph& g, Index k_plus, bool prune_collinear) {
  if (!g.has_coords()) {
    throw Error(ErrorCode::kNoCoordinates, kModule,
                "DAG construction needs latent coordinates");
  }
  const DenseMatrix& p = g.coords();
  const Index n = g.node_count();
  const Index dim = p.cols();
  if (k_plus == 0) k_plus = dim;
  if (k_plus < dim) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "K+ must be at least the coordinate dimension");
  }
  bool all_same = n > 1;
  for (Index i = 1; i < n && all_same; ++i) {
    all_same = (p.row(i).array() == p.row(0).array()).all();
  }
  if (all_same) {
    throw Error(ErrorCode::kDegenerateCoordinates, kModule,
                "all nodes share identical coordinates");
  }

  std::vector<std::vector<DagEdge>> out(static_cast<std::size_t>(n));
  // stamp[v] == i marks v as seen (selected or candidate) for source i.
  std::vector<Index> stamp(static_cast<std::size_t>(n), -1);
  std::vector<Candidate> cand;
  for (Index i = 0; i < n; ++i) {
    cand.clear();
    stamp[static_cast<std::size_t>(i)] = i;
    auto push = [&](Index v, double w) {
      if (stamp[static_cast<std::size_t>(v)] == i) return;
      if (!acyclic_rows(p, i, v)) return;
      stamp[static_cast<std::size_t>(v)] = i;
      cand.push_back({v, (p.row(v) - p.row(i)).squaredNorm(), w});
    };
    const auto nb = g.neighbors(i);
    const auto inc = g.incident_edges(i);
    for (std::size_t k = 0; k < nb.size(); ++k) push(nb[k], g.edge(inc[k]).weight);

    auto& targets = out[static_cast<std::size_t>(i)];
    while (static_cast<Index>(targets.size()) < k_plus && !cand.empty()) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < cand.size(); ++c) {
        if (cand[c].dist2 < cand[best].dist2 ||
            (cand[c].dist2 == cand[best].dist2 && cand[c].node < cand[best].node)) {
          best = c;
        }
      }
      const Candidate pick = cand[best];
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(best));
      targets.push_back({pick.node, pick.weight});
      const auto nb2 = g.neighbors(pick.node);
      const auto inc2 = g.incident_edges(pick.node);
      for (std::size_t k = 0; k < nb2.size(); ++k) {
        push(nb2[k], pick.weight * g.edge(inc2[k]).weight);
      }
    }
  }
  return DagGradientPlan::from_out_edges(p, std::move(out), k_plus,
                                         prune_collinear);
}

std::vector<Index> topological_order(const DagGradientPlan& plan) {
  const Index n = plan.node_count();
  std::vector<Index> indeg(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    for (const auto& e : plan.out_edges(i)) ++indeg[static_cast<std::size_t>(e.target)];
  }
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (indeg[static_cast<std::size_t>(i)] == 0) order.push_back(i);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (const auto& e : plan.out_edges(order[head])) {
      if (--indeg[static_cast<std::size_t>(e.target)] == 0) order.push_back(e.target);
    }
  }
  if (static_cast<Index>(order.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "directed edges contain a cycle");
  }
  return order;
}

Vector gradient_operator_apply(const DagGradientPlan& plan, Index i,
                               const Vector& x) {
  if (!plan.is_computable(i)) {
    throw Error(ErrorCode::kNodeNotComputable, kModule,
                "node " + std::to_string(i) + " has no computable gradient", i);
  }
  if (x.size() != plan.node_count()) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "signal length mismatch");
  }
  const auto& out = plan.out_edges(i);
  Vector f(static_cast<Index>(out.size()));
  for (std::size_t m = 0; m < out.size(); ++m) {
    f[static_cast<Index>(m)] = x[i] - x[out[m].target];
  }
  return f;
}

Vector manifold_gradient(const DagGradientPlan& plan, Index i, const Vector& x) {
  return plan.gradient_map(i) * gradient_operator_apply(plan, i, x);
}

Vector GradientField::node_gradient(Index slot) const {
  Vector a(dim);
  const Index nv = size();
  for (Index k = 0; k < dim; ++k) a[k] = alpha[k * nv + slot];
  return a;
}

GradientField gradient_field(const DagGradientPlan& plan, const Vector& x) {
  GradientField field;
  field.dim = plan.dim();
  field.nodes = plan.computable();
  const Index nv = plan.computable_count();
  field.alpha.resize(nv * field.dim);
  for (Index s = 0; s < nv; ++s) {
    const Vector a = manifold_gradient(plan, field.nodes[static_cast<std::size_t>(s)], x);
    for (Index k = 0; k < field.dim; ++k) field.alpha[k * nv + s] = a[k];
  }
  return field;
}

std::shared_ptr<const GradientOperator> GradientOperator::build(
    const DagGradientPlan& plan) {
  auto op = std::make_shared<GradientOperator>();
  op->slots = plan.computable_count();
  op->dim = plan.dim();
  op->nodes = plan.node_count();
  std::vector<Triplet> node_major;
  std::vector<Triplet> coord_major;
  for (Index s = 0; s < op->slots; ++s) {
    const Index i = plan.computable()[static_cast<std::size_t>(s)];
    const DenseMatrix& m = plan.gradient_map(i);
    const auto& out = plan.out_edges(i);
    for (Index k = 0; k < op->dim; ++k) {
      const Index r_node = s * op->dim + k;
      const Index r_coord = k * op->slots + s;
      double self = 0.0;
      for (std::size_t t = 0; t < out.size(); ++t) {
        const double v = m(k, static_cast<Index>(t));
        self += v;
        node_major.push_back({r_node, out[t].target, -v});
        coord_major.push_back({r_coord, out[t].target, -v});
      }
      node_major.push_back({r_node, i, self});
      coord_major.push_back({r_coord, i, self});
    }
  }
  const Index rows = op->slots * op->dim;
  op->g = SparseMatrix::from_triplets(rows, op->nodes, std::move(node_major));
  op->rg = SparseMatrix::from_triplets(rows, op->nodes, std::move(coord_major));
  op->rg_t = op->rg.transpose();
  return op;
}

}  // namespace gglr
