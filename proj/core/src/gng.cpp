#include "gglr/gng.hpp"

#include <algorithm>
#include <cmath>

#include "gglr/error.hpp"
#include "gglr/solvers.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "gng";

}  // namespace

SparseMatrix GradientGraph::laplacian() const {
  const Index n = size();
  std::vector<Triplet> t;
  t.reserve(3 * edges.size() + static_cast<std::size_t>(n));
  Vector degree = Vector::Zero(n);
  for (const auto& e : edges) {
    t.push_back({e.a, e.b, -e.weight});
    t.push_back({e.b, e.a, -e.weight});
    degree[e.a] += e.weight;
    degree[e.b] += e.weight;
  }
  for (Index i = 0; i < n; ++i) t.push_back({i, i, degree[i]});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

GradientGraph gradient_graph(const DagGradientPlan& plan,
                             const GradientField& field, WeightMode mode,
                             double sigma_alpha, const Graph& base,
                             std::span<const Index> removed) {
  if (base.node_count() != plan.node_count()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "base graph and plan disagree on node count");
  }
  if (field.size() != plan.computable_count() || field.dim != plan.dim()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "gradient field does not match the plan");
  }
  if (mode == WeightMode::kSignalDependent && !(sigma_alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "sigma_alpha must be positive");
  }
  std::vector<char> gone(static_cast<std::size_t>(plan.node_count()), 0);
  for (Index r : removed) {
    if (r >= 0 && r < plan.node_count()) gone[static_cast<std::size_t>(r)] = 1;
  }
  GradientGraph gg;
  gg.nodes = plan.computable();
  const double inv = mode == WeightMode::kSignalDependent
                         ? 1.0 / (sigma_alpha * sigma_alpha)
                         : 0.0;
  const Index nv = field.size();
  for (const auto& e : base.edges()) {
    const Index a = plan.slot_of(e.u);
    const Index b = plan.slot_of(e.v);
    if (a < 0 || b < 0) continue;
    if (gone[static_cast<std::size_t>(e.u)] || gone[static_cast<std::size_t>(e.v)]) {
      continue;
    }
    double w = e.weight;
    if (mode == WeightMode::kSignalDependent) {
      double d2 = 0.0;
      for (Index k = 0; k < field.dim; ++k) {
        const double d = field.alpha[k * nv + a] - field.alpha[k * nv + b];
        d2 += d * d;
      }
      w = std::exp(-d2 * inv);
    }
    gg.edges.push_back({std::min(a, b), std::max(a, b), w});
  }
  return gg;
}

GnlOperator::GnlOperator(std::shared_ptr<const GradientOperator> gradient,
                         SparseMatrix gradient_laplacian)
    : gradient_(std::move(gradient)), lbar_(std::move(gradient_laplacian)) {
  if (!gradient_) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "null gradient operator");
  }
  if (lbar_.rows() != gradient_->slots || lbar_.cols() != gradient_->slots) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "gradient Laplacian size must equal |V-bar|");
  }
}

void GnlOperator::apply_lbar(const Vector& a, Vector& out) const {
  const Index nv = gradient_->slots;
  out.resize(a.size());
  Vector seg(nv);
  Vector res;
  for (Index k = 0; k < gradient_->dim; ++k) {
    seg = a.segment(k * nv, nv);
    lbar_.multiply(seg, res);
    out.segment(k * nv, nv) = res;
  }
}

void GnlOperator::apply(const Vector& x, Vector& y) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "signal length mismatch");
  }
  Vector a;
  gradient_->rg.multiply(x, a);
  Vector la;
  apply_lbar(a, la);
  gradient_->rg.multiply_transpose(la, y);
}

Vector GnlOperator::operator()(const Vector& x) const {
  Vector y;
  apply(x, y);
  return y;
}

double GnlOperator::value(const Vector& x) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "signal length mismatch");
  }
  Vector a;
  gradient_->rg.multiply(x, a);
  Vector la;
  apply_lbar(a, la);
  return a.dot(la);
}

Vector GnlOperator::diagonal() const {
  // diag_j = sum over coordinates of c_j^T Lbar c_j, c_j = column j of R G.
  const Index nv = gradient_->slots;
  const SparseMatrix& rgt = gradient_->rg_t;
  Vector d = Vector::Zero(dim());
  for (Index j = 0; j < dim(); ++j) {
    const auto idx = rgt.row_indices(j);
    const auto val = rgt.row_values(j);
    double sum = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) {
        if (idx[a] / nv != idx[b] / nv) continue;
        sum += val[a] * val[b] * lbar_.coeff(idx[a] % nv, idx[b] % nv);
      }
    }
    d[j] = sum;
  }
  return d;
}

LinearOperator GnlOperator::as_operator() const {
  auto self = std::make_shared<const GnlOperator>(*this);
  return LinearOperator(dim(), [self](const Vector& x, Vector& y) {
    self->apply(x, y);
  });
}

Vector gng_apply(const GnlOperator& op, const Vector& x) { return op(x); }

double gglr_value(const GnlOperator& op, const Vector& x) { return op.value(x); }

double gglr_edge_sum(const GradientGraph& gg, const GradientField& field) {
  const Index nv = field.size();
  double s = 0.0;
  for (const auto& e : gg.edges) {
    double d2 = 0.0;
    for (Index k = 0; k < field.dim; ++k) {
      const double d = field.alpha[k * nv + e.a] - field.alpha[k * nv + e.b];
      d2 += d * d;
    }
    s += e.weight * d2;
  }
  return s;
}

std::pair<Vector, Vector> zero_eigenvectors_1d(const GnlOperator& op) {
  if (op.coord_dim() != 1) {
    throw Error(ErrorCode::kNotOneDimensional, kModule,
                "closed-form null space exists only for K = 1");
  }
  const Vector ones = Vector::Ones(op.dim());
  const Vector v2 = right_pseudo_inverse_apply(
      op.gradient().g, Vector::Ones(op.gradient().slots));
  return {ones, v2};
}

std::vector<Index> detect_false_gradients(const GradientField& field,
                                          double multiplier) {
  if (!(multiplier > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "multiplier must be positive");
  }
  std::vector<Index> out;
  const Index nv = field.size();
  if (nv == 0) return out;
  Vector norms(nv);
  for (Index s = 0; s < nv; ++s) norms[s] = field.norm(s);
  const double threshold = multiplier * norms.mean();
  for (Index s = 0; s < nv; ++s) {
    if (norms[s] > threshold) out.push_back(field.nodes[static_cast<std::size_t>(s)]);
  }
  return out;
}

}  // namespace gglr
