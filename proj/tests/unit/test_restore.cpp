#include <gtest/gtest.h>

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <numeric>

#include "gglr/dag.hpp"
#include "gglr/error.hpp"
#include "gglr/gng.hpp"
#include "gglr/io.hpp"
#include "gglr/linear_operator.hpp"
#include "gglr/restore.hpp"
#include "gglr/rng.hpp"
#include "gglr/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace gglr;
using testutil::error_of;
using testutil::vec;

namespace {

Graph unit_line(Index n) { return line_graph(Vector::LinSpaced(n, 1.0, double(n))); }

GnlOperator planar_operator(const Graph& g, const DagGradientPlan& plan) {
  const GradientField f = gradient_field(plan, Vector::Zero(g.node_count()));
  const GradientGraph gg = gradient_graph(plan, f, WeightMode::kPlanarFixed, 1.0, g);
  return GnlOperator(GradientOperator::build(plan), gg.laplacian());
}

RestoreProblem golden_setup(const Vector& y, double mu) {
  RestoreProblem p;
  p.y = y;
  p.mu = mu;
  p.pilot = false;
  p.anchor = Anchor::kPreviousEstimate;
  p.conv_tol = 5e-4;
  p.false_gradient_multiplier = 0.0;
  return p;
}

// Interpolation instance on a w x h two-plane image.
struct GridCase {
  Graph g;
  Vector clean;
  ObservationMap h;
  Vector y;
};

GridCase grid_case(Index w, Index ht, double missing, std::uint64_t seed) {
  GridCase c{grid_graph(w, ht), two_plane_image(w, ht), {}, {}};
  Rng rng(seed);
  const auto mask = sample_mask(w * ht, missing, rng);
  std::vector<Index> obs;
  for (Index i = 0; i < w * ht; ++i)
    if (mask[static_cast<std::size_t>(i)]) obs.push_back(i);
  c.h = ObservationMap::sampling(w * ht, obs);
  c.y = c.h.apply(c.clean);
  return c;
}

}  // namespace

TEST(ObservationMap, SamplingAndIdentity) {
  const ObservationMap h = ObservationMap::sampling(5, {3, 1, 1});
  EXPECT_EQ(h.rows(), 2);
  EXPECT_EQ(h.observed(), (std::vector<Index>{1, 3}));
  const Vector x = vec({10, 11, 12, 13, 14});
  EXPECT_EQ(h.apply(x), vec({11, 13}));
  EXPECT_EQ(h.apply_transpose(vec({1, 2})), vec({0, 1, 0, 2, 0}));
  EXPECT_EQ(h.gram_diagonal(), vec({0, 1, 0, 1, 0}));
  EXPECT_EQ(error_of([] { ObservationMap::sampling(3, {}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(ObservationMap::identity(3).apply(vec({1, 2, 3})), vec({1, 2, 3}));
}

TEST(ObservationMap, BlurRowSpaceProjection) {
  const ObservationMap h = ObservationMap::blur(binomial_blur(4, 4));
  Rng rng(2);
  const Vector v = oracle::random_vector(16, rng);
  // Square full-rank kernel: the row space is everything.
  EXPECT_LT((h.row_space_project(v) - v).norm(), 1e-8 * v.norm());
  const DenseMatrix k = h.kernel().to_dense();
  EXPECT_LT((h.gram_diagonal() - (k.transpose() * k).diagonal()).norm(), 1e-14);
}

TEST(SolveQuadratic, ZeroMuReturnsObservation) {
  const Graph g = unit_line(6);
  const DagGradientPlan plan = build_dag(g);
  const GnlOperator op = planar_operator(g, plan);
  const Vector y = vec({1, -2, 0.5, 4, 3, 3});
  EXPECT_LT((solve_quadratic(ObservationMap::identity(6), op, 0.0, y) - y).norm(), 1e-14);
  const Vector tiny = solve_quadratic(ObservationMap::identity(6), op, 1e-15, y);
  EXPECT_LT((tiny - y).norm(), 10 * std::numeric_limits<double>::epsilon() * y.norm());
}

TEST(SolveQuadratic, DenoiseMatchesDenseSolve) {
  const Graph g = unit_line(5);
  const DagGradientPlan plan = build_dag(g);
  const GnlOperator op = planar_operator(g, plan);
  const Vector y = vec({2, 2.8, 3.1, 2.5, 1.2});
  const DenseMatrix phi = DenseMatrix::Identity(5, 5) + 0.25 * densify(op.as_operator());
  const Vector ref = oracle::lu_solve(phi, y);
  const Vector x = solve_quadratic(ObservationMap::identity(5), op, 0.25, y);
  EXPECT_LT((x - ref).norm() / ref.norm(), 1e-7);

  // Same through the restoration loop, first iteration only.
  RestoreProblem p;
  p.y = y;
  p.mu = 0.25;
  p.mode = WeightMode::kPlanarFixed;
  p.max_iters = 1;
  p.false_gradient_multiplier = 0.0;
  const RestoreReport r = restore(p, g);
  EXPECT_LT((r.x_star - ref).norm() / ref.norm(), 1e-7);
}

TEST(SolveQuadratic, RandomDenoiseMatchesDenseSolve) {
  Rng rng(12);
  for (int t = 0; t < 5; ++t) {
    const Graph g = oracle::random_knn_graph(60, 2, 6, rng);
    const DagGradientPlan plan = build_dag(g, 3);
    const GnlOperator op = planar_operator(g, plan);
    const Vector y = oracle::random_vector(60, rng);
    const double mu = 0.1 + rng.uniform();
    const Vector ref = oracle::lu_solve(
        DenseMatrix::Identity(60, 60) + mu * densify(op.as_operator()), y);
    const Vector x = solve_quadratic(ObservationMap::identity(60), op, mu, y);
    EXPECT_LT((x - ref).norm() / ref.norm(), 1e-7);
  }
}

TEST(SolveQuadratic, TwoSamplesOnLineInterpolateLinearly) {
  const Graph g = line_graph(vec({0, 1, 2, 3, 4}));
  const DagGradientPlan plan = build_dag(g);
  const GnlOperator op = planar_operator(g, plan);
  const ObservationMap h = ObservationMap::sampling(5, {1, 3});
  const Vector x = solve_quadratic(h, op, 1e-3, vec({1.0, 3.0}));
  EXPECT_LT((x - vec({0, 1, 2, 3, 4})).norm(), 1e-6);
}

TEST(SolveQuadratic, OptimalityCondition) {
  const GridCase c = grid_case(10, 10, 0.6, 3);
  const DagGradientPlan plan = build_dag(c.g);
  const GnlOperator op = planar_operator(c.g, plan);
  const double mu = 0.05;
  const Vector x = solve_quadratic(c.h, op.as_operator(), mu, c.y, 1e-10);
  const Vector grad = 2.0 * c.h.apply_transpose(c.h.apply(x) - c.y) + 2.0 * mu * op(x);
  EXPECT_LE(grad.norm(), 1e-6 * c.h.apply_transpose(c.y).norm());
}

TEST(SolveQuadratic, DeblurOptimality) {
  const Index w = 8;
  const Graph g = grid_graph(w, w);
  const ObservationMap h = ObservationMap::blur(binomial_blur(w, w));
  const Vector y = h.apply(two_plane_image(w, w));
  const DagGradientPlan plan = build_dag(g);
  const GnlOperator op = planar_operator(g, plan);
  const Vector x = solve_quadratic(h, op.as_operator(), 0.01, y, 1e-11);
  const Vector grad = 2.0 * h.apply_transpose(h.apply(x) - y) + 2.0 * 0.01 * op(x);
  EXPECT_LE(grad.norm(), 1e-6 * h.apply_transpose(y).norm());
}

TEST(SolveQuadratic, LargeMuApproachesPlanarProjection) {
  Rng rng(14);
  Vector pos(10);
  for (Index i = 0; i < 10; ++i) pos[i] = i + 0.5 * rng.uniform();
  const Graph g = line_graph(pos);
  const DagGradientPlan plan = build_dag(g);
  const GnlOperator op = planar_operator(g, plan);
  const Vector y = oracle::random_vector(10, rng);
  DenseMatrix basis(10, 2);
  basis.col(0) = Vector::Ones(10);
  basis.col(1) = pos;
  const Vector fit = basis * basis.colPivHouseholderQr().solve(y);
  // The smallest eigenvalue of I + mu L is 1, so the solution error is at
  // most the residual. Rounding keeps the true residual near
  // eps * mu * lambda_max * |x|, so ask for no more than 1e-6.
  const Vector x = solve_quadratic(ObservationMap::identity(10), op.as_operator(), 1e8, y,
                                   1e-6, 10000);
  EXPECT_LT((x - fit).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Solvability, SingleSampleOnLineIsRejected) {
  const Graph g = unit_line(6);
  const DagGradientPlan plan = build_dag(g);
  const GnlOperator op = planar_operator(g, plan);
  const ObservationMap h = ObservationMap::sampling(6, {2});
  std::vector<std::string> warnings;
  EXPECT_EQ(error_of([&] { check_solvability(h, op.as_operator(), &warnings); }),
            ErrorCode::kSingularPhi);
  EXPECT_EQ(error_of([&] {
              check_solvability(ObservationMap::sampling(6, {0, 5}), op.as_operator(),
                                &warnings);
            }),
            std::nullopt);
}

TEST(Restore, GoldenSdglrFiveNodes) {
  RestoreProblem p = golden_setup(vec({2, 2, 1.8, 1.2, 1}), 1.0);
  p.sigma_x = std::sqrt(0.1);
  const RestoreReport r = restore_sdglr(p, unit_line(5));
  const Vector expect = vec({1.92, 1.92, 1.92, 1.12, 1.12});
  EXPECT_LE((r.x_star - expect).cwiseAbs().maxCoeff(), 0.01);
  EXPECT_LE(r.iterations, 10);
  EXPECT_TRUE(r.converged);
}

TEST(Restore, GoldenGglrFiveNodes) {
  RestoreProblem p = golden_setup(vec({2, 2.8, 3.1, 2.5, 1.2}), 0.25);
  p.sigma_alpha = 0.5;
  const RestoreReport r = restore(p, unit_line(5));
  const Vector expect = vec({2.08, 2.66, 3.25, 2.29, 1.32});
  EXPECT_LE((r.x_star - expect).cwiseAbs().maxCoeff(), 0.01);
  EXPECT_LE(r.iterations, 10);
  EXPECT_LE(r.final_regularizer, 5e-4);
}

TEST(Restore, NoiselessPlaneIsAFixedPoint) {
  const Graph g = grid_graph(6, 5);
  const Vector y = plane_image(6, 5, 10.0, 1.5, -2.0);
  RestoreProblem p;
  p.y = y;
  p.mu = 1.0;
  const RestoreReport r = restore(p, g);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.x_star - y).norm(), p.conv_tol * y.norm());
  EXPECT_TRUE(r.removed_false_gradients.empty());
}

TEST(Restore, ObjectiveDecreasesAndTraceIsFinite) {
  Rng rng(15);
  for (int t = 0; t < 4; ++t) {
    const Graph g = grid_graph(10, 10);
    const Vector y = add_gaussian_noise(two_plane_image(10, 10), 10.0, rng);
    RestoreProblem p;
    p.y = y;
    p.mu = 0.5;
    p.sigma_alpha = 40.0;
    const RestoreReport r = t % 2 ? restore(p, g) : separable_grid_restore(p, g);
    ASSERT_GE(r.objective_trace.size(), 2u);
    for (double v : r.objective_trace) EXPECT_TRUE(std::isfinite(v));
    EXPECT_LE(r.objective_trace.back(), r.objective_trace.front());
    EXPECT_EQ(r.x_star.size(), 100);
  }
}

TEST(Restore, DeterministicReports) {
  const GridCase c = grid_case(12, 12, 0.5, 4);
  RestoreProblem p;
  p.y = c.y;
  p.h = c.h;
  p.mu = 0.01;
  const RestoreReport a = separable_grid_restore(p, c.g);
  const RestoreReport b = separable_grid_restore(p, c.g);
  EXPECT_EQ(a.x_star, b.x_star);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Restore, ErrorsCarryIterationContext) {
  const Graph g = unit_line(6);
  RestoreProblem p;
  p.y = vec({1, 2});
  EXPECT_EQ(error_of([&] { restore(p, g); }), ErrorCode::kLengthMismatch);
  p.y = Vector::Ones(6);
  p.mu = -1.0;
  EXPECT_EQ(error_of([&] { restore(p, g); }), ErrorCode::kInvalidArgument);
  p.mu.reset();
  EXPECT_EQ(error_of([&] { restore(p, g); }), ErrorCode::kInvalidArgument);  // no sigma_z
  p.mu = 1.0;
  p.h = ObservationMap::sampling(6, {2});
  p.y = vec({1});
  EXPECT_EQ(error_of([&] { restore(p, g); }), ErrorCode::kSingularPhi);
}

TEST(RestoreSdglr, ConstantObservationUnchanged) {
  RestoreProblem p;
  p.y = Vector::Constant(7, 3.25);
  p.mu = 2.0;
  const RestoreReport r = restore_sdglr(p, unit_line(7));
  EXPECT_LT((r.x_star - p.y).norm(), 1e-12);
}

TEST(RestoreSdglr, MatchesFromScratchLoop) {
  Rng rng(16);
  const Graph g = oracle::random_connected_graph(15, 10, rng);
  const Vector y = oracle::random_vector(15, rng);
  RestoreProblem p;
  p.y = y;
  p.mu = 0.7;
  p.sigma_x = 1.2;
  p.pilot = false;
  p.conv_tol = 1e-8;
  p.cg_tol = 1e-13;
  const RestoreReport r = restore_sdglr(p, g);

  // Alternate weights and a dense solve until the relative change is tiny.
  Vector x = y;
  for (int t = 0; t < 100; ++t) {
    DenseMatrix l = DenseMatrix::Zero(15, 15);
    for (const auto& e : g.edges()) {
      const double w = std::exp(-std::pow(x[e.u] - x[e.v], 2) / (1.2 * 1.2));
      l(e.u, e.v) -= w;
      l(e.v, e.u) -= w;
      l(e.u, e.u) += w;
      l(e.v, e.v) += w;
    }
    const Vector next = oracle::lu_solve(DenseMatrix::Identity(15, 15) + 0.7 * l, y);
    const double change = (next - x).norm() / x.norm();
    x = next;
    if (change < 1e-8) break;
  }
  EXPECT_LT((r.x_star - x).norm() / x.norm(), 1e-6);
}

TEST(DetectGrid, AcceptsLatticesAndRejectsOthers) {
  const GridShape s = detect_grid(grid_graph(5, 3));
  EXPECT_EQ(s.width, 5);
  EXPECT_EQ(s.height, 3);
  EXPECT_EQ(error_of([] { detect_grid(unit_line(4)); }), ErrorCode::kNotAGrid);
  EXPECT_EQ(error_of([] { detect_grid(oracle::rhombus_graph()); }), ErrorCode::kNotAGrid);
}

TEST(Separable, RampImageHasUnitHorizontalGradients) {
  const Graph g = grid_graph(3, 3);
  const Vector x = plane_image(3, 3, 0.0, 0.0, 1.0);  // column index
  const SeparableGrid grid = build_separable_grid(g);
  const GradientField h = gradient_field(grid.horizontal, x);
  const GradientField v = gradient_field(grid.vertical, x);
  EXPECT_EQ(h.size(), 6);
  EXPECT_EQ(v.size(), 6);
  EXPECT_LT((h.alpha - Vector::Ones(6)).norm(), 1e-12);
  EXPECT_LT(v.alpha.norm(), 1e-12);
  RestoreProblem p;
  p.y = x;
  p.mu = 1.0;
  const RestoreReport r = separable_grid_restore(p, g);
  EXPECT_NEAR(r.final_regularizer, 0.0, 1e-12);
}

TEST(Separable, AgreesWithGeneralPathOnMatchingNodeSet) {
  Rng rng(17);
  const Graph g = grid_graph(6, 6);
  const Vector x = oracle::random_vector(36, rng);
  // A general 2D plan whose stencil at (r, c) is the forward pair
  // (r, c+1), (r+1, c). build_dag also reaches the last column through a
  // diagonal stencil, so it is not used here.
  std::vector<std::vector<DagEdge>> out(36);
  std::vector<char> mask(36, 0);
  for (Index r = 0; r + 1 < 6; ++r)
    for (Index c = 0; c + 1 < 6; ++c) {
      const Index i = r * 6 + c;
      out[static_cast<std::size_t>(i)] = {{i + 1, 1.0}, {i + 6, 1.0}};
      mask[static_cast<std::size_t>(i)] = 1;
    }
  const DagGradientPlan general = DagGradientPlan::from_out_edges(g.coords(), out, 2);
  ASSERT_EQ(general.computable_count(), 25);
  const SeparableGrid grid = build_separable_grid(g, &mask);

  const GnlOperator full = planar_operator(g, general);
  const GnlOperator horiz = planar_operator(g, grid.horizontal);
  const GnlOperator vert = planar_operator(g, grid.vertical);
  const double a = gglr_value(full, x);
  const double b = gglr_value(horiz, x) + gglr_value(vert, x);
  EXPECT_NEAR(a, b, 1e-6 * a);

  RestoreProblem p;
  p.y = x;
  p.mu = 0.3;
  p.mode = WeightMode::kPlanarFixed;
  p.false_gradient_multiplier = 0.0;
  const RestoreReport ra = restore(p, g, general);
  const RestoreReport rb = separable_grid_restore(p, g, &mask);
  EXPECT_NEAR(ra.objective_trace.back(), rb.objective_trace.back(),
              1e-6 * ra.objective_trace.back());
  EXPECT_LT((ra.x_star - rb.x_star).norm(), 1e-6 * x.norm());
}

TEST(Separable, RecoversSampledPlaneExactly) {
  // A plane lies in the null space of both axis operators, so sparse samples
  // pin it down; the signal-graph prior only favours constants.
  const Index w = 10;
  const Graph g = grid_graph(w, w);
  const Vector clean = plane_image(w, w, 40.0, 3.0, -2.0);
  Rng rng(18);
  const auto mask = sample_mask(w * w, 0.5, rng);
  std::vector<Index> obs;
  for (Index i = 0; i < w * w; ++i)
    if (mask[static_cast<std::size_t>(i)]) obs.push_back(i);
  RestoreProblem p;
  p.h = ObservationMap::sampling(w * w, obs);
  p.y = p.h->apply(clean);
  p.mu = 0.01;
  p.sigma_x = 10.0;
  p.false_gradient_multiplier = 0.0;
  const RestoreReport gglr = separable_grid_restore(p, g);
  const RestoreReport sdglr = restore_sdglr(p, g);
  EXPECT_LT((gglr.x_star - clean).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_GT((sdglr.x_star - clean).cwiseAbs().maxCoeff(), 0.1);
}

TEST(Separable, NotAGridRejected) {
  RestoreProblem p;
  p.y = Vector::Ones(4);
  p.mu = 1.0;
  EXPECT_EQ(error_of([&] { separable_grid_restore(p, oracle::rhombus_graph()); }),
            ErrorCode::kNotAGrid);
}
