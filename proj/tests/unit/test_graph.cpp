#include <gtest/gtest.h>

#include <cmath>

#include "gglr/error.hpp"
#include "gglr/graph.hpp"
#include "gglr/rng.hpp"
#include "gglr/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace gglr;
using testutil::error_of;
using testutil::vec;

TEST(Graph, EdgesStoredOnceWithSmallerEndpointFirst) {
  const Graph g(3, {{2, 0, 1.0}, {1, 2, 0.5}});
  EXPECT_EQ(g.edge_count(), 2);
  for (const auto& e : g.edges()) EXPECT_LT(e.u, e.v);
  EXPECT_EQ(g.find_edge(0, 2), g.find_edge(2, 0));
  EXPECT_EQ(g.find_edge(0, 1), -1);
  EXPECT_EQ(g.degree(2), 2);
}

TEST(Graph, InvalidStructureRejected) {
  EXPECT_EQ(error_of([] { Graph(2, {{0, 0, 1.0}}); }), ErrorCode::kSelfLoop);
  EXPECT_EQ(error_of([] { Graph(2, {{0, 1, 1.0}, {1, 0, 2.0}}); }),
            ErrorCode::kDuplicateEdge);
  EXPECT_TRUE(error_of([] { Graph(2, {{0, 3, 1.0}}); }).has_value());
  EXPECT_TRUE(error_of([] { Graph(2, {{0, 1, std::nan("")}}); }).has_value());
}

TEST(Graph, MissingCoordinatesReported) {
  EXPECT_EQ(error_of([] { (void)oracle::path_graph(3).coords(); }),
            ErrorCode::kNoCoordinates);
}

TEST(Laplacian, SingleEdge) {
  const DenseMatrix l = laplacian(Graph(2, {{0, 1, 1.0}})).to_dense();
  DenseMatrix expect(2, 2);
  expect << 1, -1, -1, 1;
  EXPECT_EQ(l, expect);
}

TEST(Laplacian, FourNodeLine) {
  const DenseMatrix l = laplacian(oracle::path_graph(4)).to_dense();
  DenseMatrix expect(4, 4);
  expect << 1, -1, 0, 0, -1, 2, -1, 0, 0, -1, 2, -1, 0, 0, -1, 1;
  EXPECT_EQ(l, expect);
}

TEST(Laplacian, RandomGraphIsSymmetricZeroRowSumPsd) {
  Rng rng(31);
  for (int t = 0; t < 5; ++t) {
    const Graph g = oracle::random_connected_graph(30, 40, rng);
    const SparseMatrix l = laplacian(g);
    EXPECT_TRUE(l.is_symmetric());
    const DenseMatrix d = l.to_dense();
    EXPECT_LT(d.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((d - oracle::dense_laplacian(g)).norm(), 1e-12);
    EXPECT_GE(oracle::eigenvalues(d)[0], -1e-10);
  }
}

TEST(Glr, Examples) {
  Rng rng(1);
  const Graph g = oracle::random_connected_graph(12, 10, rng);
  EXPECT_NEAR(glr(g, Vector::Constant(12, 3.5)), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(glr(Graph(2, {{0, 1, 1.0}}), vec({0, 1})), 1.0);
  EXPECT_DOUBLE_EQ(glr(oracle::path_graph(4), vec({4, 2, 0, -2})), 12.0);
}

TEST(Glr, SumFormEqualsQuadraticForm) {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const Graph g = oracle::random_connected_graph(25, 30, rng);
    const Vector x = oracle::random_vector(25, rng);
    const double quad = x.dot(oracle::dense_laplacian(g) * x);
    EXPECT_NEAR(glr(g, x), quad, 1e-10 * std::abs(quad));
    EXPECT_GE(glr(g, x), 0.0);
  }
}

TEST(SdglrWeights, ConstantSignalGivesUnitWeights) {
  const Graph g = sdglr_weights(oracle::path_graph(5), Vector::Constant(5, 2.0),
                                kNoFeatureTerm, 0.3);
  for (const auto& e : g.edges()) EXPECT_DOUBLE_EQ(e.weight, 1.0);
}

TEST(SdglrWeights, DifferenceOfOneSigmaGivesInverseE) {
  const Graph g = sdglr_weights(Graph(2, {{0, 1, 1.0}}), vec({0.0, 0.7}),
                                kNoFeatureTerm, 0.7);
  EXPECT_NEAR(g.edge(0).weight, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(g.edge(0).weight, 0.36788, 1e-5);
}

TEST(SdglrWeights, FiveNodeLineEdgeThreeFour) {
  const Graph g = sdglr_weights(oracle::path_graph(5), vec({2, 2, 1.8, 1.2, 1}),
                                kNoFeatureTerm, std::sqrt(0.1));
  // Nodes 3 and 4 in one-based numbering: values 1.8 and 1.2.
  const double w = g.edge(g.find_edge(2, 3)).weight;
  EXPECT_NEAR(w, std::exp(-3.6), 1e-12);
  // (1.2 - 1)^2 / 0.1 = 0.4 on the last edge, (1.8-2)^2/0.1 = 0.4 too.
  EXPECT_NEAR(g.edge(g.find_edge(3, 4)).weight, std::exp(-0.4), 1e-12);
}

TEST(SdglrWeights, FeatureTermAndShiftInvariance) {
  DenseMatrix f(3, 1);
  f << 0.0, 1.0, 3.0;
  const Graph base(3, {{0, 1, 1.0}, {1, 2, 1.0}}, std::nullopt, f);
  const Vector x = vec({0.1, 0.4, -0.2});
  const Graph a = sdglr_weights(base, x, 2.0, 0.5);
  const Graph b = sdglr_weights(base, (x.array() + 10.0).matrix(), 2.0, 0.5);
  for (Index e = 0; e < 2; ++e) {
    EXPECT_NEAR(a.edge(e).weight, b.edge(e).weight, 1e-15);
    EXPECT_GT(a.edge(e).weight, 0.0);
    EXPECT_LE(a.edge(e).weight, 1.0);
  }
  EXPECT_NEAR(a.edge(1).weight, std::exp(-4.0 / 4.0 - 0.36 / 0.25), 1e-12);
}

TEST(LaplacianApply, LineExample) {
  const Vector lx = laplacian_apply(oracle::path_graph(4), vec({4, 2, 0, -2}));
  EXPECT_LT((lx - vec({2, 0, 0, -2})).norm(), 1e-12);
  EXPECT_LT(laplacian_apply(oracle::path_graph(4), Vector::Constant(4, 7.0)).norm(), 1e-12);
}

TEST(LaplacianApply, PlanarSignalOnAsymmetricStarIsNotAnnihilated) {
  // Centre node 1 at the origin, four neighbours placed asymmetrically; the
  // signal x = p1 + 2 p2 is planar on these coordinates.
  DenseMatrix p(5, 2);
  p << 0.134, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, -1.0;
  const Graph g(5, {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}, {1, 4, 1.0}}, p);
  const Vector x = vec({0.134, 0, 1, 2, -2});
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(x[i], p(i, 0) + 2 * p(i, 1), 1e-12);
  const Vector lx = laplacian_apply(g, x);
  EXPECT_GT(std::abs(lx[1]), 0.1);
  EXPECT_LT((lx - laplacian(g) * x).norm(), 1e-12);
}

TEST(Gershgorin, Examples) {
  EXPECT_DOUBLE_EQ(gershgorin_lower_bound(SparseMatrix::identity(3)), 1.0);
  EXPECT_DOUBLE_EQ(gershgorin_lower_bound(laplacian(Graph(2, {{0, 1, 1.0}}))), 0.0);
}

TEST(Gershgorin, BoundNeverExceedsSmallestEigenvalue) {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const Graph g = oracle::random_connected_graph(20, 25, rng);
    SparseMatrix m = add(laplacian(g), SparseMatrix::diagonal(
                                           (oracle::random_vector(20, rng).array().abs())
                                               .matrix()));
    EXPECT_LE(gershgorin_lower_bound(m), oracle::eigenvalues(m.to_dense())[0] + 1e-12);
  }
}

TEST(Connectivity, Detection) {
  EXPECT_TRUE(is_connected(oracle::path_graph(6)));
  EXPECT_FALSE(is_connected(Graph(4, {{0, 1, 1.0}, {2, 3, 1.0}})));
}
