#include "gglr/synthetic.hpp"

#include "gglr/error.hpp"

namespace gglr {

Vector two_plane_image(Index width, Index height) {
  if (width < 2 || height < 2) {
    throw Error(ErrorCode::kInvalidArgument, "cli-io", "image must be at least 2x2");
  }
  Vector x(width * height);
  const double mid_c = 0.5 * static_cast<double>(width);
  const double mid_r = 0.5 * static_cast<double>(height);
  const double sr = 64.0 / static_cast<double>(height);
  const double sc = 64.0 / static_cast<double>(width);
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      const double rr = static_cast<double>(r);
      const double cc = static_cast<double>(c);
      const bool right = cc >= mid_c + 0.5 * (rr - mid_r);
      x[r * width + c] = right ? 200.0 - 1.5 * sc * cc + 0.75 * sr * rr
                               : 40.0 + 1.25 * sc * cc + 0.75 * sr * rr;
    }
  }
  return x;
}

Vector plane_image(Index width, Index height, double a0, double a_r, double a_c) {
  Vector x(width * height);
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      x[r * width + c] = a0 + a_r * static_cast<double>(r) + a_c * static_cast<double>(c);
    }
  }
  return x;
}

Vector three_piece_signal(Index n) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument, "cli-io", "need at least 2 samples");
  }
  Vector x(n);
  for (Index i = 0; i < n; ++i) {
    const double p = 3.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    if (p < 1.0) {
      x[i] = 2.0 + 2.0 * p;
    } else if (p < 2.0) {
      x[i] = 6.0 - 2.0 * p;
    } else {
      x[i] = -1.0 + p;
    }
  }
  return x;
}

Graph line_graph(const Vector& positions) {
  const Index n = positions.size();
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  DenseMatrix coords = positions;
  return Graph(n, std::move(edges), std::move(coords));
}

}  // namespace gglr
