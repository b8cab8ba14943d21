#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "gglr/graph.hpp"
#include "gglr/types.hpp"

namespace gglr {

// ---------------------------------------------------------------------------
// Graph text format
//
//   N
//   i j w            one line per edge, 0-based node ids
//   #coords K        optional: N lines of K reals
//   #features M      optional: N lines of M reals
//
// Blank lines and other lines starting with '#' are ignored.
// ---------------------------------------------------------------------------

Graph parse_graph(std::istream& in, const std::string& source = "<stream>");
Graph load_graph(const std::string& path);
std::string format_graph(const Graph& g);
void save_graph(const Graph& g, const std::string& path);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

// One value per line.
Vector load_signal(const std::string& path);
void save_signal(const Vector& x, const std::string& path);

// ---------------------------------------------------------------------------
// Images (binary PGM, P5, 8-bit)
// ---------------------------------------------------------------------------

struct Image {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

Image read_pgm(const std::string& path);
void write_pgm(const Image& img, const std::string& path);

// Row-major pixel values as doubles.
Vector image_to_signal(const Image& img);
// Rounds and clamps to [0, 255].
Image signal_to_image(const Vector& x, Index width, Index height);

/// 4-connected width x height lattice, unit weights, node r * width + c with
/// coordinates (r, c).
Graph grid_graph(Index width, Index height);

/// 3x3 binomial blur ([1 2 1]^T [1 2 1] / 16) with zero padding,
/// as an N x N sparse matrix over a row-major image.
SparseMatrix binomial_blur(Index width, Index height);

// ---------------------------------------------------------------------------
// Point clouds: "x y z v" per line
// ---------------------------------------------------------------------------

struct PointCloud {
  DenseMatrix positions;  // N x 3
  Vector values;
};

PointCloud load_point_cloud(const std::string& path);

/// Symmetrized k-nearest-neighbor graph (an edge is kept when either end
/// selects the other). Weights are exp(-|p_i - p_j|^2 / sigma_f^2 -
/// (s_i - s_j)^2 / sigma_x^2), the signal term only when `signal` is
/// non-empty. Positions become both coordinates and features. Throws
/// kDegeneratePoints on duplicate points.
Graph knn_graph(const DenseMatrix& points, Index k, double sigma_f,
                double sigma_x, const Vector& signal = {});

// ---------------------------------------------------------------------------
// Metrics and plot data
// ---------------------------------------------------------------------------

inline constexpr double kPsnrCap = 999.0;

/// 10 log10(peak^2 / MSE), capped at kPsnrCap.
double psnr(const Vector& x, const Vector& ref, double peak = 255.0);

/// Writes a CSV with the given header and equal-length numeric columns.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vector>& columns);

}  // namespace gglr
