#pragma once

#include "gglr/graph.hpp"
#include "gglr/types.hpp"

namespace gglr {

/// Two planar pieces separated by a slanted edge with a jump across it,
/// row-major, values within [0, 255].
Vector two_plane_image(Index width, Index height);

/// Single plane a0 + a_r r + a_c c over a row-major grid.
Vector plane_image(Index width, Index height, double a0, double a_r, double a_c);

/// Three linear pieces on [0, 3]: 2 + 2p, 6 - 2p, -1 + p. Continuous at
/// p = 1, with a jump at p = 2. Sampled at p_i = 3 i / (n - 1).
Vector three_piece_signal(Index n);

/// Path graph with unit weights and 1D coordinates `positions`.
Graph line_graph(const Vector& positions);

}  // namespace gglr
