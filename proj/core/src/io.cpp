#include "gglr/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "gglr/error.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "cli-io";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto b = s.find_first_not_of(" \t\r", pos);
    if (b == std::string_view::npos) break;
    auto e = s.find_first_of(" \t\r", b);
    if (e == std::string_view::npos) e = s.size();
    out.push_back(s.substr(b, e - b));
    pos = e;
  }
  return out;
}

[[noreturn]] void parse_fail(const std::string& source, std::int64_t line,
                             const std::string& what) {
  throw Error(ErrorCode::kParseError, kModule,
              source + ":" + std::to_string(line) + ": " + what, line);
}

double to_double(std::string_view tok, const std::string& source,
                 std::int64_t line) {
  double v = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    parse_fail(source, line, "bad number '" + std::string(tok) + "'");
  }
  return v;
}

Index to_index(std::string_view tok, const std::string& source,
               std::int64_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
    parse_fail(source, line, "bad index '" + std::string(tok) + "'");
  }
  return static_cast<Index>(v);
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::kIoError, kModule, "cannot write " + path);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Graph parse_graph(std::istream& in, const std::string& source) {
  std::string raw;
  std::int64_t line_no = 0;
  Index n = -1;
  std::vector<Edge> edges;
  std::vector<std::int64_t> edge_lines;
  enum class Section { kEdges, kCoords, kFeatures } section = Section::kEdges;
  DenseMatrix coords;
  DenseMatrix features;
  bool has_coords = false;
  bool has_features = false;
  Index block_row = 0;

  auto finish_block = [&](std::int64_t at) {
    if (section == Section::kCoords && block_row != n) {
      parse_fail(source, at, "coordinate block has " + std::to_string(block_row) +
                                 " rows, expected " + std::to_string(n));
    }
    if (section == Section::kFeatures && block_row != n) {
      parse_fail(source, at, "feature block has " + std::to_string(block_row) +
                                 " rows, expected " + std::to_string(n));
    }
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto toks = split(line);
      if (toks[0] == "#coords" || toks[0] == "#features") {
        if (n < 0) parse_fail(source, line_no, "block before node count");
        if (toks.size() != 2) parse_fail(source, line_no, "block header needs a dimension");
        const Index dim = to_index(toks[1], source, line_no);
        if (dim == 0) parse_fail(source, line_no, "block dimension must be positive");
        finish_block(line_no);
        block_row = 0;
        if (toks[0] == "#coords") {
          if (has_coords) parse_fail(source, line_no, "duplicate coordinate block");
          has_coords = true;
          coords.resize(n, dim);
          section = Section::kCoords;
        } else {
          if (has_features) parse_fail(source, line_no, "duplicate feature block");
          has_features = true;
          features.resize(n, dim);
          section = Section::kFeatures;
        }
      }
      continue;
    }
    const auto toks = split(line);
    if (n < 0) {
      if (toks.size() != 1) parse_fail(source, line_no, "expected node count");
      n = to_index(toks[0], source, line_no);
      continue;
    }
    if (section == Section::kEdges) {
      if (toks.size() != 3) parse_fail(source, line_no, "expected 'i j w'");
      const Index u = to_index(toks[0], source, line_no);
      const Index v = to_index(toks[1], source, line_no);
      const double w = to_double(toks[2], source, line_no);
      if (u >= n || v >= n) parse_fail(source, line_no, "node id out of range");
      if (w < 0.0) parse_fail(source, line_no, "negative weight");
      edges.push_back({u, v, w});
      edge_lines.push_back(line_no);
      continue;
    }
    DenseMatrix& block = section == Section::kCoords ? coords : features;
    if (block_row >= n) parse_fail(source, line_no, "too many rows in block");
    if (static_cast<Index>(toks.size()) != block.cols()) {
      parse_fail(source, line_no, "expected " + std::to_string(block.cols()) + " values");
    }
    for (Index k = 0; k < block.cols(); ++k) {
      block(block_row, k) = to_double(toks[static_cast<std::size_t>(k)], source, line_no);
    }
    ++block_row;
  }
  if (n < 0) parse_fail(source, line_no, "missing node count");
  finish_block(line_no);

  try {
    return Graph(n, std::move(edges),
                 has_coords ? std::optional<DenseMatrix>(coords) : std::nullopt,
                 has_features ? std::optional<DenseMatrix>(features) : std::nullopt);
  } catch (const Error& e) {
    if ((e.code() == ErrorCode::kDuplicateEdge || e.code() == ErrorCode::kSelfLoop) &&
        e.index() >= 0 && static_cast<std::size_t>(e.index()) < edge_lines.size()) {
      const auto at = edge_lines[static_cast<std::size_t>(e.index())];
      throw Error(e.code(), kModule,
                  source + ":" + std::to_string(at) + ": " + e.what(), at);
    }
    throw;
  }
}

Graph load_graph(const std::string& path) {
  auto in = open_in(path);
  return parse_graph(in, path);
}

std::string format_graph(const Graph& g) {
  std::string out = std::to_string(g.node_count()) + "\n";
  for (const auto& e : g.edges()) {
    out += std::to_string(e.u) + " " + std::to_string(e.v) + " " +
           format_double(e.weight) + "\n";
  }
  auto block = [&](const char* name, const DenseMatrix& m) {
    out += std::string(name) + " " + std::to_string(m.cols()) + "\n";
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index k = 0; k < m.cols(); ++k) {
        if (k) out += ' ';
        out += format_double(m(i, k));
      }
      out += '\n';
    }
  };
  if (g.has_coords()) block("#coords", g.coords());
  if (g.has_features()) block("#features", g.features());
  return out;
}

void save_graph(const Graph& g, const std::string& path) {
  auto out = open_out(path);
  out << format_graph(g);
  if (!out) throw Error(ErrorCode::kIoError, kModule, "write failed: " + path);
}

Vector load_signal(const std::string& path) {
  auto in = open_in(path);
  std::vector<double> values;
  std::string raw;
  std::int64_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    values.push_back(to_double(line, path, line_no));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

void save_signal(const Vector& x, const std::string& path) {
  auto out = open_out(path);
  for (Index i = 0; i < x.size(); ++i) out << format_double(x[i]) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, kModule, "write failed: " + path);
}

// ---------------------------------------------------------------------------

Image read_pgm(const std::string& path) {
  auto in = open_in(path, true);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorCode::kParseError, kModule, path + ": " + what);
  };
  auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    const auto start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos == start) fail("bad header");
    return std::stol(data.substr(start, pos - start));
  };
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') fail("not a binary PGM (P5)");
  pos = 2;
  const long w = read_int();
  const long h = read_int();
  const long maxval = read_int();
  if (w <= 0 || h <= 0) fail("bad dimensions");
  if (maxval <= 0 || maxval > 255) fail("only 8-bit PGM is supported");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
    fail("bad header terminator");
  }
  ++pos;
  const auto count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() - pos < count) fail("truncated pixel data");
  Image img;
  img.width = w;
  img.height = h;
  img.pixels.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                    data.begin() + static_cast<std::ptrdiff_t>(pos + count));
  return img;
}

void write_pgm(const Image& img, const std::string& path) {
  if (static_cast<Index>(img.pixels.size()) != img.width * img.height) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "pixel count mismatch");
  }
  auto out = open_out(path, true);
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw Error(ErrorCode::kIoError, kModule, "write failed: " + path);
}

Vector image_to_signal(const Image& img) {
  Vector x(static_cast<Index>(img.pixels.size()));
  for (Index i = 0; i < x.size(); ++i) x[i] = img.pixels[static_cast<std::size_t>(i)];
  return x;
}

Image signal_to_image(const Vector& x, Index width, Index height) {
  if (x.size() != width * height) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "signal does not fit the image");
  }
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) {
    const double v = std::clamp(std::round(x[i]), 0.0, 255.0);
    img.pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
  }
  return img;
}

Graph grid_graph(Index width, Index height) {
  if (width < 2 || height < 2) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "grid needs width, height >= 2");
  }
  const Index n = width * height;
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2 * n));
  DenseMatrix coords(n, 2);
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      const Index i = r * width + c;
      coords(i, 0) = static_cast<double>(r);
      coords(i, 1) = static_cast<double>(c);
      if (c + 1 < width) edges.push_back({i, i + 1, 1.0});
      if (r + 1 < height) edges.push_back({i, i + width, 1.0});
    }
  }
  return Graph(n, std::move(edges), std::move(coords));
}

SparseMatrix binomial_blur(Index width, Index height) {
  const double k[3] = {0.25, 0.5, 0.25};
  std::vector<Triplet> t;
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      for (Index dr = -1; dr <= 1; ++dr) {
        for (Index dc = -1; dc <= 1; ++dc) {
          const Index rr = r + dr;
          const Index cc = c + dc;
          if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
          t.push_back({r * width + c, rr * width + cc, k[dr + 1] * k[dc + 1]});
        }
      }
    }
  }
  return SparseMatrix::from_triplets(width * height, width * height, std::move(t));
}

// ---------------------------------------------------------------------------

PointCloud load_point_cloud(const std::string& path) {
  auto in = open_in(path);
  std::vector<double> rows;
  std::string raw;
  std::int64_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto toks = split(line);
    if (toks.size() != 4) parse_fail(path, line_no, "expected 'x y z v'");
    for (const auto& tok : toks) rows.push_back(to_double(tok, path, line_no));
  }
  const auto n = static_cast<Index>(rows.size() / 4);
  PointCloud pc;
  pc.positions.resize(n, 3);
  pc.values.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < 3; ++k) pc.positions(i, k) = rows[static_cast<std::size_t>(4 * i + k)];
    pc.values[i] = rows[static_cast<std::size_t>(4 * i + 3)];
  }
  return pc;
}

Graph knn_graph(const DenseMatrix& points, Index k, double sigma_f,
                double sigma_x, const Vector& signal) {
  const Index n = points.rows();
  if (k < 1 || k >= n) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "need 1 <= k < N");
  }
  if (!(sigma_f > 0.0) || (signal.size() > 0 && !(sigma_x > 0.0))) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "kernel widths must be positive");
  }
  if (signal.size() != 0 && signal.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "signal length mismatch");
  }
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(n * k));
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (points.row(i) - points.row(j)).squaredNorm();
      if (d == 0.0) {
        throw Error(ErrorCode::kDegeneratePoints, kModule,
                    "points " + std::to_string(std::min(i, j)) + " and " +
                        std::to_string(std::max(i, j)) + " coincide",
                    std::min(i, j));
      }
      dist[m++] = {d, j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (Index q = 0; q < k; ++q) {
      const Index j = dist[static_cast<std::size_t>(q)].second;
      pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  const double inv_f = std::isfinite(sigma_f) ? 1.0 / (sigma_f * sigma_f) : 0.0;
  const double inv_x = signal.size() > 0 ? 1.0 / (sigma_x * sigma_x) : 0.0;
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    double expo = (points.row(u) - points.row(v)).squaredNorm() * inv_f;
    if (signal.size() > 0) {
      const double d = signal[u] - signal[v];
      expo += d * d * inv_x;
    }
    edges.push_back({u, v, std::exp(-expo)});
  }
  return Graph(n, std::move(edges), points, points);
}

// ---------------------------------------------------------------------------

double psnr(const Vector& x, const Vector& ref, double peak) {
  if (x.size() != ref.size()) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "psnr: length mismatch");
  }
  if (!(peak > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "psnr: peak must be positive");
  }
  if (x.size() == 0) return kPsnrCap;
  const double mse = (x - ref).squaredNorm() / static_cast<double>(x.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vector>& columns) {
  if (header.size() != columns.size()) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "csv: header/column mismatch");
  }
  Index rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) {
      throw Error(ErrorCode::kLengthMismatch, kModule, "csv: ragged columns");
    }
  }
  auto out = open_out(path);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (Index r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      out << (k ? "," : "") << format_double(columns[k][r]);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, kModule, "write failed: " + path);
}

}  // namespace gglr
