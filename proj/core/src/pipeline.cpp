#include "gglr/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gglr/embedding.hpp"
#include "gglr/error.hpp"
#include "gglr/io.hpp"
#include "gglr/rng.hpp"
#include "gglr/synthetic.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "cli-io";
using json = nlohmann::json;

[[noreturn]] void bad_spec(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, kModule, "spec: " + what);
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    bad_spec("field '" + key + "' has the wrong type");
  }
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct Loaded {
  Graph graph;
  Vector y;                        // observation (length M)
  std::optional<ObservationMap> h;
  std::optional<Vector> reference;
  bool is_image = false;
  Index width = 0;
  Index height = 0;
};

std::vector<Index> observed_ids(const std::vector<char>& mask) {
  std::vector<Index> ids;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) ids.push_back(static_cast<Index>(i));
  }
  return ids;
}

Vector gather(const Vector& full, const std::vector<Index>& ids) {
  Vector out(static_cast<Index>(ids.size()));
  for (std::size_t k = 0; k < ids.size(); ++k) out[static_cast<Index>(k)] = full[ids[k]];
  return out;
}

Loaded load_inputs(const ProblemSpec& spec) {
  const int sources = !spec.graph_path.empty() + !spec.image_path.empty() +
                      !spec.point_cloud_path.empty() + spec.synthetic.has_value();
  if (sources != 1) bad_spec("exactly one of graph, image, point_cloud, synthetic is required");

  Loaded in;
  std::optional<std::vector<char>> mask;
  Vector full;

  if (spec.synthetic) {
    const auto& s = *spec.synthetic;
    Rng rng(spec.seed);
    Vector clean;
    if (s.kind == "two-plane") {
      in.graph = grid_graph(s.width, s.height);
      clean = two_plane_image(s.width, s.height);
      in.is_image = true;
      in.width = s.width;
      in.height = s.height;
    } else if (s.kind == "three-piece") {
      const Index n = s.width;
      Vector pos(n);
      for (Index i = 0; i < n; ++i) pos[i] = 3.0 * static_cast<double>(i) / static_cast<double>(n - 1);
      in.graph = line_graph(pos);
      clean = three_piece_signal(n);
    } else {
      bad_spec("unknown synthetic kind '" + s.kind + "'");
    }
    in.reference = clean;
    const Index n = clean.size();
    if (spec.task == Task::kDeblur) {
      if (!in.is_image) bad_spec("deblurring needs an image");
      in.h = ObservationMap::blur(binomial_blur(in.width, in.height));
      in.y = add_gaussian_noise(in.h->apply(clean), s.noise_sigma, rng);
      return in;
    }
    // Mask first, so a seed gives the same mask at every noise level.
    if (spec.task == Task::kInterpolate) {
      mask = sample_mask(n, s.missing_fraction, rng);
    }
    full = add_gaussian_noise(clean, s.noise_sigma, rng);
  } else if (!spec.image_path.empty()) {
    const Image img = read_pgm(spec.image_path);
    in.is_image = true;
    in.width = img.width;
    in.height = img.height;
    in.graph = grid_graph(img.width, img.height);
    full = image_to_signal(img);
    if (!spec.reference_path.empty()) {
      const Image ref = read_pgm(spec.reference_path);
      if (ref.width != img.width || ref.height != img.height) {
        throw Error(ErrorCode::kLengthMismatch, kModule, "reference image size differs");
      }
      in.reference = image_to_signal(ref);
    }
    if (spec.task == Task::kInterpolate) {
      if (spec.mask_path.empty()) bad_spec("interpolation needs a mask");
      const Image m = read_pgm(spec.mask_path);
      if (m.width != img.width || m.height != img.height) {
        throw Error(ErrorCode::kLengthMismatch, kModule, "mask size differs from image");
      }
      mask.emplace(m.pixels.size());
      for (std::size_t i = 0; i < m.pixels.size(); ++i) (*mask)[i] = m.pixels[i] != 0;
    }
    if (spec.task == Task::kDeblur) {
      in.h = ObservationMap::blur(binomial_blur(img.width, img.height));
      in.y = full;
      return in;
    }
  } else {
    if (!spec.graph_path.empty()) {
      in.graph = load_graph(spec.graph_path);
      if (spec.signal_path.empty()) bad_spec("graph input needs a signal file");
      full = load_signal(spec.signal_path);
    } else {
      const PointCloud pc = load_point_cloud(spec.point_cloud_path);
      in.graph = knn_graph(pc.positions, spec.knn_k, spec.knn_sigma, spec.sigma_x);
      full = pc.values;
    }
    if (full.size() != in.graph.node_count()) {
      throw Error(ErrorCode::kLengthMismatch, kModule,
                  "signal length does not match the node count");
    }
    if (!spec.reference_path.empty()) {
      in.reference = load_signal(spec.reference_path);
      if (in.reference->size() != full.size()) {
        throw Error(ErrorCode::kLengthMismatch, kModule, "reference length mismatch");
      }
    }
    if (spec.task == Task::kInterpolate) {
      if (spec.mask_path.empty()) bad_spec("interpolation needs a mask");
      const Vector m = load_signal(spec.mask_path);
      if (m.size() != full.size()) {
        throw Error(ErrorCode::kLengthMismatch, kModule, "mask length mismatch");
      }
      mask.emplace(static_cast<std::size_t>(m.size()));
      for (Index i = 0; i < m.size(); ++i) (*mask)[static_cast<std::size_t>(i)] = m[i] != 0.0;
    }
    if (spec.task == Task::kDeblur) bad_spec("deblurring needs an image");
  }

  if (mask) {
    const auto ids = observed_ids(*mask);
    in.h = ObservationMap::sampling(full.size(), ids);
    in.y = gather(full, ids);
  } else {
    in.y = full;
  }
  return in;
}

json vec_json(const std::vector<Index>& v) {
  json a = json::array();
  for (Index i : v) a.push_back(i);
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string task_name(Task t) {
  switch (t) {
    case Task::kDenoise: return "denoise";
    case Task::kInterpolate: return "interpolate";
    case Task::kDeblur: return "deblur";
  }
  return "denoise";
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kAuto: return "auto";
    case Method::kGglr: return "gglr";
    case Method::kSdglr: return "sdglr";
    case Method::kSeparable: return "separable";
  }
  return "gglr";
}

Task parse_task(const std::string& s) {
  if (s == "denoise") return Task::kDenoise;
  if (s == "interpolate") return Task::kInterpolate;
  if (s == "deblur") return Task::kDeblur;
  bad_spec("unknown task '" + s + "'");
}

Method parse_method(const std::string& s) {
  if (s == "auto") return Method::kAuto;
  if (s == "gglr") return Method::kGglr;
  if (s == "sdglr") return Method::kSdglr;
  if (s == "separable") return Method::kSeparable;
  bad_spec("unknown method '" + s + "'");
}

ProblemSpec ProblemSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, kModule, std::string("spec: ") + e.what());
  }
  if (!j.is_object()) bad_spec("top level must be an object");
  ProblemSpec s;
  for (const auto& [key, v] : j.items()) {
    if (key == "graph") s.graph_path = get_as<std::string>(v, key);
    else if (key == "image") s.image_path = get_as<std::string>(v, key);
    else if (key == "point_cloud") s.point_cloud_path = get_as<std::string>(v, key);
    else if (key == "signal") s.signal_path = get_as<std::string>(v, key);
    else if (key == "mask") s.mask_path = get_as<std::string>(v, key);
    else if (key == "reference") s.reference_path = get_as<std::string>(v, key);
    else if (key == "synthetic") {
      if (!v.is_object()) bad_spec("'synthetic' must be an object");
      SyntheticSpec syn;
      for (const auto& [k2, v2] : v.items()) {
        if (k2 == "kind") syn.kind = get_as<std::string>(v2, k2);
        else if (k2 == "width") syn.width = get_as<Index>(v2, k2);
        else if (k2 == "height") syn.height = get_as<Index>(v2, k2);
        else if (k2 == "samples") syn.width = get_as<Index>(v2, k2);
        else if (k2 == "missing_fraction") syn.missing_fraction = get_as<double>(v2, k2);
        else if (k2 == "noise_sigma") syn.noise_sigma = get_as<double>(v2, k2);
        else bad_spec("unknown synthetic field '" + k2 + "'");
      }
      s.synthetic = syn;
    }
    else if (key == "task") s.task = parse_task(get_as<std::string>(v, key));
    else if (key == "method") s.method = parse_method(get_as<std::string>(v, key));
    else if (key == "mu") {
      if (v.is_string()) {
        if (v.get<std::string>() != "auto") bad_spec("mu must be a number or \"auto\"");
        s.mu_auto = true;
        s.mu.reset();
      } else {
        s.mu = get_as<double>(v, key);
      }
    }
    else if (key == "sigma_alpha") s.sigma_alpha = get_as<double>(v, key);
    else if (key == "mode") {
      const auto m = get_as<std::string>(v, key);
      if (m == "signal-dependent") s.mode = WeightMode::kSignalDependent;
      else if (m == "planar-fixed") s.mode = WeightMode::kPlanarFixed;
      else bad_spec("unknown mode '" + m + "'");
    }
    else if (key == "sigma_x") s.sigma_x = get_as<double>(v, key);
    else if (key == "sigma_f") s.sigma_f = get_as<double>(v, key);
    else if (key == "sigma_z") s.sigma_z = get_as<double>(v, key);
    else if (key == "k_plus") s.k_plus = get_as<Index>(v, key);
    else if (key == "embed_dim") s.embed_dim = get_as<Index>(v, key);
    else if (key == "knn_k") s.knn_k = get_as<Index>(v, key);
    else if (key == "knn_sigma") s.knn_sigma = get_as<double>(v, key);
    else if (key == "vbc_threshold") s.vbc_threshold = get_as<double>(v, key);
    else if (key == "false_gradient_multiplier") s.false_gradient_multiplier = get_as<double>(v, key);
    else if (key == "warmup_iters") s.warmup_iters = get_as<Index>(v, key);
    else if (key == "max_iters") s.max_iters = get_as<Index>(v, key);
    else if (key == "conv_tol") s.conv_tol = get_as<double>(v, key);
    else if (key == "anchor") {
      const auto a = get_as<std::string>(v, key);
      if (a == "observation") s.anchor = Anchor::kObservation;
      else if (a == "previous") s.anchor = Anchor::kPreviousEstimate;
      else bad_spec("unknown anchor '" + a + "'");
    }
    else if (key == "psnr_peak") s.psnr_peak = get_as<double>(v, key);
    else if (key == "seed") s.seed = get_as<std::uint64_t>(v, key);
    else if (key == "out_report") s.out_report = get_as<std::string>(v, key);
    else if (key == "out_signal") s.out_signal = get_as<std::string>(v, key);
    else if (key == "out_image") s.out_image = get_as<std::string>(v, key);
    else if (key == "out_trace_csv") s.out_trace_csv = get_as<std::string>(v, key);
    else bad_spec("unknown field '" + key + "'");
  }
  return s;
}

ProblemSpec ProblemSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, kModule, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ---------------------------------------------------------------------------

std::string RunReport::to_json(bool with_timings) const {
  json j;
  j["status"] = ok ? "ok" : "error";
  j["exit_code"] = exit_code;
  if (!ok) {
    j["error"] = {{"name", error_name}, {"module", error_module}, {"message", error_message}};
  }
  j["task"] = task;
  j["method"] = method;
  j["nodes"] = nodes;
  j["edges"] = edges;
  j["embedded"] = embedded;
  j["vbc"] = vbc ? json(*vbc) : json(nullptr);
  j["mu_used"] = mu_used;
  j["mu_automatic"] = mu_automatic;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["objective_trace"] = objective_trace;
  j["final_regularizer"] = final_regularizer;
  j["psnr"] = psnr ? json(*psnr) : json(nullptr);
  j["removed_false_gradients"] = vec_json(removed_false_gradients);
  j["excluded_nodes"] = excluded_nodes;
  j["warnings"] = warnings;
  if (with_timings) j["timings_ms"] = timings_ms;
  return j.dump(2);
}

RunReport RunReport::from_json(const std::string& text) {
  RunReport r;
  json j;
  try {
    j = json::parse(text);
    r.ok = j.at("status").get<std::string>() == "ok";
    r.exit_code = j.at("exit_code").get<int>();
    if (j.contains("error")) {
      r.error_name = j["error"].at("name").get<std::string>();
      r.error_module = j["error"].at("module").get<std::string>();
      r.error_message = j["error"].at("message").get<std::string>();
    }
    r.task = j.at("task").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.nodes = j.at("nodes").get<Index>();
    r.edges = j.at("edges").get<Index>();
    r.embedded = j.at("embedded").get<bool>();
    if (!j.at("vbc").is_null()) r.vbc = j["vbc"].get<double>();
    r.mu_used = j.at("mu_used").get<double>();
    r.mu_automatic = j.at("mu_automatic").get<bool>();
    r.iterations = j.at("iterations").get<Index>();
    r.converged = j.at("converged").get<bool>();
    r.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    r.final_regularizer = j.at("final_regularizer").get<double>();
    if (!j.at("psnr").is_null()) r.psnr = j["psnr"].get<double>();
    r.removed_false_gradients = j.at("removed_false_gradients").get<std::vector<Index>>();
    r.excluded_nodes = j.at("excluded_nodes").get<Index>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("timings_ms")) {
      r.timings_ms = j["timings_ms"].get<std::map<std::string, double>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, kModule, std::string("report: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------

RunReport run(const ProblemSpec& spec) {
  RunReport report;
  report.task = task_name(spec.task);
  report.method = method_name(spec.method);
  Stopwatch clock;
  try {
    Loaded in = load_inputs(spec);
    Method method = spec.method;
    if (method == Method::kAuto) method = in.is_image ? Method::kSeparable : Method::kGglr;
    report.method = method_name(method);
    report.nodes = in.graph.node_count();
    report.edges = in.graph.edge_count();
    report.timings_ms["load"] = clock.lap_ms();

    if (!in.graph.has_coords() && method != Method::kSdglr) {
      const ManifoldCheck check = is_manifold_graph(in.graph, spec.vbc_threshold);
      report.vbc = check.vbc;
      if (!check.qualified) {
        throw Error(ErrorCode::kNotManifold, "embedding",
                    "VBC " + format_double(check.vbc) + " exceeds threshold " +
                        format_double(check.threshold) +
                        ": graph is not a manifold graph");
      }
      const Embedding emb = embed(in.graph, spec.embed_dim);
      in.graph = in.graph.with_coords(emb.p);
      report.embedded = true;
      report.timings_ms["embed"] = clock.lap_ms();
    }

    RestoreProblem problem;
    problem.y = in.y;
    problem.h = in.h;
    if (spec.mu) {
      problem.mu = spec.mu;
    } else if (spec.task != Task::kDenoise) {
      if (spec.mu_auto) bad_spec("automatic mu is only available for denoising");
      problem.mu = 0.01;
    }
    if (spec.sigma_alpha) {
      problem.sigma_alpha = *spec.sigma_alpha;
    } else if (!spec.point_cloud_path.empty()) {
      problem.sigma_alpha = 10.0;
    } else if (!spec.graph_path.empty() && spec.mode == WeightMode::kSignalDependent &&
               method != Method::kSdglr) {
      bad_spec("sigma_alpha is required for graph input");
    } else {
      problem.sigma_alpha = 1.5;
    }
    problem.mode = spec.mode;
    problem.false_gradient_multiplier = spec.false_gradient_multiplier.value_or(
        spec.task == Task::kDenoise ? 2.0 : 0.0);
    problem.warmup_iters = spec.warmup_iters;
    problem.max_iters = spec.max_iters;
    problem.conv_tol = spec.conv_tol;
    problem.k_plus = spec.k_plus;
    problem.anchor = spec.anchor;
    problem.sigma_z = spec.sigma_z;
    if (!problem.sigma_z && spec.synthetic) problem.sigma_z = spec.synthetic->noise_sigma;
    problem.sigma_x = spec.sigma_x;
    problem.sigma_f = spec.sigma_f;

    RestoreReport rr;
    switch (method) {
      case Method::kGglr: {
        const DagGradientPlan plan = build_dag(in.graph, spec.k_plus);
        report.timings_ms["plan"] = clock.lap_ms();
        rr = restore(problem, in.graph, plan);
        break;
      }
      case Method::kSdglr:
        rr = restore_sdglr(problem, in.graph);
        break;
      case Method::kSeparable:
      case Method::kAuto:
        rr = separable_grid_restore(problem, in.graph);
        break;
    }
    report.timings_ms["restore"] = clock.lap_ms();

    report.mu_used = rr.mu_used;
    report.mu_automatic = rr.mu_automatic;
    report.iterations = rr.iterations;
    report.converged = rr.converged;
    report.objective_trace = rr.objective_trace;
    report.final_regularizer = rr.final_regularizer;
    report.removed_false_gradients = rr.removed_false_gradients;
    report.excluded_nodes = static_cast<Index>(rr.excluded_nodes.size());
    report.warnings = rr.warnings;

    if (in.reference) {
      double peak = 255.0;
      if (spec.psnr_peak) {
        peak = *spec.psnr_peak;
      } else if (!in.is_image) {
        peak = in.reference->maxCoeff() - in.reference->minCoeff();
        if (!(peak > 0.0)) peak = 1.0;
      }
      report.psnr = psnr(rr.x_star, *in.reference, peak);
    }

    if (!spec.out_signal.empty()) save_signal(rr.x_star, spec.out_signal);
    if (!spec.out_image.empty()) {
      if (!in.is_image) bad_spec("out_image needs an image input");
      write_pgm(signal_to_image(rr.x_star, in.width, in.height), spec.out_image);
    }
    if (!spec.out_trace_csv.empty()) {
      const auto count = static_cast<Index>(rr.objective_trace.size());
      Vector it(count);
      for (Index k = 0; k < count; ++k) it[k] = static_cast<double>(k);
      write_csv(spec.out_trace_csv, {"iteration", "objective"},
                {it, Eigen::Map<const Vector>(rr.objective_trace.data(), count)});
    }
    report.timings_ms["output"] = clock.lap_ms();
    report.ok = true;
    report.exit_code = 0;
  } catch (const Error& e) {
    report.ok = false;
    report.error_name = std::string(e.name());
    report.error_module = e.module();
    report.error_message = e.what();
    report.exit_code = exit_code(e.code());
  } catch (const std::exception& e) {
    report.ok = false;
    report.error_name = "Unclassified";
    report.error_module = "cli-io";
    report.error_message = e.what();
    report.exit_code = 1;
  }
  if (!spec.out_report.empty()) {
    std::ofstream out(spec.out_report);
    out << report.to_json() << '\n';
  }
  return report;
}

}  // namespace gglr
