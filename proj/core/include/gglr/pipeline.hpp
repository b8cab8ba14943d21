#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gglr/gng.hpp"
#include "gglr/restore.hpp"

namespace gglr {

enum class Task { kDenoise, kInterpolate, kDeblur };
// kAuto: separable per-axis GGLR on image grids, general GGLR elsewhere.
enum class Method { kAuto, kGglr, kSdglr, kSeparable };

struct SyntheticSpec {
  std::string kind = "two-plane";  // two-plane | three-piece
  Index width = 32;                // samples for three-piece
  Index height = 32;
  double missing_fraction = 0.0;
  double noise_sigma = 0.0;
};

/// One batch run: inputs, task, method parameters and outputs. Parsed from
/// a flat JSON object; command-line flags override fields afterwards.
struct ProblemSpec {
  // Exactly one input source.
  std::string graph_path;
  std::string image_path;
  std::string point_cloud_path;
  std::optional<SyntheticSpec> synthetic;

  std::string signal_path;     // graph input: observation per node
  std::string mask_path;       // 0 = missing (PGM for images, text otherwise)
  std::string reference_path;  // clean signal/image for PSNR

  Task task = Task::kDenoise;
  Method method = Method::kAuto;

  std::optional<double> mu;    // unset: auto for denoise, 0.01 otherwise
  bool mu_auto = false;
  // Unset: 1.5 for images and synthetic data, 10 for point clouds;
  // graph input in signal-dependent mode must set it.
  std::optional<double> sigma_alpha;
  WeightMode mode = WeightMode::kSignalDependent;
  double sigma_x = 10.0;
  double sigma_f = kNoFeatureTerm;
  std::optional<double> sigma_z;
  Index k_plus = 0;
  Index embed_dim = 2;
  Index knn_k = 20;
  double knn_sigma = 1.0;
  double vbc_threshold = 1e-4;
  // Unset: 2 for denoising, disabled (0) for interpolation and deblurring.
  std::optional<double> false_gradient_multiplier;
  Index warmup_iters = 5;
  Index max_iters = 100;
  double conv_tol = 1e-6;
  Anchor anchor = Anchor::kObservation;
  std::optional<double> psnr_peak;
  std::uint64_t seed = 1;

  std::string out_report;
  std::string out_signal;
  std::string out_image;
  std::string out_trace_csv;

  static ProblemSpec from_json(const std::string& text);
  static ProblemSpec load(const std::string& path);
};

/// Run summary. Round-trips through to_json / from_json.
struct RunReport {
  bool ok = false;
  int exit_code = 0;
  std::string error_name;
  std::string error_module;
  std::string error_message;

  std::string task;
  std::string method;
  Index nodes = 0;
  Index edges = 0;
  bool embedded = false;
  std::optional<double> vbc;
  double mu_used = 0.0;
  bool mu_automatic = false;
  Index iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  double final_regularizer = 0.0;
  std::optional<double> psnr;
  std::vector<Index> removed_false_gradients;
  Index excluded_nodes = 0;
  std::vector<std::string> warnings;
  std::map<std::string, double> timings_ms;

  std::string to_json(bool with_timings = true) const;
  static RunReport from_json(const std::string& text);

  bool operator==(const RunReport&) const = default;
};

std::string task_name(Task t);
std::string method_name(Method m);
Task parse_task(const std::string& s);
Method parse_method(const std::string& s);

/// load -> (VBC gate + embedding when the graph has no coordinates) ->
/// plan -> restore -> metrics -> outputs. Never throws for library errors:
/// they are reported with their name and exit code.
RunReport run(const ProblemSpec& spec);

}  // namespace gglr
