// gglr: batch restoration of signals on manifold graphs.
//
// Exit codes: 0 success, 1 unclassified failure, 2 bad command line,
// 10 + n for library error class n (see gglr/error.hpp; `gglr errors`
// prints the table).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gglr/embedding.hpp"
#include "gglr/error.hpp"
#include "gglr/io.hpp"
#include "gglr/pipeline.hpp"
#include "gglr/rng.hpp"
#include "gglr/synthetic.hpp"

namespace {

int report_error(const gglr::Error& e) {
  std::cerr << "error: " << e.what() << '\n';
  return gglr::exit_code(e.code());
}

struct RunArgs {
  std::string spec_path;
  std::string task;
  std::string mu;
  std::optional<gglr::Index> k_plus;
  std::optional<double> sigma_alpha;
  std::optional<double> vbc_threshold;
  std::optional<std::uint64_t> seed;
  std::optional<gglr::Index> max_iters;
  std::string out;
  bool no_timings = false;
};

int do_run(const RunArgs& a) {
  gglr::ProblemSpec spec;
  try {
    spec = gglr::ProblemSpec::load(a.spec_path);
    if (!a.task.empty()) spec.task = gglr::parse_task(a.task);
    if (!a.mu.empty()) {
      if (a.mu == "auto") {
        spec.mu.reset();
        spec.mu_auto = true;
      } else {
        char* end = nullptr;
        const double v = std::strtod(a.mu.c_str(), &end);
        if (end == a.mu.c_str() || *end != '\0') {
          throw gglr::Error(gglr::ErrorCode::kInvalidArgument, "cli-io",
                            "--mu expects a number or 'auto'");
        }
        spec.mu = v;
        spec.mu_auto = false;
      }
    }
    if (a.k_plus) spec.k_plus = *a.k_plus;
    if (a.sigma_alpha) spec.sigma_alpha = *a.sigma_alpha;
    if (a.vbc_threshold) spec.vbc_threshold = *a.vbc_threshold;
    if (a.seed) spec.seed = *a.seed;
    if (a.max_iters) spec.max_iters = *a.max_iters;
    if (!a.out.empty()) spec.out_report = a.out;
  } catch (const gglr::Error& e) {
    return report_error(e);
  }

  // The report file (if any) is written by run(); always echo to stdout.
  const gglr::RunReport report = gglr::run(spec);
  std::cout << report.to_json(!a.no_timings) << '\n';
  if (!report.ok) {
    std::cerr << "error: " << report.error_name << " [" << report.error_module
              << "]: " << report.error_message << '\n';
  }
  return report.exit_code;
}

struct SynthArgs {
  std::string kind = "two-plane";
  gglr::Index width = 32;
  gglr::Index height = 32;
  double noise = 0.0;
  double missing = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string mask;
  std::string clean;
};

int do_synth(const SynthArgs& a) {
  try {
    gglr::Rng rng(a.seed);
    if (a.kind == "two-plane" || a.kind == "plane") {
      const gglr::Vector clean = a.kind == "two-plane"
                                     ? gglr::two_plane_image(a.width, a.height)
                                     : gglr::plane_image(a.width, a.height, 60.0, 1.5, 2.0);
      // Mask before noise, matching synthetic runs of the same seed.
      if (!a.mask.empty()) {
        const auto m = gglr::sample_mask(clean.size(), a.missing, rng);
        gglr::Image img{a.width, a.height, std::vector<std::uint8_t>(m.size())};
        for (std::size_t i = 0; i < m.size(); ++i) img.pixels[i] = m[i] ? 255 : 0;
        gglr::write_pgm(img, a.mask);
      }
      const gglr::Vector noisy = gglr::add_gaussian_noise(clean, a.noise, rng);
      gglr::write_pgm(gglr::signal_to_image(noisy, a.width, a.height), a.out);
      if (!a.clean.empty()) {
        gglr::write_pgm(gglr::signal_to_image(clean, a.width, a.height), a.clean);
      }
    } else if (a.kind == "three-piece") {
      const gglr::Vector clean = gglr::three_piece_signal(a.width);
      gglr::save_signal(gglr::add_gaussian_noise(clean, a.noise, rng), a.out);
      if (!a.clean.empty()) gglr::save_signal(clean, a.clean);
    } else {
      throw gglr::Error(gglr::ErrorCode::kInvalidArgument, "cli-io",
                        "unknown kind '" + a.kind + "'");
    }
  } catch (const gglr::Error& e) {
    return report_error(e);
  }
  return 0;
}

int do_vbc(const std::string& path, double threshold) {
  try {
    const gglr::Graph g = gglr::load_graph(path);
    const gglr::ManifoldCheck c = gglr::is_manifold_graph(g, threshold);
    std::cout << "vbc " << gglr::format_double(c.vbc) << "\nthreshold "
              << gglr::format_double(c.threshold) << "\nqualified "
              << (c.qualified ? "yes" : "no") << '\n';
  } catch (const gglr::Error& e) {
    return report_error(e);
  }
  return 0;
}

int do_embed(const std::string& path, gglr::Index dim, const std::string& out) {
  try {
    const gglr::Graph g = gglr::load_graph(path);
    const gglr::Embedding emb = gglr::embed(g, dim);
    const gglr::Graph with = g.with_coords(emb.p);
    if (out.empty()) {
      std::cout << gglr::format_graph(with);
    } else {
      gglr::save_graph(with, out);
    }
    std::cerr << "gamma " << gglr::format_double(emb.gamma) << " epsilon "
              << gglr::format_double(emb.epsilon) << '\n';
  } catch (const gglr::Error& e) {
    return report_error(e);
  }
  return 0;
}

void print_error_table() {
  std::cout << "0 ok\n1 Unclassified\n2 UsageError\n";
  for (int c = 1; c <= static_cast<int>(gglr::ErrorCode::kIoError); ++c) {
    const auto code = static_cast<gglr::ErrorCode>(c);
    std::cout << gglr::exit_code(code) << ' ' << gglr::error_name(code) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph signal restoration with gradient graph Laplacian regularization"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a restoration described by a JSON spec");
  run->add_option("spec", run_args.spec_path, "Spec file")->required()->check(CLI::ExistingFile);
  run->add_option("--task", run_args.task, "denoise | interpolate | deblur");
  run->add_option("--mu", run_args.mu, "Tradeoff parameter, or 'auto'");
  run->add_option("--k-plus", run_args.k_plus, "Directed neighbours per gradient");
  run->add_option("--sigma-alpha", run_args.sigma_alpha, "Gradient-similarity scale");
  run->add_option("--vbc-threshold", run_args.vbc_threshold, "Manifold-graph VBC threshold");
  run->add_option("--seed", run_args.seed, "Seed for synthetic noise and masks");
  run->add_option("--max-iters", run_args.max_iters, "Iteration cap");
  run->add_option("--out", run_args.out, "Also write the JSON report here");
  run->add_flag("--no-timings", run_args.no_timings, "Omit wall-clock timings from stdout");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Write a synthetic test signal");
  synth->add_option("--kind", synth_args.kind, "two-plane | plane | three-piece");
  synth->add_option("--width", synth_args.width, "Width (samples for three-piece)");
  synth->add_option("--height", synth_args.height, "Height");
  synth->add_option("--noise", synth_args.noise, "Gaussian noise sigma");
  synth->add_option("--missing", synth_args.missing, "Fraction of pixels masked out");
  synth->add_option("--seed", synth_args.seed, "Seed");
  synth->add_option("--out", synth_args.out, "Noisy output (PGM or text)")->required();
  synth->add_option("--mask", synth_args.mask, "Mask PGM output");
  synth->add_option("--clean", synth_args.clean, "Clean reference output");

  std::string graph_path;
  double threshold = 1e-4;
  auto* vbc = app.add_subcommand("vbc", "Variance of betweenness centrality of a graph");
  vbc->add_option("graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  vbc->add_option("--threshold", threshold, "Qualification threshold");

  gglr::Index dim = 2;
  std::string embed_out;
  auto* emb = app.add_subcommand("embed", "Compute latent coordinates for a graph");
  emb->add_option("graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  emb->add_option("--dim", dim, "Latent dimension");
  emb->add_option("--out", embed_out, "Output graph file (default stdout)");

  app.add_subcommand("errors", "List exit codes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*run) return do_run(run_args);
  if (*synth) return do_synth(synth_args);
  if (*vbc) return do_vbc(graph_path, threshold);
  if (*emb) return do_embed(graph_path, dim, embed_out);
  print_error_table();
  return 0;
}
