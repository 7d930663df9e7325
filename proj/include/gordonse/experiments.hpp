#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gordonse/config.hpp"
#include "gordonse/iterates.hpp"
#include "gordonse/state_evolution.hpp"

namespace gordonse {

/// Command-line overrides applied on top of a parsed config.
struct CliOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0: use GORDONSE_THREADS or 1
};

int resolve_threads(int cli_threads);

/// Fully validated experiment description.
struct RunConfig {
  ModelSpec model;
  AlgorithmSpec alg;
  std::string init_scheme = "directional";  // directional | sphere | norm_matched
  double init_alpha0 = 0.2;
  double init_scale = 1.0;
  std::string truth_kind = "random";  // random | e1
  int iterations = 10;
  int trials = 1;
  bool predict_gordon = true;
  bool predict_population = true;
  std::uint64_t oracle_samples = 0;
  std::filesystem::path out_dir = ".";
  bool emit_svg = false;

  static RunConfig from_config(const Config& c);
};

/// Runs `trials` independent trajectories from the same (truth, theta0) pair;
/// trial IDs key the per-iteration batch streams.
std::vector<TrajectoryRecord> run_ensemble(const ModelSpec& model,
                                           const AlgorithmSpec& alg,
                                           const GroundTruth& truth,
                                           const Eigen::VectorXd& theta0,
                                           int T, int trials, int threads,
                                           std::uint64_t trial_id_offset = 0);

int cmd_simulate(const RunConfig& cfg, const CliOptions& opt,
                 std::ostream& log);
int cmd_verify_oracle(const Config& cfg, const CliOptions& opt,
                      std::ostream& log);
int cmd_classify_rate(const RunConfig& cfg, const Config& raw,
                      const CliOptions& opt, std::ostream& log);
int cmd_property_suite(const CliOptions& opt, std::ostream& log);

struct FigureSpec {
  std::string id;
  std::string title;
  ModelKind model;
  double sigma = 0.0;
  int d = 0;
  int n = 0;
  int iterations = 0;
  int trials = 0;
  std::vector<AlgorithmSpec> algs;
  bool metric_angle = false;     // d_angle instead of d_l2
  bool init_directional = true;  // otherwise uniform on the sphere
  double alpha0 = 0.2;
  bool show_population = false;
  bool show_gordon = true;
  bool ci_band = false;  // mean +- 2 stderr instead of min/max as main band
};

const std::vector<FigureSpec>& figure_registry();

/// scale = "native" or "desk" (desk divides d and n by 4, preserving kappa).
int cmd_reproduce_figure(const std::string& figure_id, const std::string& scale,
                         const CliOptions& opt, std::ostream& log);

}  // namespace gordonse
