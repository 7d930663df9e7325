#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gordonse/analysis.hpp"
#include "gordonse/experiments.hpp"

using namespace gordonse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / "gordonse_test" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  const Config c = Config::from_string(
      "# comment\n"
      "model.kind = phase_retrieval\n"
      "model.sigma=0.25\n"
      "run.T=7\n"
      "predict.gordon=false\n");
  CHECK(c.get_string("model.kind") == "phase_retrieval");
  CHECK(c.get_double("model.sigma") == 0.25);
  CHECK(c.get_int("run.T") == 7);
  CHECK_FALSE(c.get_bool("predict.gordon"));
  CHECK(c.get_double("missing", 1.5) == 1.5);
  CHECK_THROWS(c.get_double("missing"));
  CHECK_THROWS(Config::from_string("not a pair\n"));
  CHECK_THROWS(c.get_double("model.kind"));
}

TEST_CASE("run config validation") {
  auto base = [] {
    return Config::from_string(
        "model.kind=phase_retrieval\nmodel.sigma=0.1\nmodel.d=10\n"
        "model.n=100\nalgorithm.kind=am_pr\nrun.T=2\nrun.trials=1\n");
  };
  CHECK_NOTHROW(RunConfig::from_config(base()));

  Config bad_alg = base();
  bad_alg.set("algorithm.kind", "am_mlr");  // model mismatch
  CHECK_THROWS(RunConfig::from_config(bad_alg));

  Config bad_alpha = base();
  bad_alpha.set("init.alpha0", "1.5");
  CHECK_THROWS(RunConfig::from_config(bad_alpha));

  Config bad_n = base();
  bad_n.set("model.n", "0");
  CHECK_THROWS(RunConfig::from_config(bad_n));
}

TEST_CASE("simulate writes the documented files") {
  const fs::path out = temp_dir("sim");
  Config c = Config::from_string(
      "model.kind=phase_retrieval\nmodel.sigma=0.1\nmodel.d=40\n"
      "model.n=400\nalgorithm.kind=gd_pr\ninit.scheme=directional\n"
      "init.alpha0=0.8\nrun.T=4\nrun.trials=3\nrun.seed=5\n");
  c.set("output.directory", out.string());
  std::ostringstream log;
  CHECK(cmd_simulate(RunConfig::from_config(c), {}, log) == 0);
  CHECK(fs::exists(out / "trajectories.csv"));
  CHECK(fs::exists(out / "predictions.csv"));
  CHECK(fs::exists(out / "summary.json"));
  // header + (T+1) rows x trials
  CHECK(count_lines(out / "trajectories.csv") == 1 + 5 * 3);
  CHECK(count_lines(out / "predictions.csv") == 1 + 5);
}

TEST_CASE("simulate with zero iterations emits exactly one data row per trial") {
  const fs::path out = temp_dir("sim_t0");
  Config c = Config::from_string(
      "model.kind=phase_retrieval\nmodel.sigma=0\nmodel.d=10\nmodel.n=50\n"
      "algorithm.kind=am_pr\nrun.T=0\nrun.trials=1\nrun.seed=2\n");
  c.set("output.directory", out.string());
  std::ostringstream log;
  CHECK(cmd_simulate(RunConfig::from_config(c), {}, log) == 0);
  CHECK(count_lines(out / "trajectories.csv") == 2);
}

TEST_CASE("simulate from the truth keeps every error at zero") {
  const fs::path out = temp_dir("sim_truth");
  Config c = Config::from_string(
      "model.kind=phase_retrieval\nmodel.sigma=0\nmodel.d=25\nmodel.n=250\n"
      "algorithm.kind=am_pr\ninit.scheme=directional\ninit.alpha0=1\n"
      "run.T=3\nrun.trials=2\nrun.seed=6\n");
  c.set("output.directory", out.string());
  std::ostringstream log;
  CHECK(cmd_simulate(RunConfig::from_config(c), {}, log) == 0);
  std::ifstream in(out / "trajectories.csv");
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    const auto prev_comma = line.rfind(',', last_comma - 1);
    const double dl2 = std::stod(
        line.substr(prev_comma + 1, last_comma - prev_comma - 1));
    CHECK(dl2 <= 1e-10);
  }
}

TEST_CASE("csv outputs are byte-identical across reruns") {
  const fs::path out1 = temp_dir("rep1"), out2 = temp_dir("rep2");
  Config c = Config::from_string(
      "model.kind=mixture_of_regressions\nmodel.sigma=0.2\nmodel.d=30\n"
      "model.n=300\nalgorithm.kind=subgrad_am_mlr\ninit.scheme=sphere\n"
      "run.T=5\nrun.trials=4\nrun.seed=77\n");
  std::ostringstream log;
  c.set("output.directory", out1.string());
  CHECK(cmd_simulate(RunConfig::from_config(c), {}, log) == 0);
  c.set("output.directory", out2.string());
  CliOptions two_threads;
  two_threads.threads = 2;
  CHECK(cmd_simulate(RunConfig::from_config(c), two_threads, log) == 0);
  CHECK(slurp(out1 / "trajectories.csv") == slurp(out2 / "trajectories.csv"));
  CHECK(slurp(out1 / "predictions.csv") == slurp(out2 / "predictions.csv"));
}

TEST_CASE("unknown figure ids are rejected with the valid list") {
  std::ostringstream log;
  CHECK(cmd_reproduce_figure("5", "native", {}, log) == 2);
  CHECK(log.str().find("figure 5 is a schematic") != std::string::npos);
  CHECK(cmd_reproduce_figure("1", "huge", {}, log) == 2);
}

TEST_CASE("figure registry covers the documented ids") {
  std::vector<std::string> want{"1",  "2",  "3a", "3b", "4", "6",
                                "7a", "7b", "8",  "9a", "9b"};
  for (const auto& id : want) {
    bool found = false;
    for (const auto& f : figure_registry())
      if (f.id == id) found = true;
    CHECK_MESSAGE(found, "missing figure ", id);
  }
}

TEST_CASE("figure 4 desk scale runs end to end") {
  const fs::path out = temp_dir("fig4");
  CliOptions opt;
  opt.out_dir = out;
  opt.seed = 9;
  opt.threads = 2;
  std::ostringstream log;
  CHECK(cmd_reproduce_figure("4", "desk", opt, log) == 0);
  CHECK(fs::exists(out / "figure_4.csv"));
  CHECK(fs::exists(out / "figure_4.svg"));
  CHECK(count_lines(out / "figure_4.csv") == 1 + 141);
  // Large-stepsize advisory is surfaced.
  CHECK(log.str().find("advisory") != std::string::npos);
  // The SVG never alters the CSV path: regenerate and compare bytes.
  const std::string csv_before = slurp(out / "figure_4.csv");
  std::ostringstream log2;
  CHECK(cmd_reproduce_figure("4", "desk", opt, log2) == 0);
  CHECK(slurp(out / "figure_4.csv") == csv_before);
}

TEST_CASE("classify-rate emits rates.csv") {
  const fs::path out = temp_dir("rates");
  Config c = Config::from_string(
      "model.kind=phase_retrieval\nmodel.sigma=1e-8\nmodel.d=100\n"
      "model.n=2000\nalgorithm.kind=am_pr\nrate.alpha0=0.9\nrate.beta0=0.1\n"
      "rate.iters=14\nrate.trials=3\nrun.seed=4\n");
  c.set("output.directory", out.string());
  std::ostringstream log;
  CliOptions two;
  two.threads = 2;
  CHECK(cmd_classify_rate(RunConfig::from_config(c), c, two, log) == 0);
  CHECK(fs::exists(out / "rates.csv"));
  // header + gordon + population + empirical mean
  CHECK(count_lines(out / "rates.csv") == 4);
  CHECK(log.str().find("rate[gordon]") != std::string::npos);
  CHECK(log.str().find("rate[empirical_mean]") != std::string::npos);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3) == 3);
  unsetenv("GORDONSE_THREADS");
  CHECK(resolve_threads(0) == 1);
  setenv("GORDONSE_THREADS", "4", 1);
  CHECK(resolve_threads(0) == 4);
  CHECK(resolve_threads(2) == 2);  // explicit flag wins
  unsetenv("GORDONSE_THREADS");
}

TEST_CASE("global convergence from a random sphere initialization") {
  // Reduced-scale version of the random-start experiment family: both the
  // empirics and the finite-sample prediction reach the noise floor.
  const int d = 100, n = 10000, T = 12, trials = 12;
  const ModelSpec model{ModelKind::PhaseRetrieval, 1e-6, d, n, 606};
  const GroundTruth truth = GroundTruth::standard_basis(d);
  RngStream irng(model.seed, StreamRole::Init);
  const Eigen::VectorXd theta0 = random_sphere_init(d, 1.0, irng);
  const StatePoint s0 = state_of(theta0, truth);

  const auto recs = run_ensemble(model, {Algorithm::AmPr, 0.5}, truth, theta0,
                                 T, trials, 2);
  double mean_final = 0.0;
  for (const auto& r : recs) mean_final += r.points[T].d_l2 / trials;

  const SEOperator gor{Algorithm::AmPr, SEKind::Gordon, model.sigma,
                       model.kappa(), 0.5};
  const auto pred = iterate_se(gor, s0, T);
  CHECK(mean_final < 1e-4);
  CHECK(d_l2(pred[T]) < 1e-4);
}
