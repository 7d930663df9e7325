#include <CLI11.hpp>

#include <iostream>

#include "gordonse/experiments.hpp"
#include "gordonse/kernels.hpp"

using namespace gordonse;

int main(int argc, char** argv) {
  CLI::App app{
      "Simulation and verification toolkit for deterministic state-evolution "
      "predictions of iterative model-fitting algorithms"};
  app.require_subcommand(1);

  std::string config_path, figure_id, scale = "native", out_dir, seed_str;
  int threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_str, "seed override");
    sub->add_option("--threads", threads,
                    "worker threads (fallback: GORDONSE_THREADS, then 1)");
  };

  auto* sim = app.add_subcommand("simulate",
                                 "run empirical trials alongside the "
                                 "deterministic predictions");
  sim->add_option("--config", config_path, "config file")->required();
  add_common(sim);

  auto* ver = app.add_subcommand(
      "verify-oracle",
      "compare closed-form predictions against the Monte-Carlo oracle");
  ver->add_option("--config", config_path, "config file");
  add_common(ver);

  auto* fig = app.add_subcommand("reproduce-figure",
                                 "regenerate a figure's data and plot");
  fig->add_option("--figure", figure_id, "figure id")->required();
  fig->add_option("--scale", scale, "native|desk");
  add_common(fig);

  auto* rate = app.add_subcommand("classify-rate",
                                  "fit convergence rates of the deterministic "
                                  "recursions and empirical trials");
  rate->add_option("--config", config_path, "config file")->required();
  add_common(rate);

  auto* prop = app.add_subcommand("property-suite",
                                  "run all grid and identity checks");
  add_common(prop);

  auto* isa = app.add_subcommand("kernel-info",
                                 "print the active SIMD dispatch target");

  CLI11_PARSE(app, argc, argv);

  CliOptions opt;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  if (!seed_str.empty()) opt.seed = std::stoull(seed_str);
  opt.threads = threads;

  try {
    if (sim->parsed()) {
      const Config raw = Config::from_file(config_path);
      return cmd_simulate(RunConfig::from_config(raw), opt, std::cout);
    }
    if (ver->parsed()) {
      const Config raw = config_path.empty() ? Config()
                                             : Config::from_file(config_path);
      return cmd_verify_oracle(raw, opt, std::cout);
    }
    if (fig->parsed())
      return cmd_reproduce_figure(figure_id, scale, opt, std::cout);
    if (rate->parsed()) {
      const Config raw = Config::from_file(config_path);
      return cmd_classify_rate(RunConfig::from_config(raw), raw, opt,
                               std::cout);
    }
    if (prop->parsed()) return cmd_property_suite(opt, std::cout);
    if (isa->parsed()) {
      std::cout << "kernel dispatch: " << kernels::active_isa()
                << (kernels::have_avx2() ? " (avx2 available)"
                                         : " (avx2 unavailable)")
                << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
