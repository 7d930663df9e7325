#include "gordonse/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gordonse/analysis.hpp"
#include "gordonse/csv.hpp"
#include "gordonse/oracle.hpp"
#include "gordonse/parallel.hpp"
#include "gordonse/svg.hpp"

namespace gordonse {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double metric_of(const StatePoint& s, bool angle) {
  return angle ? d_angle(s) : d_l2(s);
}

Eigen::VectorXd make_init(const RunConfig& cfg, const GroundTruth& truth,
                          RngStream& rng) {
  if (cfg.init_scheme == "directional")
    return directional_init(truth, cfg.init_alpha0, rng);
  if (cfg.init_scheme == "sphere")
    return random_sphere_init(cfg.model.d, cfg.init_scale, rng);
  if (cfg.init_scheme == "norm_matched") {
    RngStream batch_rng(cfg.model.seed, StreamRole::Init, 1);
    const Batch b = sample_batch(cfg.model, truth, batch_rng);
    return norm_matched_init(b, rng);
  }
  throw std::invalid_argument("unknown init scheme: " + cfg.init_scheme);
}

GroundTruth make_truth(const std::string& kind, int d, std::uint64_t seed) {
  if (kind == "e1") return GroundTruth::standard_basis(d);
  if (kind == "random") {
    RngStream rng(seed, StreamRole::Truth);
    return GroundTruth::random(d, rng);
  }
  throw std::invalid_argument("unknown truth kind: " + kind);
}

json rate_fit_json(const RateFit& f) {
  return json{{"lambda", f.exponent_lambda}, {"coefficient", f.coefficient},
              {"floor", f.floor},            {"points_used", f.points_used},
              {"r_squared", f.r_squared},    {"classified", f.classified}};
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int resolve_threads(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("GORDONSE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

RunConfig RunConfig::from_config(const Config& c) {
  RunConfig r;
  r.model.kind = model_from_name(c.get_string("model.kind", "phase_retrieval"));
  r.model.sigma = c.get_double("model.sigma", 0.0);
  r.model.d = static_cast<int>(c.get_int("model.d"));
  r.model.n = static_cast<int>(c.get_int("model.n"));
  r.model.seed = static_cast<std::uint64_t>(c.get_int("run.seed", 1));
  r.alg.kind = algorithm_from_name(c.get_string("algorithm.kind", "am_pr"));
  r.alg.eta = c.get_double("algorithm.eta", 0.5);
  r.init_scheme = c.get_string("init.scheme", "directional");
  r.init_alpha0 = c.get_double("init.alpha0", 0.2);
  r.init_scale = c.get_double("init.scale", 1.0);
  r.truth_kind = c.get_string("truth.kind", "random");
  r.iterations = static_cast<int>(c.get_int("run.T", 10));
  r.trials = static_cast<int>(c.get_int("run.trials", 1));
  r.predict_gordon = c.get_bool("predict.gordon", true);
  r.predict_population = c.get_bool("predict.population", true);
  r.oracle_samples =
      static_cast<std::uint64_t>(c.get_int("predict.oracle_samples", 0));
  r.out_dir = c.get_string("output.directory", ".");
  const std::string formats = c.get_string("output.formats", "csv");
  r.emit_svg = formats.find("svg") != std::string::npos;

  // Validate everything up front, before any work starts.
  r.model.validate();
  r.alg.validate();
  if (r.iterations < 0) throw std::invalid_argument("run.T must be >= 0");
  if (r.trials < 1) throw std::invalid_argument("run.trials must be >= 1");
  if (r.init_scheme == "directional" &&
      !(r.init_alpha0 >= 0.0 && r.init_alpha0 <= 1.0))
    throw std::invalid_argument("init.alpha0 must lie in [0, 1]");
  if (r.init_scheme == "sphere" && !(r.init_scale > 0.0))
    throw std::invalid_argument("init.scale must be > 0");
  if (model_of(r.alg.kind) != r.model.kind)
    throw std::invalid_argument("algorithm does not match model kind");
  return r;
}

std::vector<TrajectoryRecord> run_ensemble(const ModelSpec& model,
                                           const AlgorithmSpec& alg,
                                           const GroundTruth& truth,
                                           const Eigen::VectorXd& theta0,
                                           int T, int trials, int threads,
                                           std::uint64_t trial_id_offset) {
  std::vector<TrajectoryRecord> out(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    out[t] = run_trajectory(model, alg, truth, theta0, T,
                            trial_id_offset + t);
  });
  return out;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg0, const CliOptions& opt,
                 std::ostream& log) {
  RunConfig cfg = cfg0;
  if (opt.seed) cfg.model.seed = *opt.seed;
  if (opt.out_dir) cfg.out_dir = *opt.out_dir;
  const int threads = resolve_threads(opt.threads);
  fs::create_directories(cfg.out_dir);

  const GroundTruth truth =
      make_truth(cfg.truth_kind, cfg.model.d, cfg.model.seed);
  RngStream init_rng(cfg.model.seed, StreamRole::Init);
  const Eigen::VectorXd theta0 = make_init(cfg, truth, init_rng);
  const StatePoint s0 = state_of(theta0, truth);
  const int T = cfg.iterations;

  SEOperator gor{cfg.alg.kind, SEKind::Gordon, cfg.model.sigma,
                 cfg.model.kappa(), cfg.alg.eta};
  SEOperator pop{cfg.alg.kind, SEKind::Population, cfg.model.sigma, 0.0,
                 cfg.alg.eta};
  if (gor.eta_advisory())
    log << "advisory: eta = " << cfg.alg.eta
        << " > 1/2; the first-order deterministic prediction is evaluated "
           "outside its stated stepsize range\n";

  const std::vector<StatePoint> gordon =
      cfg.predict_gordon ? iterate_se(gor, s0, T) : std::vector<StatePoint>();
  const std::vector<StatePoint> popul =
      cfg.predict_population ? iterate_se(pop, s0, T)
                             : std::vector<StatePoint>();

  std::vector<TrajectoryRecord> trials;
  if (T >= 1) {
    trials = run_ensemble(cfg.model, cfg.alg, truth, theta0, T, cfg.trials,
                          threads);
  } else {
    // T = 0: record just the initial point.
    trials.resize(cfg.trials);
    for (int t = 0; t < cfg.trials; ++t) {
      TrajectoryPoint p;
      p.theta = theta0;
      p.state = s0;
      p.d_l2 = d_l2(s0);
      p.d_angle = d_angle(s0);
      trials[t].points.push_back(p);
      trials[t].model = cfg.model;
      trials[t].alg = cfg.alg;
      trials[t].trial = t;
    }
  }

  {
    CsvWriter w(cfg.out_dir / "trajectories.csv",
                {"trial", "iter", "alpha", "beta", "d_l2", "d_angle"});
    for (std::size_t tr = 0; tr < trials.size(); ++tr) {
      for (std::size_t t = 0; t < trials[tr].points.size(); ++t) {
        const auto& p = trials[tr].points[t];
        w.field(static_cast<long long>(tr))
            .field(static_cast<long long>(t))
            .field(p.state.alpha)
            .field(p.state.beta)
            .field(p.d_l2)
            .field(p.d_angle);
        w.end_row();
      }
    }
  }
  {
    CsvWriter w(cfg.out_dir / "predictions.csv",
                {"iter", "alpha_gor", "beta_gor", "alpha_pop", "beta_pop",
                 "d_l2_gor", "d_l2_pop"});
    for (int t = 0; t <= T; ++t) {
      const StatePoint g = cfg.predict_gordon ? gordon[t] : StatePoint{kNan, kNan};
      const StatePoint p =
          cfg.predict_population ? popul[t] : StatePoint{kNan, kNan};
      w.field(static_cast<long long>(t))
          .field(g.alpha)
          .field(g.beta)
          .field(p.alpha)
          .field(p.beta)
          .field(cfg.predict_gordon ? d_l2(g) : kNan)
          .field(cfg.predict_population ? d_l2(p) : kNan);
      w.end_row();
    }
  }

  json summary;
  summary["model"] = {{"kind", std::string(name_of(cfg.model.kind))},
                      {"sigma", cfg.model.sigma},
                      {"d", cfg.model.d},
                      {"n", cfg.model.n},
                      {"kappa", cfg.model.kappa()},
                      {"seed", cfg.model.seed}};
  summary["algorithm"] = {{"kind", std::string(name_of(cfg.alg.kind))},
                          {"eta", cfg.alg.eta},
                          {"eta_advisory", gor.eta_advisory()}};
  summary["initial_state"] = {{"alpha", s0.alpha}, {"beta", s0.beta}};
  summary["trials"] = cfg.trials;
  summary["iterations"] = T;

  if (cfg.predict_gordon && T >= 1) {
    const DeviationReport dev = deviation_report(trials, gordon);
    summary["deviation"] = {{"mean_max_d_l2", dev.mean_max_l2},
                            {"max_max_d_l2", dev.max_max_l2},
                            {"per_trial_max_d_l2", dev.per_trial_max_l2}};
  }
  const bool angle_metric =
      cfg.model.kind == ModelKind::MixtureOfRegressions;
  auto metric_series = [&](const std::vector<StatePoint>& seq) {
    std::vector<double> d(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i)
      d[i] = metric_of(seq[i], angle_metric);
    return d;
  };
  for (const auto& [name, seq] :
       std::initializer_list<std::pair<const char*, const std::vector<StatePoint>*>>{
           {"gordon", &gordon}, {"population", &popul}}) {
    if (seq->empty()) continue;
    try {
      summary["rate_fit"][name] = rate_fit_json(fit_rate(metric_series(*seq)));
    } catch (const std::exception& e) {
      summary["rate_fit"][name] = {{"error", e.what()}};
    }
  }
  if (cfg.oracle_samples > 0) {
    const OmegaSpec ospec{cfg.alg.kind, cfg.model.sigma, s0};
    const OracleExpanded oe = gordon_from_oracle(
        ospec, cfg.model.kappa(), order_of(cfg.alg.kind), cfg.alg.eta,
        cfg.oracle_samples, cfg.model.seed, threads);
    summary["oracle_one_step"] = {
        {"alpha", oe.state.alpha},  {"mu", oe.state.mu},
        {"nu", oe.state.nu},        {"beta", oe.state.beta()},
        {"se_alpha", oe.se_alpha},  {"se_mu", oe.se_mu},
        {"se_nu", oe.se_nu},        {"samples", oe.raw.samples}};
  }
  std::ofstream(cfg.out_dir / "summary.json") << summary.dump(2) << "\n";

  if (cfg.emit_svg && T >= 1) {
    std::vector<double> mean(T + 1, 0.0), lo(T + 1, kNan), hi(T + 1, kNan);
    for (int t = 0; t <= T; ++t) {
      double mn = std::numeric_limits<double>::infinity(), mx = 0.0, su = 0.0;
      for (const auto& tr : trials) {
        const double v = metric_of(tr.points[t].state, angle_metric);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        su += v;
      }
      mean[t] = su / cfg.trials;
      lo[t] = mn;
      hi[t] = mx;
    }
    std::vector<SvgSeries> series;
    series.push_back({"empirical range", "#9ecae1", lo, hi, false});
    series.push_back({"empirical mean", "#3182bd", mean, {}, false});
    if (cfg.predict_gordon)
      series.push_back(
          {"deterministic (finite-sample)", "#a63603", metric_series(gordon),
           {}, false});
    if (cfg.predict_population)
      series.push_back({"deterministic (infinite-sample)", "#31a354",
                        metric_series(popul), {}, true});
    write_log_plot(cfg.out_dir / "trajectories.svg",
                   std::string(name_of(cfg.alg.kind)),
                   angle_metric ? "angle to truth" : "l2 distance", series);
  }

  log << "simulate: " << cfg.trials << " trials x " << T << " iterations ("
      << name_of(cfg.alg.kind) << ", d=" << cfg.model.d
      << ", n=" << cfg.model.n << ") written to " << cfg.out_dir.string()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify-oracle
// ---------------------------------------------------------------------------

int cmd_verify_oracle(const Config& cfg, const CliOptions& opt,
                      std::ostream& log) {
  const std::uint64_t samples = static_cast<std::uint64_t>(
      cfg.get_int("oracle.samples", 1000000));
  const int n_states = static_cast<int>(cfg.get_int("oracle.states", 20));
  const double kappa = cfg.get_double("oracle.kappa", 20.0);
  const double eta = cfg.get_double("oracle.eta", 0.5);
  const std::vector<double> sigmas =
      parse_double_list(cfg.get_string("oracle.sigmas", "0,0.1,0.5"));
  std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("run.seed", 1));
  if (opt.seed) seed = *opt.seed;
  const fs::path out_dir =
      opt.out_dir.value_or(fs::path(cfg.get_string("output.directory", ".")));
  const int threads = resolve_threads(opt.threads);
  fs::create_directories(out_dir);

  // Random states, shared across algorithms and noise levels.
  RngStream srng(seed, StreamRole::Misc, 77);
  std::vector<StatePoint> states;
  for (int i = 0; i < n_states; ++i)
    states.push_back(
        {0.05 + 1.15 * srng.uniform01(), 0.05 + 1.15 * srng.uniform01()});

  struct Row {
    Algorithm alg;
    StatePoint state;
    double sigma;
    const char* quantity;
    double closed, mc, se, z;
  };
  std::vector<Row> rows;
  int violations = 0;

  std::uint64_t cell = 0;
  for (Algorithm alg : kAllAlgorithms) {
    for (double sigma : sigmas) {
      for (const StatePoint& s : states) {
        ++cell;
        const bool fo = order_of(alg) == UpdateOrder::FirstOrder;
        // Closed-form targets for the weight moments of this algorithm.
        const OmegaMomentsClosed ho =
            ho_moments_closed(model_of(alg), s, sigma);
        double c_e0 = ho.e0, c_e1 = ho.e1, c_e2 = ho.e2;
        double c_nu = std::sqrt(ho.h / (kappa - 1.0));
        if (fo) {
          const double a = std::fabs(s.alpha);
          const double e1f = a - ho.e1, e2f = s.beta - ho.e2;
          c_e1 = e1f;
          c_e2 = e2f;
          c_e0 = e1f * e1f + e2f * e2f + ho.h;
          c_nu = 2.0 * eta / std::sqrt(kappa) * std::sqrt(c_e0);
        }
        const OmegaSpec ospec{alg, sigma, {std::fabs(s.alpha), s.beta}};

        auto evaluate = [&](std::uint64_t cell_seed) {
          const OracleExpanded oe =
              gordon_from_oracle(ospec, kappa, order_of(alg), eta, samples,
                                 cell_seed, threads);
          const OracleEstimate& e = oe.raw;
          std::vector<Row> rs;
          rs.push_back({alg, s, sigma, "e_omega2", c_e0, e.e_omega2,
                        e.se_omega2, 0.0});
          rs.push_back({alg, s, sigma, "e_z1_omega", c_e1, e.e_z1_omega,
                        e.se_z1_omega, 0.0});
          rs.push_back({alg, s, sigma, "e_z2_omega", c_e2, e.e_z2_omega,
                        e.se_z2_omega, 0.0});
          rs.push_back(
              {alg, s, sigma, "nu_gor", c_nu, oe.state.nu, oe.se_nu, 0.0});
          for (auto& r : rs)
            r.z = r.se > 0.0 ? (r.mc - r.closed) / r.se
                             : (r.mc == r.closed ? 0.0 : 1e9);
          return rs;
        };

        std::vector<Row> rs = evaluate(seed + cell);
        const bool bad = std::any_of(rs.begin(), rs.end(), [](const Row& r) {
          return std::fabs(r.z) > 4.0;
        });
        if (bad) rs = evaluate(seed + cell + 0x9e3779b9ULL);  // one retry
        for (const Row& r : rs)
          if (std::fabs(r.z) > 4.0) ++violations;
        rows.insert(rows.end(), rs.begin(), rs.end());
      }
    }
  }

  {
    CsvWriter w(out_dir / "oracle.csv",
                {"algorithm", "state", "sigma", "quantity", "closed_form",
                 "mc_estimate", "stderr", "z_score"});
    for (const Row& r : rows) {
      char state_buf[64];
      std::snprintf(state_buf, sizeof state_buf, "%.6f;%.6f", r.state.alpha,
                    r.state.beta);
      w.field(std::string(name_of(r.alg)))
          .field(std::string(state_buf))
          .field(r.sigma)
          .field(r.quantity)
          .field(r.closed)
          .field(r.mc)
          .field(r.se)
          .field(r.z);
      w.end_row();
    }
  }
  log << "verify-oracle: " << rows.size() << " rows, " << violations
      << " beyond 4 stderr after retry (" << out_dir.string()
      << "/oracle.csv)\n";
  return violations == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// classify-rate
// ---------------------------------------------------------------------------

int cmd_classify_rate(const RunConfig& cfg0, const Config& raw,
                      const CliOptions& opt, std::ostream& log) {
  RunConfig cfg = cfg0;
  if (opt.seed) cfg.model.seed = *opt.seed;
  if (opt.out_dir) cfg.out_dir = *opt.out_dir;
  const int threads = resolve_threads(opt.threads);
  fs::create_directories(cfg.out_dir);

  const double a0 = raw.get_double("rate.alpha0", 0.9);
  const double b0 = raw.get_double("rate.beta0", 0.1);
  const int T = static_cast<int>(raw.get_int("rate.iters", 30));
  const int emp_trials = static_cast<int>(raw.get_int("rate.trials", 0));
  std::string metric = raw.get_string("rate.metric", "auto");
  if (metric == "auto")
    metric = cfg.model.kind == ModelKind::PhaseRetrieval ? "l2" : "angle";
  const bool angle = metric == "angle";
  const StatePoint s0{a0, b0};

  struct Entry {
    std::string source;
    std::vector<double> errs;
  };
  std::vector<Entry> entries;
  {
    SEOperator gor{cfg.alg.kind, SEKind::Gordon, cfg.model.sigma,
                   cfg.model.kappa(), cfg.alg.eta};
    SEOperator pop{cfg.alg.kind, SEKind::Population, cfg.model.sigma, 0.0,
                   cfg.alg.eta};
    auto to_errs = [&](const std::vector<StatePoint>& seq) {
      std::vector<double> d(seq.size());
      for (std::size_t i = 0; i < seq.size(); ++i)
        d[i] = metric_of(seq[i], angle);
      return d;
    };
    entries.push_back({"gordon", to_errs(iterate_se(gor, s0, T))});
    entries.push_back({"population", to_errs(iterate_se(pop, s0, T))});
  }
  if (emp_trials > 0) {
    const GroundTruth truth =
        make_truth(cfg.truth_kind, cfg.model.d, cfg.model.seed);
    RngStream rng(cfg.model.seed, StreamRole::Init);
    Eigen::VectorXd gamma = random_sphere_init(cfg.model.d, 1.0, rng);
    Eigen::VectorXd perp =
        gamma - gamma.dot(truth.theta_star) * truth.theta_star;
    perp /= perp.norm();
    const Eigen::VectorXd theta0 = a0 * truth.theta_star + b0 * perp;
    const auto trials = run_ensemble(cfg.model, cfg.alg, truth, theta0, T,
                                     emp_trials, threads);
    std::vector<double> mean(T + 1, 0.0);
    for (const auto& tr : trials)
      for (int t = 0; t <= T; ++t)
        mean[t] += metric_of(tr.points[t].state, angle) / emp_trials;
    entries.push_back({"empirical_mean", std::move(mean)});
  }

  int failures = 0;
  CsvWriter w(cfg.out_dir / "rates.csv",
              {"source", "algorithm", "metric", "lambda", "coefficient",
               "floor", "points_used", "r_squared", "classified"});
  for (const auto& e : entries) {
    try {
      const RateFit f = fit_rate(e.errs);
      w.field(e.source)
          .field(std::string(name_of(cfg.alg.kind)))
          .field(metric)
          .field(f.exponent_lambda)
          .field(f.coefficient)
          .field(f.floor)
          .field(f.points_used)
          .field(f.r_squared)
          .field(std::string(f.classified ? "true" : "false"));
      w.end_row();
      log << "rate[" << e.source << "] lambda=" << f.exponent_lambda
          << " coefficient=" << f.coefficient << " floor=" << f.floor
          << " r2=" << f.r_squared << "\n";
    } catch (const std::exception& ex) {
      ++failures;
      log << "rate[" << e.source << "] failed: " << ex.what()
          << " (try a smaller sigma or a larger start error)\n";
    }
  }
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// property-suite
// ---------------------------------------------------------------------------

int cmd_property_suite(const CliOptions& opt, std::ostream& log) {
  const int threads = resolve_threads(opt.threads);
  int failures = 0;
  auto report = [&](const PropertyResult& r) {
    log << (r.pass ? "PASS" : "FAIL") << "  " << r.name
        << "  worst margin " << r.worst_margin << " at ("
        << r.worst_at.alpha << ", " << r.worst_at.beta << ")\n";
    if (!r.pass) ++failures;
  };

  const std::vector<double> sigmas{0.0, 0.1, 0.3, 0.5};
  const auto broad = state_grid(0.02, 1.5, 40, 0.0, 1.5, 40);
  for (const auto& r : map_property_scan(broad, map_bound_checks(1e3, sigmas)))
    report(r);
  const auto grad_grid = state_grid(0.5, 1.5, 25, 1e-5, 0.375, 25);
  for (const auto& r :
       map_property_scan(grad_grid, gradient_bound_checks(1e3, sigmas)))
    report(r);

  // Exact map identities on a moderate grid.
  {
    const auto grid = state_grid(0.02, 1.2, 32, 0.0, 1.2, 32);
    std::vector<PropertyCheck> ids;
    const double kap = 20.0, sg = 0.1, tol = 1e-12;
    ids.push_back({"identity: population first-order at eta=1/2 equals "
                   "higher-order (both models)",
                   [tol](const StatePoint& s) {
                     double worst = 0.0;
                     for (auto [ho, fo] :
                          {std::pair{Algorithm::AmPr, Algorithm::GdPr},
                           std::pair{Algorithm::AmMlr,
                                     Algorithm::SubgradAmMlr}}) {
                       for (double sg2 : {0.0, 0.1, 0.5}) {
                         const StatePoint a = population(ho, s, sg2);
                         const StatePoint b = population(fo, s, sg2, 0.5);
                         worst = std::max({worst,
                                           std::fabs(a.alpha - b.alpha),
                                           std::fabs(a.beta - b.beta)});
                       }
                     }
                     return tol - worst;
                   }});
    ids.push_back({"identity: sigma=0 mixture maps equal phase-retrieval maps",
                   [kap, tol](const StatePoint& s) {
                     const StatePoint a = gordon_am_pr(s, 0.0, kap);
                     const StatePoint b = gordon_am_mlr(s, 0.0, kap);
                     const StatePoint c = gordon_gd_pr(s, 0.0, kap, 0.5);
                     const StatePoint d = gordon_subgrad_mlr(s, 0.0, kap, 0.5);
                     const double worst = std::max(
                         {std::fabs(a.alpha - b.alpha), std::fabs(a.beta - b.beta),
                          std::fabs(c.alpha - d.alpha),
                          std::fabs(c.beta - d.beta)});
                     return tol - worst;
                   }});
    ids.push_back({"identity: G(sigma)^2 - G(0)^2 = sigma^2/(kappa-1) and "
                   "g(sigma)^2 - g(0)^2 = sigma^2/kappa",
                   [kap, sg, tol](const StatePoint& s) {
                     const double G1 = gordon_am_pr(s, sg, kap).beta;
                     const double G0 = gordon_am_pr(s, 0.0, kap).beta;
                     const double g1 = gordon_gd_pr(s, sg, kap, 0.5).beta;
                     const double g0 = gordon_gd_pr(s, 0.0, kap, 0.5).beta;
                     const double dG =
                         std::fabs(G1 * G1 - G0 * G0 - sg * sg / (kap - 1.0));
                     const double dg =
                         std::fabs(g1 * g1 - g0 * g0 - sg * sg / kap);
                     return tol - std::max(dG, dg);
                   }});
    ids.push_back(
        {"identity: kappa g^2 = (kappa-1) G^2 + (rhoB)^2 + (alpha-F)^2 + "
         "(beta-rhoB)^2 (mixture, eta=1/2)",
         [kap, sg, tol](const StatePoint& s) {
           const double g = gordon_subgrad_mlr(s, sg, kap, 0.5).beta;
           const StatePoint popm = population(Algorithm::AmMlr, s, sg);
           const double G = gordon_am_mlr(s, sg, kap).beta;
           const double lhs = kap * g * g;
           const double da = s.alpha - popm.alpha;
           const double db = s.beta - popm.beta;
           const double rhs = (kap - 1.0) * G * G + popm.beta * popm.beta +
                              da * da + db * db;
           return tol - std::fabs(lhs - rhs) / std::max(1.0, lhs);
         }});
    ids.push_back({"identity: expanded beta reconstruction sqrt(mu^2 + nu^2)",
                   [kap, sg, tol](const StatePoint& s) {
                     double worst = 0.0;
                     for (Algorithm alg : kAllAlgorithms) {
                       const bool fo =
                           order_of(alg) == UpdateOrder::FirstOrder;
                       const ExpandedState e =
                           fo ? gordon_expanded_fo(s, alg, sg, kap, 0.5)
                              : gordon_expanded_ho(s, alg, sg, kap);
                       const StatePoint m = gordon_map(alg, s, sg, kap, 0.5);
                       worst = std::max(worst, std::fabs(e.beta() - m.beta));
                     }
                     return tol - worst;
                   }});
    for (const auto& r : map_property_scan(grid, ids)) report(r);
  }

  // G-faithfulness of all four Gordon maps.
  {
    const auto G = good_region_grid(100, 100);
    std::vector<PropertyCheck> checks;
    for (Algorithm alg : kAllAlgorithms) {
      checks.push_back(
          {"faithful: " + std::string(name_of(alg)) +
               " maps the good region into itself (kappa=500, sigma=0.01)",
           [alg](const StatePoint& s) {
             const StatePoint t = gordon_map(alg, s, 0.01, 500.0, 0.5);
             const double m1 = t.alpha - 0.55;
             const double m2 = 1.05 - t.alpha;
             const double m3 =
                 t.beta == 0.0 ? 1.0 : t.alpha / t.beta - 5.0;
             return std::min({m1, m2, m3});
           }});
    }
    for (const auto& r : map_property_scan(G, checks)) report(r);
  }

  // Monte-Carlo assumption checks (lower-bound functional >= sigma^2).
  {
    for (const auto& [alg, sg, state] :
         {std::tuple{Algorithm::AmPr, 0.2, StatePoint{0.8, 0.3}},
          std::tuple{Algorithm::AmMlr, 0.2, StatePoint{0.9, 0.0}},
          std::tuple{Algorithm::GdPr, 0.0, StatePoint{1.0, 0.0}}}) {
      const AssumptionReport rep = verify_assumptions(
          {alg, sg, state}, 200000, 20250 + static_cast<int>(alg), threads);
      const double slack = rep.lb_value + 4.0 * rep.lb_stderr - sg * sg;
      PropertyResult r;
      r.name = "assumption: variance functional >= sigma^2 for " +
               std::string(name_of(alg)) + " (MC)";
      r.pass = slack >= 0.0;
      r.worst_margin = slack;
      r.worst_at = state;
      r.evaluated = 1;
      report(r);
    }
  }

  log << (failures == 0 ? "property-suite: all checks passed\n"
                        : "property-suite: FAILURES above\n");
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// reproduce-figure
// ---------------------------------------------------------------------------

const std::vector<FigureSpec>& figure_registry() {
  static const std::vector<FigureSpec> figs = [] {
    std::vector<FigureSpec> f;
    const AlgorithmSpec am_pr{Algorithm::AmPr, 0.5};
    const AlgorithmSpec gd_pr{Algorithm::GdPr, 0.5};
    const AlgorithmSpec am_mlr{Algorithm::AmMlr, 0.5};
    const AlgorithmSpec sg_mlr{Algorithm::SubgradAmMlr, 0.5};

    f.push_back({"1", "phase retrieval: empirics vs infinite-sample prediction",
                 ModelKind::PhaseRetrieval, 1e-8, 600, 12000, 17, 100,
                 {am_pr, gd_pr}, false, true, 0.2, true, false, true});
    f.push_back({"2", "phase retrieval: empirics vs finite-sample prediction",
                 ModelKind::PhaseRetrieval, 1e-8, 600, 12000, 17, 100,
                 {am_pr, gd_pr}, false, true, 0.2, false, true, true});
    f.push_back({"3a", "mixture of regressions, sigma=0.05 kappa=20",
                 ModelKind::MixtureOfRegressions, 0.05, 500, 10000, 12, 100,
                 {am_mlr, sg_mlr}, true, true, 0.8, false, true, false});
    f.push_back({"3b", "mixture of regressions, sigma=0.25 kappa=100",
                 ModelKind::MixtureOfRegressions, 0.25, 500, 50000, 12, 100,
                 {am_mlr, sg_mlr}, true, true, 0.8, false, true, false});
    f.push_back({"4", "subgradient descent with stepsize 0.95",
                 ModelKind::PhaseRetrieval, 0.0, 250, 2500, 140, 10,
                 {{Algorithm::GdPr, 0.95}}, false, true, 0.6, true, true,
                 false});
    f.push_back({"6", "phase retrieval from a random initialization",
                 ModelKind::PhaseRetrieval, 1e-6, 800, 80000, 12, 12,
                 {am_pr, gd_pr}, false, false, 0.0, false, true, false});
    f.push_back({"7a", "phase retrieval local, sigma=1e-10 kappa=20",
                 ModelKind::PhaseRetrieval, 1e-10, 500, 10000, 12, 100,
                 {am_pr, gd_pr}, false, true, 0.8, false, true, false});
    f.push_back({"7b", "phase retrieval local, sigma=1e-6 kappa=100",
                 ModelKind::PhaseRetrieval, 1e-6, 500, 50000, 12, 100,
                 {am_pr, gd_pr}, false, true, 0.8, false, true, false});
    f.push_back({"8", "mixture of regressions from a random initialization",
                 ModelKind::MixtureOfRegressions, 1e-6, 800, 80000, 12, 12,
                 {am_mlr, sg_mlr}, true, false, 0.0, false, true, false});
    f.push_back({"9a", "mixture of regressions local, sigma=1e-6 kappa=20",
                 ModelKind::MixtureOfRegressions, 1e-6, 500, 10000, 12, 100,
                 {am_mlr, sg_mlr}, true, true, 0.8, false, true, false});
    f.push_back({"9b", "mixture of regressions local, sigma=1e-2 kappa=6",
                 ModelKind::MixtureOfRegressions, 1e-2, 500, 3000, 12, 100,
                 {am_mlr, sg_mlr}, true, true, 0.8, false, true, false});
    return f;
  }();
  return figs;
}

int cmd_reproduce_figure(const std::string& figure_id, const std::string& scale,
                         const CliOptions& opt, std::ostream& log) {
  const FigureSpec* spec = nullptr;
  for (const auto& f : figure_registry())
    if (f.id == figure_id) spec = &f;
  if (!spec) {
    log << "unknown figure id '" << figure_id << "'; valid ids:";
    for (const auto& f : figure_registry()) log << " " << f.id;
    log << "  (figure 5 is a schematic, not data)\n";
    return 2;
  }
  if (scale != "native" && scale != "desk") {
    log << "unknown scale '" << scale << "' (native|desk)\n";
    return 2;
  }

  FigureSpec fig = *spec;
  if (scale == "desk") {
    fig.d /= 4;
    fig.n /= 4;
  }
  const std::uint64_t seed = opt.seed.value_or(1);
  const fs::path out_dir = opt.out_dir.value_or(".");
  const int threads = resolve_threads(opt.threads);
  fs::create_directories(out_dir);

  ModelSpec model{fig.model, fig.sigma, fig.d, fig.n, seed};
  model.validate();
  const GroundTruth truth = make_truth("random", fig.d, seed);
  RngStream init_rng(seed, StreamRole::Init);
  const Eigen::VectorXd theta0 =
      fig.init_directional ? directional_init(truth, fig.alpha0, init_rng)
                           : random_sphere_init(fig.d, 1.0, init_rng);
  const StatePoint s0 = state_of(theta0, truth);
  const int T = fig.iterations;

  struct AlgSeries {
    std::string tag;
    std::vector<double> mean, lo, hi, ci_lo, ci_hi, gordon;
  };
  std::vector<AlgSeries> all;
  std::vector<double> pop_curve;

  for (std::size_t ai = 0; ai < fig.algs.size(); ++ai) {
    const AlgorithmSpec alg = fig.algs[ai];
    SEOperator gor{alg.kind, SEKind::Gordon, fig.sigma, model.kappa(),
                   alg.eta};
    if (gor.eta_advisory())
      log << "advisory: eta = " << alg.eta
          << " > 1/2 for " << name_of(alg.kind)
          << "; deterministic prediction evaluated outside its stated "
             "range\n";
    const auto trials = run_ensemble(model, alg, truth, theta0, T, fig.trials,
                                     threads, ai * 1000000ULL);
    AlgSeries s;
    s.tag = std::string(name_of(alg.kind));
    s.mean.resize(T + 1);
    s.lo.resize(T + 1);
    s.hi.resize(T + 1);
    s.ci_lo.resize(T + 1);
    s.ci_hi.resize(T + 1);
    for (int t = 0; t <= T; ++t) {
      double mn = std::numeric_limits<double>::infinity(), mx = 0.0, su = 0.0,
             sq = 0.0;
      for (const auto& tr : trials) {
        const double v = metric_of(tr.points[t].state, fig.metric_angle);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        su += v;
        sq += v * v;
      }
      const double m = su / fig.trials;
      const double var =
          fig.trials > 1 ? std::max(sq - fig.trials * m * m, 0.0) /
                               (fig.trials - 1)
                         : 0.0;
      const double se = std::sqrt(var / fig.trials);
      s.mean[t] = m;
      s.lo[t] = mn;
      s.hi[t] = mx;
      s.ci_lo[t] = m - 2.0 * se;
      s.ci_hi[t] = m + 2.0 * se;
    }
    const auto gseq = iterate_se(gor, s0, T);
    for (const auto& g : gseq)
      s.gordon.push_back(metric_of(g, fig.metric_angle));
    all.push_back(std::move(s));

    if (fig.show_population && pop_curve.empty()) {
      SEOperator pop{alg.kind, SEKind::Population, fig.sigma, 0.0, alg.eta};
      for (const auto& p : iterate_se(pop, s0, T))
        pop_curve.push_back(metric_of(p, fig.metric_angle));
    }
  }

  // CSV: one row per iteration; every band variant is emitted.
  {
    std::vector<std::string> cols{"iter"};
    for (const auto& s : all)
      for (const char* suffix :
           {"_mean", "_min", "_max", "_ci_lo", "_ci_hi", "_gordon"})
        cols.push_back(s.tag + suffix);
    if (fig.show_population) cols.push_back("population");
    CsvWriter w(out_dir / ("figure_" + fig.id + ".csv"), cols);
    for (int t = 0; t <= T; ++t) {
      w.field(static_cast<long long>(t));
      for (const auto& s : all) {
        w.field(s.mean[t])
            .field(s.lo[t])
            .field(s.hi[t])
            .field(s.ci_lo[t])
            .field(s.ci_hi[t])
            .field(s.gordon[t]);
      }
      if (fig.show_population) w.field(pop_curve[t]);
      w.end_row();
    }
  }

  // SVG view of the same data.
  {
    static const char* kEmpColors[] = {"#3182bd", "#756bb1"};
    static const char* kDetColors[] = {"#d95f0e", "#e6550d"};
    std::vector<SvgSeries> series;
    for (std::size_t ai = 0; ai < all.size(); ++ai) {
      const auto& s = all[ai];
      if (fig.ci_band)
        series.push_back({s.tag + " band", kEmpColors[ai % 2], s.ci_lo,
                          s.ci_hi, false});
      else
        series.push_back(
            {s.tag + " range", kEmpColors[ai % 2], s.lo, s.hi, false});
      series.push_back(
          {s.tag + " mean", kEmpColors[ai % 2], s.mean, {}, false});
      if (fig.show_gordon)
        series.push_back({s.tag + " prediction", kDetColors[ai % 2], s.gordon,
                          {}, false});
    }
    if (fig.show_population)
      series.push_back(
          {"infinite-sample prediction", "#31a354", pop_curve, {}, true});
    write_log_plot(out_dir / ("figure_" + fig.id + ".svg"), fig.title,
                   fig.metric_angle ? "angle to truth" : "l2 distance",
                   series);
  }
  log << "figure " << fig.id << " (" << scale << "): d=" << fig.d
      << " n=" << fig.n << " trials=" << fig.trials << " iters=" << T
      << " -> " << (out_dir / ("figure_" + fig.id)).string() << ".{csv,svg}\n";
  return 0;
}

}  // namespace gordonse
