#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "spinlab/config.hpp"
#include "spinlab/ensembles.hpp"
#include "spinlab/experiments.hpp"
#include "spinlab/io.hpp"
#include "spinlab/sampler.hpp"
#include "spinlab/util.hpp"

namespace {

using namespace spinlab;

struct CommonOpts {
  std::string config_path;
  int grid_n = 128;
  double grid_tol = 1e-12;
  std::string out_dir = ".";
};

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> ks;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma - pos);
    ks.push_back(std::stoi(tok));
    if (comma == std::string::npos)
      break;
    pos = comma + 1;
  }
  return ks;
}

SigmaWindow parse_window(const std::string& text, const SigmaWindow& fallback) {
  if (text.empty())
    return fallback;
  SigmaWindow w;
  if (std::sscanf(text.c_str(), "%lf,%lf,%d", &w.lo, &w.hi, &w.count) != 3)
    throw ConfigError("window must be 'lo,hi,n'");
  return w;
}

std::filesystem::path out_path(const CommonOpts& opts, const std::string& name) {
  std::filesystem::create_directories(opts.out_dir);
  return std::filesystem::path(opts.out_dir) / name;
}

RunManifest base_manifest(const LatticeModel& model, const QuadratureGrid& grid) {
  RunManifest m;
  m.config_digest = config_digest(model);
  m.tool_version = tool_version();
  m.started_at = timestamp_utc();
  m.grid_n = grid.size();
  m.grid_truncation = grid.truncation;
  return m;
}

int cmd_free_energy(const CommonOpts& opts, std::optional<double> sigma,
                    std::optional<double> m_target) {
  const LatticeModel model = load_model_file(opts.config_path);
  if (sigma && m_target)
    throw ConfigError("free-energy: pass either --sigma or --m, not both");
  const GridSpec gs{opts.grid_n, opts.grid_tol};
  double sg;
  if (m_target) {
    const double cap = std::abs(*m_target) * 1.5 + 1.0 + model.potential.bound_sup();
    const QuadratureGrid grid = sweep_grid(model, gs, cap);
    const TransferOperator op(model, grid);
    sg = sigma_of_m(op, *m_target);
    std::cout << to_json(thermo_report(op, sg)) << "\n";
  } else {
    sg = sigma ? *sigma : model.sigma;
    const QuadratureGrid grid = sweep_grid(model, gs, std::abs(sg) + 0.5);
    const TransferOperator op(model, grid);
    std::cout << to_json(thermo_report(op, sg)) << "\n";
  }
  return 0;
}

int cmd_equivalence(const CommonOpts& opts, const std::string& k_list_text,
                    const std::string& window_text) {
  const LatticeModel model = load_model_file(opts.config_path);
  const std::vector<int> ks = parse_k_list(k_list_text);
  if (ks.size() < 4)
    throw ConfigError("equivalence: need >= 4 K values");
  const SigmaWindow window = parse_window(window_text, SigmaWindow{});
  const GridSpec gs{opts.grid_n, opts.grid_tol};

  const auto t0 = std::chrono::steady_clock::now();
  const RateStudy study = rate_study(model, ks, window, gs);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_rate_fit_csv(out_path(opts, "c0.csv").string(), study.c0);
  write_rate_fit_csv(out_path(opts, "c1.csv").string(), study.c1);
  write_rate_fit_csv(out_path(opts, "c2.csv").string(), study.c2);

  const QuadratureGrid grid = sweep_grid(model, gs, std::max(std::abs(window.lo), std::abs(window.hi)) + 0.5);
  RunManifest manifest = base_manifest(model, grid);
  manifest.outputs = {"c0.csv", "c1.csv", "c2.csv"};
  manifest.wall_time_seconds = wall;
  manifest.sigma_window_note =
      "sup over sigma restricted to [" + format_double(window.lo) + ", " +
      format_double(window.hi) + "], " + std::to_string(window.count) + " points";
  std::string extra = "{";
  const auto fit_json = [](const RateFit& f) {
    std::string s = "{\"slope\":" + format_double(f.slope) +
                    ",\"intercept\":" + format_double(f.intercept) +
                    ",\"r_squared\":" + format_double(f.r_squared);
    if (f.refit)
      s += ",\"refit\":{\"slope\":" + format_double(f.refit->slope) +
           ",\"intercept\":" + format_double(f.refit->intercept) +
           ",\"r_squared\":" + format_double(f.refit->r_squared) +
           ",\"dropped_K\":" + std::to_string(f.refit->dropped_K) + "}";
    return s + "}";
  };
  extra += "\"c0\":" + fit_json(study.c0) + ",\"c1\":" + fit_json(study.c1) +
           ",\"c2\":" + fit_json(study.c2) + "}";
  manifest.extra_json = extra;
  manifest.write(out_path(opts, "manifest.json").string());
  return 0;
}

int cmd_convexity(const CommonOpts& opts, const std::string& k_list_text,
                  const std::string& m_window_text) {
  const LatticeModel model = load_model_file(opts.config_path);
  std::vector<int> ks =
      k_list_text.empty() ? std::vector<int>{model.K} : parse_k_list(k_list_text);
  SigmaWindow mw = parse_window(m_window_text, SigmaWindow{-2.0, 2.0, 21});
  const GridSpec gs{opts.grid_n, opts.grid_tol};

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;
  for (int K : ks) {
    const ConvexityScan scan = convexity_scan(model, K, mw.points(), gs);
    const std::string name = "convexity_K" + std::to_string(K) + ".csv";
    write_convexity_csv(out_path(opts, name).string(), scan);
    outputs.push_back(name);
  }
  const QuadratureGrid grid =
      sweep_grid(model, gs, std::max(std::abs(mw.lo), std::abs(mw.hi)) * 1.5 + 1.0 +
                                model.potential.bound_sup());
  RunManifest manifest = base_manifest(model, grid);
  manifest.outputs = outputs;
  manifest.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest.sigma_window_note = "m grid [" + format_double(mw.lo) + ", " +
                               format_double(mw.hi) + "], " + std::to_string(mw.count) +
                               " points";
  manifest.write(out_path(opts, "manifest.json").string());
  return 0;
}

int cmd_correlations(const CommonOpts& opts, int max_distance) {
  const LatticeModel model = load_model_file(opts.config_path);
  const GridSpec gs{opts.grid_n, opts.grid_tol};
  const auto t0 = std::chrono::steady_clock::now();
  const DecayFit fit = decay_study(model, max_distance, gs);
  write_decay_csv(out_path(opts, "correlations.csv").string(), fit);
  const QuadratureGrid grid = sweep_grid(model, gs, std::abs(model.sigma));
  RunManifest manifest = base_manifest(model, grid);
  manifest.outputs = {"correlations.csv"};
  manifest.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest.write(out_path(opts, "manifest.json").string());
  return 0;
}

int cmd_chi(const CommonOpts& opts, double sigma, double xi_max, double xi_step) {
  const LatticeModel model = load_model_file(opts.config_path);
  const GridSpec gs{opts.grid_n, opts.grid_tol};
  const QuadratureGrid grid = sweep_grid(model, gs, std::abs(sigma) + 0.5);
  const TransferOperator op(model, grid);
  const double m = a_gce(op, sigma).d1;

  std::vector<double> xis;
  for (double xi = 0.0; xi <= xi_max + 1e-12; xi += xi_step)
    xis.push_back(xi);
  std::vector<std::complex<double>> phis;
  phis.reserve(xis.size());
  for (double xi : xis)
    phis.push_back(char_fn(op, sigma, m, xi));
  write_chi_csv(out_path(opts, "chi.csv").string(), xis, phis);

  RunManifest manifest = base_manifest(model, grid);
  manifest.outputs = {"chi.csv"};
  manifest.write(out_path(opts, "manifest.json").string());
  return 0;
}

int cmd_sample(const CommonOpts& opts, const std::string& ensemble, double m,
               std::optional<double> sigma, const ChainConfig& cfg,
               const std::string& traj_path, std::int64_t thin) {
  LatticeModel model = load_model_file(opts.config_path);
  if (sigma)
    model.sigma = *sigma;

  std::ofstream traj;
  TrajectorySink sink;
  if (!traj_path.empty()) {
    traj.open(out_path(opts, traj_path));
    if (!traj)
      throw ConfigError("cannot open trajectory file");
    traj << "step,site,value\n";
    sink.out = &traj;
    sink.thin = thin;
  }

  ChainStats stats;
  if (ensemble == "gce") {
    stats = metropolis_gce(model, cfg, {}, sink);
  } else if (ensemble == "kawasaki") {
    stats = kawasaki_ce(model, m, cfg, {}, sink);
  } else {
    throw ConfigError("sample: --ensemble must be gce or kawasaki");
  }
  std::cout << stats.to_json() << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinlab: grand-canonical and canonical thermodynamics of a 1D "
               "unbounded-spin lattice chain"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::optional<double> sigma_flag, m_flag;
  std::string k_list_text, window_text, m_window_text;
  int max_distance = 12;
  double delta = 1.0, xi_max = 8.0, xi_step = 0.05;
  std::string ensemble = "gce", traj_path;
  double m_target = 0.0;
  ChainConfig chain;
  std::int64_t thin = 1000;

  const auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", opts.config_path, "model configuration file")->required();
    sub->add_option("--grid-n", opts.grid_n, "quadrature nodes (default 128)");
    if (needs_out)
      sub->add_option("--out", opts.out_dir, "output directory (default .)");
  };

  auto* fe = app.add_subcommand("free-energy", "ThermoReport at one sigma or m (JSON)");
  add_common(fe, false);
  fe->add_option("--sigma", sigma_flag, "external field");
  fe->add_option("--m", m_flag, "mean spin (conjugate sigma is solved)");

  auto* eq = app.add_subcommand("equivalence", "equivalence-of-ensembles rate study");
  add_common(eq, true);
  eq->add_option("--K-list", k_list_text, "comma-separated lattice sizes")->required();
  eq->add_option("--sigma-window", window_text, "lo,hi,n (default -3,3,25)");

  auto* cx = app.add_subcommand("convexity", "curvature scan of h_bar and h_K");
  add_common(cx, true);
  cx->add_option("--K-list", k_list_text, "comma-separated lattice sizes");
  cx->add_option("--m-window", m_window_text, "lo,hi,n (default -2,2,21)");

  auto* co = app.add_subcommand("correlations", "covariance decay fit");
  add_common(co, true);
  co->add_option("--max-distance", max_distance, "largest site distance (default 12)");

  auto* chi = app.add_subcommand("chi", "characteristic function table");
  add_common(chi, true);
  double chi_sigma = 0.0;
  chi->add_option("--sigma", chi_sigma, "external field (default 0)");
  chi->add_option("--xi-max", xi_max, "largest xi (default 8)");
  chi->add_option("--xi-step", xi_step, "xi spacing (default 0.05)");
  chi->add_option("--delta", delta, "inner/outer split parameter (recorded)");

  auto* sm = app.add_subcommand("sample", "Metropolis (gce) or Kawasaki (ce) chain");
  add_common(sm, true);
  sm->add_option("--ensemble", ensemble, "gce | kawasaki (default gce)");
  sm->add_option("--m", m_target, "mean spin for the kawasaki chain");
  sm->add_option("--sigma", sigma_flag, "override the config's sigma");
  sm->add_option("--steps", chain.steps, "total steps (default 1e6)");
  sm->add_option("--burn-in", chain.burn_in, "discarded prefix (default 1e5)");
  sm->add_option("--seed", chain.seed, "PRNG seed (default 1)");
  sm->add_option("--width", chain.proposal_width, "proposal width");
  sm->add_option("--traj", traj_path, "thinned trajectory CSV filename");
  sm->add_option("--thin", thin, "trajectory thinning (default 1000)");

  try {
    app.parse(argc, argv);
    if (fe->parsed())
      return cmd_free_energy(opts, sigma_flag, m_flag);
    if (eq->parsed())
      return cmd_equivalence(opts, k_list_text, window_text);
    if (cx->parsed())
      return cmd_convexity(opts, k_list_text, m_window_text);
    if (co->parsed())
      return cmd_correlations(opts, max_distance);
    if (chi->parsed())
      return cmd_chi(opts, chi_sigma, xi_max, xi_step);
    if (sm->parsed()) {
      if (ensemble == "kawasaki" && !sm->count("--width"))
        chain.proposal_width = 0.7;
      return cmd_sample(opts, ensemble, m_target, sigma_flag, chain, traj_path, thin);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConsistencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateFitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
