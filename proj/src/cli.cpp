#include "swpass/cli.hpp"

#include "swpass/config.hpp"
#include "swpass/errors.hpp"
#include "swpass/hitting.hpp"
#include "swpass/io.hpp"
#include "swpass/measure.hpp"
#include "swpass/passivity.hpp"
#include "swpass/rng.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace swpass {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::size_t threads = 1;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunConfig resolve(const CommonFlags& flags) {
  RunConfig cfg = load_config(flags.config);
  if (flags.seed) cfg.seed = *flags.seed;
  cfg.sim.master_seed = cfg.seed;
  if (flags.out) cfg.output_dir = *flags.out;
  return cfg;
}

template <class Writer>
void write_csv(const fs::path& path, Writer&& writer) {
  std::ostringstream os;
  writer(os);
  write_text_file(path, os.str());
}

void write_summary(const fs::path& dir, const std::string& command, const json& config, json results) {
  json doc = {{"metadata", {{"tool", "swpass"}, {"command", command}, {"generated_at", utc_timestamp()}}},
              {"config", config},
              {"results", std::move(results)}};
  write_text_file(dir / "summary.json", doc.dump(2) + "\n");
}

void require_state(const RunConfig& cfg, const Plant& plant) {
  if (static_cast<std::size_t>(cfg.initial_state.size()) != plant.system().n()) {
    throw DimensionMismatch("initial_state must have length " + std::to_string(plant.system().n()));
  }
}

json moments_json(const Mat& finals, const std::vector<char>& diverged) {
  const Eigen::Index n = finals.rows();
  Vec mean = Vec::Zero(n);
  Vec var = Vec::Zero(n);
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < finals.cols(); ++i) {
    if (diverged[static_cast<std::size_t>(i)]) continue;
    mean += finals.col(i);
    ++count;
  }
  if (count > 0) mean /= static_cast<double>(count);
  for (Eigen::Index i = 0; i < finals.cols(); ++i) {
    if (diverged[static_cast<std::size_t>(i)]) continue;
    var += (finals.col(i) - mean).cwiseAbs2();
  }
  if (count > 1) var /= static_cast<double>(count - 1);
  Vec se = (var / std::max<double>(1.0, static_cast<double>(count))).cwiseSqrt();
  return {{"paths", finals.cols()},
          {"finite_paths", count},
          {"diverged", static_cast<std::size_t>(finals.cols()) - count},
          {"mean", vec_to_json(mean)},
          {"variance", vec_to_json(var)},
          {"mean_std_error", vec_to_json(se)}};
}

int cmd_simulate(const CommonFlags& flags) {
  const RunConfig cfg = resolve(flags);
  const Plant plant = build_plant(cfg);
  require_state(cfg, plant);
  const fs::path dir = cfg.output_dir;
  const std::size_t paths = cfg.simulate ? cfg.simulate->paths : 1;
  if (paths < 1) throw ValidationError("config key 'simulate.paths' must be >= 1");

  const Trajectory first = simulate_path(plant, cfg.initial_state, cfg.sim, split_seed(cfg.seed, 0));
  write_csv(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, first); });

  const auto n = static_cast<Eigen::Index>(plant.system().n());
  Mat finals(n, static_cast<Eigen::Index>(paths));
  std::vector<char> diverged(paths, 0);
  SimConfig final_only = cfg.sim;
  const std::size_t last = cfg.sim.records() - 1;
  for_each_path(paths, flags.threads, [&](std::size_t i) {
    Vec last_x = Vec::Constant(n, std::nan(""));
    const PathOutcome o = run_path(plant, cfg.initial_state, final_only, split_seed(cfg.seed, i),
                                   [&](std::size_t rec, double, const Vec& x, const Vec&) {
                                     if (rec == last) last_x = x;
                                     return true;
                                   });
    finals.col(static_cast<Eigen::Index>(i)) = last_x;
    diverged[i] = o.diverged ? 1 : 0;
  });
  write_csv(dir / "final_states.csv", [&](std::ostream& os) {
    os << "path";
    for (Eigen::Index d = 0; d < n; ++d) os << ",x" << (d + 1);
    os << ",diverged\n";
    for (std::size_t i = 0; i < paths; ++i) {
      os << i;
      for (Eigen::Index d = 0; d < n; ++d) os << ',' << format_double(finals(d, static_cast<Eigen::Index>(i)));
      os << ',' << static_cast<int>(diverged[i]) << '\n';
    }
  });
  json results = {{"t_end", cfg.sim.t_end}, {"final_state", moments_json(finals, diverged)},
                  {"trajectory_diverged", first.diverged}};
  write_summary(dir, "simulate", cfg.to_json(), std::move(results));
  return 0;
}

ShellSpec resolve_shell(const RunConfig& cfg, const PassivitySpec& spec) {
  ShellSpec shell;
  shell.samples = spec.samples;
  shell.seed = cfg.seed;
  const bool cstr_sub = cfg.model.name == "cstr_subS";
  std::optional<CstrRadius> radius;
  if (cstr_sub) radius = cstr_delta_and_radius(cfg.model.cstr);
  const CstrParams& p = cfg.model.cstr;
  if (spec.center) {
    shell.center = *spec.center;
  } else if (cstr_sub) {
    shell.center = Vec::Constant(1, p.x1_dag);
  } else {
    throw ValidationError("missing required config key 'passivity.center'");
  }
  if (spec.inner_radius) {
    shell.inner_radius = *spec.inner_radius;
  } else if (radius) {
    shell.inner_radius = radius->R;
  } else {
    throw ValidationError("missing required config key 'passivity.inner_radius'");
  }
  if (spec.outer_radius) {
    shell.outer_radius = *spec.outer_radius;
  } else if (cstr_sub) {
    shell.outer_radius = std::min(p.x1_dag, p.c_in - p.x1_dag);
  } else {
    throw ValidationError("missing required config key 'passivity.outer_radius'");
  }
  shell.epsilon = spec.epsilon.value_or(radius ? 0.5 * radius->epsilon_max : 0.0);
  return shell;
}

int cmd_passivity(const CommonFlags& flags) {
  const RunConfig cfg = resolve(flags);
  if (!cfg.passivity) throw ValidationError("missing required config key 'passivity'");
  const Plant plant = build_plant(cfg);
  const StorageFunction V = build_storage(cfg);
  const ShellSpec shell = resolve_shell(cfg, *cfg.passivity);
  const PassivitySpec& spec = *cfg.passivity;
  PassivityReport report = spec.condition == "weak"
                               ? weak_passivity_scan(plant, V, shell)
                               : strict_weak_passivity_scan(plant, V, shell,
                                                            strict_kind_from_string(spec.condition.substr(7)),
                                                            spec.delta);
  json results = {{"report", to_json(report)},
                  {"pass", report.passivity_pass && report.drift_rate_pass && report.rank_pass},
                  {"instability_witness", instability_witness(plant, shell.center)}};
  if (cfg.model.name == "cstr" || cfg.model.name == "cstr_subS") {
    results["cstr_radius"] = to_json(cstr_delta_and_radius(cfg.model.cstr));
  }
  write_summary(cfg.output_dir, "passivity", cfg.to_json(), std::move(results));
  return 0;
}

int cmd_recurrence(const CommonFlags& flags) {
  const RunConfig cfg = resolve(flags);
  if (!cfg.recurrence) throw ValidationError("missing required config key 'recurrence'");
  const RecurrenceSpec& spec = *cfg.recurrence;
  const Plant plant = build_plant(cfg);
  require_state(cfg, plant);
  const StorageFunction V = build_storage(cfg);
  const fs::path dir = cfg.output_dir;

  const RecurrenceEstimate est = mean_recurrence_estimate(plant, V, spec.k, cfg.initial_state, spec.target_center,
                                                          spec.target_radius, spec.paths, cfg.sim, flags.threads);

  const Lemma3Bounds bounds = lemma3_bounds(spec.k, spec.C, spec.V1, spec.V2);
  SimConfig long_cfg = cfg.sim;
  long_cfg.t_end = spec.episode_t_end;
  long_cfg.master_seed = mix64(cfg.seed ^ kGoldenGamma);
  long_cfg.validate();
  EpisodeScanner scanner(spec.V1, spec.V2);
  constexpr std::size_t kBatches = 20;
  std::vector<std::size_t> above(kBatches, 0);
  std::vector<std::size_t> total(kBatches, 0);
  const double t_end = spec.episode_t_end;
  const PathOutcome outcome =
      run_path(plant, cfg.initial_state, long_cfg, long_cfg.master_seed, [&](std::size_t, double t, const Vec& x, const Vec&) {
        const double v = V.value(x);
        scanner.observe(t, v);
        const auto b = std::min(kBatches - 1, static_cast<std::size_t>(t / t_end * kBatches));
        ++total[b];
        if (v >= spec.V2) ++above[b];
        return true;
      });
  if (outcome.diverged) throw Diverged("recurrence: long path diverged");
  const EpisodeStatistics stats = episode_statistics(scanner.times());
  std::size_t above_all = 0;
  std::size_t total_all = 0;
  double mean_b = 0.0;
  for (std::size_t b = 0; b < kBatches; ++b) {
    above_all += above[b];
    total_all += total[b];
    mean_b += static_cast<double>(above[b]) / static_cast<double>(std::max<std::size_t>(total[b], 1));
  }
  mean_b /= kBatches;
  double ss = 0.0;
  for (std::size_t b = 0; b < kBatches; ++b) {
    const double f = static_cast<double>(above[b]) / static_cast<double>(std::max<std::size_t>(total[b], 1));
    ss += (f - mean_b) * (f - mean_b);
  }
  const double occ = static_cast<double>(above_all) / static_cast<double>(total_all);
  const double occ_se = std::sqrt(ss / (kBatches - 1) / kBatches);

  write_csv(dir / "episodes.csv", [&](std::ostream& os) { write_episodes_csv(os, scanner.times()); });
  const bool exc_ok = stats.excursion.count > 0 && stats.excursion.mean + 1.96 * stats.excursion.std_error >= bounds.excursion_lower;
  const bool desc_ok = stats.descent.count > 0 && stats.descent.mean - 1.96 * stats.descent.std_error <= bounds.descent_upper;
  const bool occ_ok = occ - 1.96 * occ_se <= bounds.occupation_upper;
  json results = {{"first_passage", to_json(est)},
                  {"episodes", to_json(stats)},
                  {"episode_started_above", scanner.times().started_above},
                  {"occupation_above_V2", {{"fraction", occ}, {"std_error", occ_se}}},
                  {"lemma3_bounds", to_json(bounds)},
                  {"lemma3_satisfied", {{"excursion", exc_ok}, {"descent", desc_ok}, {"occupation", occ_ok}}}};
  write_summary(dir, "recurrence", cfg.to_json(), std::move(results));
  return 0;
}

int cmd_measure(const CommonFlags& flags) {
  const RunConfig cfg = resolve(flags);
  if (!cfg.measure) throw ValidationError("missing required config key 'measure'");
  const MeasureSpec& spec = *cfg.measure;
  const Plant plant = build_plant(cfg);
  require_state(cfg, plant);
  const fs::path dir = cfg.output_dir;
  std::vector<Vec> x0s = spec.initial_states;
  if (x0s.empty()) x0s.push_back(cfg.initial_state);
  if (spec.times.size() < 2) throw ValidationError("config key 'measure.times' needs at least two entries");

  SimConfig ens = cfg.sim;
  ens.t_end = std::max(spec.times.back(), cfg.sim.dt);
  const ConvergenceTable table =
      convergence_diagnostic(plant, x0s, spec.times, spec.paths, ens, spec.box, spec.bins, flags.threads);
  for (std::size_t a = 0; a < table.measures.size(); ++a) {
    for (std::size_t j = 0; j < table.measures[a].size(); ++j) {
      write_csv(dir / ("transition_x" + std::to_string(a) + "_t" + std::to_string(j) + ".csv"),
                [&](std::ostream& os) { write_measure_csv(os, table.measures[a][j]); });
    }
  }

  SimConfig erg = cfg.sim;
  erg.t_end = spec.ergodic_t_end;
  erg.master_seed = mix64(cfg.seed ^ kGoldenGamma);
  erg.validate();
  if (!(spec.burn_in >= 0.0 && spec.burn_in < erg.t_end)) {
    throw ValidationError("config key 'measure.burn_in' must lie in [0, ergodic_t_end)");
  }
  HistogramAccumulator acc(spec.box, spec.bins);
  std::size_t in_set = 0;
  std::size_t counted = 0;
  std::optional<StorageFunction> V;
  if (spec.theorem6) V = build_storage(cfg);
  const PathOutcome outcome =
      run_path(plant, cfg.initial_state, erg, erg.master_seed, [&](std::size_t, double t, const Vec& x, const Vec&) {
        if (t >= spec.burn_in) {
          acc.add(x);
          ++counted;
          if (spec.theorem6 && (x - spec.theorem6->center).norm() < spec.theorem6->set_radius) ++in_set;
        }
        return true;
      });
  if (outcome.diverged) throw Diverged("measure: ergodic path diverged");
  const HistogramMeasure ergodic = acc.finish();
  write_csv(dir / "ergodic.csv", [&](std::ostream& os) { write_measure_csv(os, ergodic); });

  json results = {{"convergence", to_json(table)},
                  {"ergodic_vs_transition_l1", l1_distance(ergodic, table.measures.front().back())},
                  {"ergodic_out_of_box_mass", ergodic.out_of_box_mass()}};
  if (spec.theorem6) {
    const Theorem6Spec& t6 = *spec.theorem6;
    const double V_B = sampled_inf_outside(
        *V, [&](const Vec& x) { return (x - t6.center).norm() < t6.set_radius; }, plant.system().domain(), t6.samples);
    const double V0 = sampled_sup_in_ball(*V, t6.center, t6.shell_radius, t6.samples, cfg.seed);
    const double bound = theorem6_lower_bound(t6.k, t6.C, V_B, V0);
    const double empirical = static_cast<double>(in_set) / static_cast<double>(std::max<std::size_t>(counted, 1));
    results["theorem6"] = {{"V_B", V_B}, {"V0", V0},       {"bound", bound},
                           {"empirical", empirical}, {"holds", empirical >= bound}};
  }
  write_summary(dir, "measure", cfg.to_json(), std::move(results));
  return 0;
}

int cmd_cstr(const CommonFlags& flags) {
  const RunConfig cfg = resolve(flags);
  const CstrExperimentConfig ecfg = build_cstr_config(cfg);
  const CstrExperimentResult res = run_cstr_experiment(ecfg, flags.threads);
  const fs::path dir = cfg.output_dir;
  write_csv(dir / "sample_path.csv", [&](std::ostream& os) { write_trajectory_csv(os, res.sample_path); });
  write_csv(dir / "ergodic_x1.csv", [&](std::ostream& os) { write_measure_csv(os, *res.ergodic_x1); });
  for (std::size_t j = 0; j < res.snapshots.measures.front().size(); ++j) {
    write_csv(dir / ("snapshot_t" + std::to_string(j) + ".csv"),
              [&](std::ostream& os) { write_measure_csv(os, res.snapshots.measures.front()[j]); });
  }
  json results = {{"controller", res.controller},
                  {"applied_open_loop_input", res.applied_open_loop_input},
                  {"radius", to_json(res.radius)},
                  {"band_x1", to_json(res.band_x1)},
                  {"band_x2", to_json(res.band_x2)},
                  {"conservation_max_error", res.conservation_max_error},
                  {"snapshots", to_json(res.snapshots)},
                  {"weak_passivity", to_json(res.weak)},
                  {"strict_passivity", to_json(res.strict)},
                  {"instability_witness", res.witness},
                  {"theorem6", to_json(res.theorem6)},
                  {"noise_is_small", ecfg.params.noise_is_small()}};
  write_summary(dir, "cstr", cfg.to_json(), std::move(results));
  return 0;
}

int cmd_linear_cert(const std::string& a, const std::string& b, const std::string& c, const std::string& d,
                    const std::string& sigma, const std::optional<std::string>& out, std::ostream& os) {
  LinearSystem sys;
  sys.A = read_matrix_csv(a);
  sys.B = read_matrix_csv(b);
  sys.C = read_matrix_csv(c);
  sys.sigma = sigma.empty() ? Mat::Zero(sys.A.rows(), 1) : read_matrix_csv(sigma);
  const Mat D = read_matrix_csv(d);
  sys.validate();
  const LinearCertificate cert = verify_linear_weak_passivity(sys, D);
  json results = {{"certificate", to_json(cert)}, {"D", mat_to_json(D)}};
  if (cert.pass) {
    results["passive_radius"] = linear_passive_radius(D, sys.sigma, cert.lyap_max_eig);
  } else {
    results["passive_radius"] = nullptr;
  }
  const json config = {{"A", mat_to_json(sys.A)},
                       {"B", mat_to_json(sys.B)},
                       {"C", mat_to_json(sys.C)},
                       {"sigma", mat_to_json(sys.sigma)}};
  if (out) write_summary(*out, "linear-cert", config, results);
  os << results.dump(2) << '\n';
  return 0;
}

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", flags.seed, "override the master seed");
  sub->add_option("--out", flags.out, "override the output directory");
  sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic weak passivity toolkit"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::vector<std::pair<CLI::App*, int (*)(const CommonFlags&)>> commands;
  auto add = [&](const char* name, const char* help, int (*fn)(const CommonFlags&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    commands.emplace_back(sub, fn);
  };
  add("simulate", "Euler-Maruyama paths and ensembles", cmd_simulate);
  add("passivity", "weak passivity, drift-rate, generator-bound and rank scans", cmd_passivity);
  add("recurrence", "first-passage and episode statistics", cmd_recurrence);
  add("measure", "transition and ergodic histograms, convergence, invariant-measure bound", cmd_measure);
  add("cstr", "full reactor experiment bundle", cmd_cstr);

  std::string a, b, c, d, sigma;
  std::optional<std::string> lc_out;
  CLI::App* lc = app.add_subcommand("linear-cert", "linear weak passivity certificate from matrix CSVs");
  lc->add_option("--A", a, "state matrix CSV")->required()->check(CLI::ExistingFile);
  lc->add_option("--B", b, "input matrix CSV")->required()->check(CLI::ExistingFile);
  lc->add_option("--C", c, "output matrix CSV")->required()->check(CLI::ExistingFile);
  lc->add_option("--D", d, "storage matrix CSV")->required()->check(CLI::ExistingFile);
  lc->add_option("--sigma", sigma, "noise matrix CSV")->check(CLI::ExistingFile);
  lc->add_option("--out", lc_out, "output directory for summary.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << "config schema: see README.md, section \"Configuration\"\n";
    return 1;
  }

  try {
    if (lc->parsed()) return cmd_linear_cert(a, b, c, d, sigma, lc_out, out);
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(flags);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace swpass
