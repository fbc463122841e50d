// Command-line front end: one subcommand per study.
//
//   snls <subcommand> --config <path> [--seed N] [--out DIR] [--workers K]
//
// Exit status is 0 on success, 1 for configuration or usage problems and 2
// when a run fails.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "snls/diagnostics.hpp"
#include "snls/harness.hpp"
#include "snls/io.hpp"

namespace fs = std::filesystem;
using namespace snls;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required = true) {
  auto* c = cmd->add_option("--config", o.config, "run configuration file");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "override master_seed");
  cmd->add_option("--out", o.out, "override output directory");
  cmd->add_option("--workers", o.workers, "override worker thread count");
}

RunConfig resolve(const CommonOptions& o) {
  if (!o.config.empty() && !fs::is_regular_file(o.config)) {
    throw ConfigError("config file " + o.config + " not found");
  }
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.workers) {
    if (*o.workers == 0) throw ConfigError("--workers must be positive");
    cfg.workers = *o.workers;
  }
  return cfg;
}

std::string hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

// key = value summary file shared by every subcommand.
class Report {
 public:
  Report(const RunConfig& cfg, std::string_view command) {
    line("version", std::string(kVersion));
    line("command", std::string(command));
    line("config_hash", hex(cfg.hash()));
    line("master_seed", std::to_string(cfg.master_seed));
  }

  void line(std::string_view key, const std::string& value) {
    body_ += std::string(key) + " = " + value + '\n';
  }
  void number(std::string_view key, double value) { line(key, format_double(value)); }
  void estimate(std::string_view key, const MomentEstimate& m) {
    number(std::string(key) + ".mean", m.mean);
    number(std::string(key) + ".std_error", m.std_error);
  }
  void series(std::string_view key, const std::vector<double>& values) {
    std::string s;
    for (double v : values) s += (s.empty() ? "" : " ") + format_double(v);
    line(key, s);
  }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << body_;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
  }
  const std::string& text() const { return body_; }

 private:
  std::string body_;
};

fs::path prepare(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  return cfg.output_dir;
}

int cmd_simulate(const RunConfig& cfg) {
  const auto dir = prepare(cfg);
  const auto traj = solve(cfg.solver_config(), {cfg.master_seed, 0, nullptr});
  const auto table = diagnostics_table(traj);
  emit_csv(table, dir / "diagnostics.csv");
  write_trajectory(dir / "trajectory.bin", traj);
  if (traj.noise_path) write_noise_path(dir / "noise.bin", *traj.noise_path, *traj.config.grid);

  const auto& l = table.ledger;
  Report r(cfg, "simulate");
  r.line("scheme", std::string(to_string(cfg.scheme)));
  r.number("t_final", l.times.back());
  r.number("energy_initial", l.energy.front());
  r.number("energy_final", l.energy.back());
  r.number("residual_final", l.residual.back());
  r.number("x1", table.x1_cum.back());
  r.number("l6", table.l6_cum.back());
  if (traj.size() >= 2) {
    const auto s = strichartz_report(traj, {0, traj.size() - 1});
    r.number("strichartz.grad_l2_l4", s.grad_l2_l4);
    r.number("strichartz.grad_l6_l12_5", s.grad_l6_l12_5);
    r.number("strichartz.grad_linf_l2", s.grad_linf_l2);
    r.number("strichartz.s1_proxy", s.s1_proxy);
  }
  r.write(dir / "report.txt");
  std::cout << r.text();
  return 0;
}

int cmd_ensemble(const RunConfig& cfg) {
  const auto report = run_ensemble(cfg, true);
  std::cout << "members " << report.members.size() << ", failed " << report.failed << '\n'
            << "sup energy " << format_double(report.sup_energy.mean) << " +- "
            << format_double(report.sup_energy.std_error) << '\n'
            << "ham3(T) " << format_double(report.ham3_final.mean) << " +- "
            << format_double(report.ham3_final.std_error) << '\n'
            << "report " << (cfg.output_dir / "report.txt").string() << '\n';
  return report.failed == report.members.size() ? kExitRuntime : 0;
}

int cmd_noise_stats(const RunConfig& cfg) {
  const auto dir = prepare(cfg);
  const auto s = noise_statistics(cfg);
  Report r(cfg, "noise-stats");
  r.line("members", std::to_string(cfg.ensemble_size));
  r.number("t", s.t);
  r.number("hs_h1", s.hs_h1);
  r.number("h1_expected", s.h1_expected);
  r.estimate("h1", s.h1_moment);
  r.estimate("h1_sup", s.h1_sup_moment);
  r.estimate("h1_doubled", s.doubled_h1_moment);
  r.estimate("doubled_ratio", s.doubled_ratio);
  r.write(dir / "report.txt");
  std::cout << r.text();
  return 0;
}

int cmd_verify_energy(RunConfig cfg, std::size_t levels) {
  const auto dir = prepare(cfg);
  cfg.snapshot_stride = 1;
  const auto traj = solve(cfg.solver_config(), {cfg.master_seed, 0, nullptr});
  emit_csv(diagnostics_table(traj, LedgerVariant::literal), dir / "ledger_literal.csv");
  emit_csv(diagnostics_table(traj, LedgerVariant::balanced), dir / "ledger_balanced.csv");

  Report r(cfg, "verify-energy");
  if (is_stochastic(cfg.scheme)) {
    const auto ref = ledger_refinement(cfg, levels);
    r.series("dt", ref.dts);
    r.series("literal_residual", ref.literal_residual);
    r.series("balanced_residual", ref.balanced_residual);
    r.line("literal_non_increasing", ref.literal_non_increasing ? "yes" : "no");
    r.line("balanced_non_increasing", ref.balanced_non_increasing ? "yes" : "no");
    if (!ref.discrepancy.empty()) {
      std::ofstream(dir / "ledger_discrepancy.txt") << ref.discrepancy;
      r.line("discrepancy_report", (dir / "ledger_discrepancy.txt").string());
    }
  } else {
    const auto l = ito_ledger(traj);
    double drift = 0.0;
    for (double e : l.energy) drift = std::max(drift, std::abs(e - l.energy.front()));
    r.number("relative_drift", drift / l.energy.front());
  }
  r.write(dir / "report.txt");
  std::cout << r.text();
  return 0;
}

std::vector<double> default_dt_list(const RunConfig& cfg) {
  if (!cfg.dt_list.empty()) return cfg.dt_list;
  return {4.0 * cfg.dt, 2.0 * cfg.dt, cfg.dt, 0.5 * cfg.dt};
}

int cmd_converge(const RunConfig& cfg, bool cross) {
  const auto dir = prepare(cfg);
  const auto dts = default_dt_list(cfg);
  Report r(cfg, "converge");
  std::ofstream csv(dir / "convergence.csv", std::ios::trunc);
  if (cross) {
    const auto study = cross_solver_study(cfg, dts);
    csv << "dt,distance\n";
    for (std::size_t i = 0; i < study.dts.size(); ++i) {
      csv << format_double(study.dts[i]) << ',' << format_double(study.distance[i]) << '\n';
    }
    r.line("study", "direct_vs_dpd");
    r.series("dt", study.dts);
    r.series("distance", study.distance);
    r.number("observed_order", study.observed_order);
  } else {
    const auto study = convergence_study(cfg, dts);
    csv << "dt,error_vs_finest,successive_difference\n";
    for (std::size_t i = 0; i < study.dts.size(); ++i) {
      csv << format_double(study.dts[i]) << ',' << format_double(study.error_vs_finest[i]) << ','
          << (i < study.successive_difference.size() ? format_double(study.successive_difference[i]) : "")
          << '\n';
    }
    r.line("study", std::string(to_string(cfg.scheme)));
    r.series("dt", study.dts);
    r.series("error_vs_finest", study.error_vs_finest);
    r.series("successive_difference", study.successive_difference);
    r.number("observed_order", study.observed_order);
    r.number("order_vs_finest", study.order_vs_finest);
  }
  if (!csv) throw IoError("write failed for " + (dir / "convergence.csv").string());
  r.write(dir / "report.txt");
  std::cout << r.text();
  return 0;
}

int cmd_partition(const RunConfig& cfg, const std::string& trajectory_file, std::vector<double> etas) {
  const auto dir = prepare(cfg);
  const Trajectory traj = trajectory_file.empty()
                              ? solve(cfg.solver_config(), {cfg.master_seed, 0, nullptr})
                              : read_trajectory(trajectory_file);
  if (etas.empty()) etas.push_back(cfg.eta);

  Report r(cfg, "partition");
  if (!trajectory_file.empty()) r.line("trajectory", trajectory_file);
  std::ofstream csv(dir / "partition.csv", std::ios::trunc);
  csv << "eta,interval,start_time,end_time,x1,irreducible\n";
  std::vector<double> counts;
  for (double eta : etas) {
    const auto p = partition_intervals(traj, eta);
    for (std::size_t i = 0; i < p.count(); ++i) {
      csv << format_double(eta) << ',' << i << ',' << format_double(traj.times[p.intervals[i].start_index])
          << ',' << format_double(traj.times[p.intervals[i].end_index]) << ',' << format_double(p.norms[i])
          << ',' << (p.irreducible[i] ? 1 : 0) << '\n';
    }
    counts.push_back(static_cast<double>(p.count()));
  }
  if (!csv) throw IoError("write failed for " + (dir / "partition.csv").string());
  r.series("eta", etas);
  r.series("intervals", counts);
  r.write(dir / "report.txt");
  std::cout << r.text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulator for the stochastic Gross-Pitaevskii equation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonOptions common;
  auto* simulate = app.add_subcommand("simulate", "one trajectory with diagnostics");
  auto* ensemble = app.add_subcommand("ensemble", "Monte Carlo ensemble and report");
  auto* noise = app.add_subcommand("noise-stats", "moments of the stochastic convolution");
  auto* verify = app.add_subcommand("verify-energy", "Ito energy ledger and its refinement");
  auto* converge = app.add_subcommand("converge", "time-step refinement study");
  auto* partition = app.add_subcommand("partition", "X1 interval partition of a trajectory");
  for (auto* cmd : {simulate, ensemble, noise, verify, converge}) add_common(cmd, common);
  add_common(partition, common, false);

  std::size_t levels = 4;
  verify->add_option("--levels", levels, "number of dt levels (dt halved each time)")
      ->check(CLI::Range(2, 12));
  bool cross = false;
  converge->add_flag("--cross", cross, "compare the direct and dpd schemes instead");
  std::string trajectory_file;
  std::vector<double> etas;
  partition->add_option("--trajectory", trajectory_file, "stored trajectory (SNLSTRJ1)")
      ->check(CLI::ExistingFile);
  partition->add_option("--eta", etas, "one or more thresholds (default: config eta)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const RunConfig cfg = resolve(common);
    if (*simulate) return cmd_simulate(cfg);
    if (*ensemble) return cmd_ensemble(cfg);
    if (*noise) return cmd_noise_stats(cfg);
    if (*verify) return cmd_verify_energy(cfg, levels);
    if (*converge) return cmd_converge(cfg, cross);
    if (*partition) return cmd_partition(cfg, trajectory_file, etas);
  } catch (const ConfigParseError& e) {
    for (const auto& issue : e.issues()) {
      std::cerr << "config";
      if (issue.line) std::cerr << ':' << issue.line;
      if (!issue.key.empty()) std::cerr << ": " << issue.key;
      std::cerr << ": " << issue.message << '\n';
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up at step " << e.step() << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
