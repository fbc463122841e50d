#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snls/diagnostics.hpp"
#include "snls/dynamics.hpp"
#include "snls/error.hpp"

namespace snls {

inline constexpr std::string_view kVersion = "snls 0.1.0";

struct NoiseSettings {
  NoiseKind kind = NoiseKind::multiplier;
  double amplitude = 0.1;
  double sigma = 3.5;
  std::optional<double> cutoff;
};

struct InitialSettings {
  /// constant | plane_wave | gaussian_bump | random
  std::string type = "gaussian_bump";
  double amplitude = 0.5;
  double width = 1.0;
  std::complex<double> value{1.0, 0.0};
  std::vector<int> modes;
  double h1_norm = 1.0;
  double k_max = 4.0;
  std::uint64_t seed = 1;
};

/// Everything a run needs. Defaults are what an empty config file yields.
struct RunConfig {
  int dim = 2;
  std::size_t n = 64;
  double box_length = 6.283185307179586;
  double t_final = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::direct;
  std::size_t snapshot_stride = 1;
  bool nonlinearity = true;
  std::vector<double> dt_list;

  NoiseSettings noise;
  InitialSettings initial;

  std::size_t ensemble_size = 1;
  std::uint64_t master_seed = 0;
  double eta = 1.0;
  unsigned workers = 1;

  std::filesystem::path output_dir = "snls_out";
  bool emit_snapshots = false;

  GridPtr make_grid() const;
  NoiseSpec make_noise(const GridPtr& grid) const;
  ComplexField make_initial(const GridPtr& grid) const;
  SolverConfig solver_config() const;

  /// Every field as `section.key = value` lines, shortest round-trip doubles.
  std::string canonical_text() const;
  /// FNV-1a 64 of canonical_text().
  std::uint64_t hash() const;
};

struct ConfigIssue {
  std::size_t line = 0;  ///< 0 when the issue spans several keys
  std::string key;
  std::string message;
};

/// All field-level problems found while parsing one document.
class ConfigParseError : public ConfigError {
 public:
  explicit ConfigParseError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Parses `[section]` / `key = value` text; throws ConfigParseError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Ensembles --------------------------------------------------------------------

struct MemberSummary {
  std::size_t index = 0;
  bool failed = false;
  std::string failure;
  double final_energy = 0.0;
  double sup_energy = 0.0;
  std::size_t intervals = 0;
  double ham3_final = 0.0;
  double residual_final = 0.0;
};

struct EnsembleReport {
  std::vector<MemberSummary> members;
  MomentEstimate final_energy;
  MomentEstimate sup_energy;
  MomentEstimate ham3_final;
  MomentEstimate residual_final;
  MomentEstimate intervals;
  std::vector<double> sup_energy_quantiles;
  std::size_t failed = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::string version{kVersion};
};

/// Diagnostics of one member from its trajectory.
MemberSummary summarize_member(const Trajectory& trajectory, double eta, std::size_t index);

/// Runs `ensemble_size` independent solves (stream id = member index) on up
/// to `workers` threads and reduces them. Member failures are recorded, not
/// thrown. With `write_outputs`, writes report.txt and members.csv under
/// output_dir, plus member_NNNNNN.bin trajectories when emit_snapshots is on.
EnsembleReport run_ensemble(const RunConfig& config, bool write_outputs = false);

/// Recomputes the aggregates from the member list.
void aggregate(EnsembleReport& report);

void write_report(const EnsembleReport& report, const std::filesystem::path& path);
void write_members_csv(const EnsembleReport& report, const std::filesystem::path& path);

// Refinement studies --------------------------------------------------------

/// Checks a dt list: strictly decreasing, each dividing t_final and each an
/// integer multiple of the finest. Returns the factors dt_i / dt_finest.
std::vector<std::size_t> refinement_factors(std::span<const double> dt_list, double t_final);

struct ConvergenceStudy {
  std::vector<double> dts;
  /// RMS over members of ||u_dt(T) - u_finest(T)||_L2.
  std::vector<double> error_vs_finest;
  /// RMS over members of ||u_dt_i(T) - u_dt_{i+1}(T)||_L2.
  std::vector<double> successive_difference;
  /// Least-squares slope of log successive_difference against log dt.
  double observed_order = 0.0;
  /// Least-squares slope of log error_vs_finest against log dt; the
  /// reference's own error biases it, so it is reported for completeness.
  double order_vs_finest = 0.0;
};

/// Every dt sees the same Brownian path: increments are generated at the
/// finest dt and summed for coarser runs. Stochastic schemes average over
/// ensemble_size members.
ConvergenceStudy convergence_study(const RunConfig& config, std::span<const double> dt_list);

struct CrossSolverStudy {
  std::vector<double> dts;
  /// ||u_direct(T) - u_dpd(T)||_L2 on a shared path.
  std::vector<double> distance;
  double observed_order = 0.0;
};

CrossSolverStudy cross_solver_study(const RunConfig& config, std::span<const double> dt_list);

struct LedgerRefinement {
  std::vector<double> dts;
  std::vector<double> literal_residual;
  std::vector<double> balanced_residual;
  bool literal_non_increasing = false;
  bool balanced_non_increasing = false;
  /// Empty when the literal ledger passes; otherwise the discrepancy report.
  std::string discrepancy;
};

/// Final-time |residual| of both ledger variants for dt, dt/2, ... on one
/// fixed Brownian path (direct scheme).
LedgerRefinement ledger_refinement(const RunConfig& config, std::size_t levels);

struct NoiseStatistics {
  double t = 0.0;
  double hs_h1 = 0.0;
  /// E ||Psi(t)||^2_{H1} against the Ito-isometry value t ||phi||^2.
  MomentEstimate h1_moment;
  double h1_expected = 0.0;
  /// E sup_{tau <= t} ||Psi(tau)||^2_{H1}.
  MomentEstimate h1_sup_moment;
  /// Same estimate with the amplitude doubled on the same seeds.
  MomentEstimate doubled_h1_moment;
  MomentEstimate doubled_ratio;
};

/// Psi-only ensemble of ensemble_size members.
NoiseStatistics noise_statistics(const RunConfig& config);

/// E[sup_t E(u)] per amplitude, same seeds for every amplitude.
std::vector<EnergyBoundReport> energy_bound_sweep(const RunConfig& config,
                                                  std::span<const double> amplitudes);

/// Slope of the least-squares line through (log x, log y).
double fit_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace snls
