#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "snls/lattice.hpp"
#include "snls/noise.hpp"

namespace snls {

enum class Scheme : std::uint8_t {
  direct = 0,               ///< split-step on u = 1 + v with additive increments
  dpd = 1,                  ///< split-step on v = u - 1 - Psi, Psi sampled exactly
  deterministic_gp = 2,     ///< i u_t + Lap u = (|u|^2 - 1) u
  deterministic_cubic = 3,  ///< i u_t + Lap u = |u|^2 u
};

std::string_view to_string(Scheme scheme) noexcept;
/// Throws ConfigError for unknown names.
Scheme parse_scheme(std::string_view name);
bool is_stochastic(Scheme scheme) noexcept;

struct SolverConfig {
  GridPtr grid;
  double t_final = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::deterministic_gp;
  NoiseSpec noise;
  /// The state is stored as v with u = 1 + v.
  ComplexField initial_v;
  std::size_t snapshot_stride = 1;
  /// Switches the nonlinear substep off (linear Schrodinger flow only).
  bool nonlinearity = true;

  /// Number of time steps, t_final / dt.
  std::size_t steps() const;
  /// Throws ConfigError on violated invariants.
  void validate() const;
};

/// Which equation the stored u-snapshots solve.
enum class Frame { gross_pitaevskii, cubic };

struct Trajectory {
  SolverConfig config;
  std::vector<double> times;
  std::vector<ComplexField> v;
  /// Psi snapshots; zero fields unless scheme is dpd.
  std::vector<ComplexField> psi;
  std::optional<NoisePath> noise_path;
  Frame frame = Frame::gross_pitaevskii;

  std::size_t size() const noexcept { return times.size(); }
  /// u - 1 = v + Psi at one snapshot.
  ComplexField v_star(std::size_t index) const;
  ComplexField u(std::size_t index) const;
  /// Time step between consecutive snapshots.
  double snapshot_dt() const noexcept;
};

// Pointwise kernels --------------------------------------------------------

/// (|u|^2 - 1) u.
ComplexField gp_nonlinearity(const ComplexField& u);

/// |v|^2 v + g(v, Psi), summed term by term.
Complex dpd_nonlinearity(Complex v, Complex psi) noexcept;
ComplexField dpd_nonlinearity(const ComplexField& v, const ComplexField& psi);

/// Exact flow of i u_t = (|u|^2 - 1) u: u * exp(-i (|u|^2 - 1) dt).
ComplexField nonlinear_phase_substep(const ComplexField& u, double dt);

// Steps ----------------------------------------------------------------------

/// Strang step of the deterministic flow in the given frame, acting on v.
ComplexField strang_step_deterministic(const ComplexField& v, double dt,
                                       Frame frame = Frame::gross_pitaevskii,
                                       bool nonlinearity = true);

/// Strang sandwich followed by u += -i * increment.
ComplexField strang_step_direct(const ComplexField& v, const ComplexField& increment, double dt);
/// Samples the increment from `noise` and `rng` (appended to `record` when given).
ComplexField strang_step_direct(const ComplexField& v, const NoiseSpec& noise, double dt,
                                RngState& rng, NoisePath* record = nullptr);

/// Strang step for i v_t + Lap v = |v|^2 v + g(v, Psi). `psi` is the value at
/// the start of the step; the nonlinear substep freezes it at the midpoint,
/// S(dt/2) psi, and takes one classical RK4 step.
ComplexField strang_step_dpd(const ComplexField& v, const ComplexField& psi, double dt);

// Driver ---------------------------------------------------------------------

struct SolveOptions {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  /// Drive stochastic schemes with this path instead of sampling one. Its
  /// step count and dt must match the config.
  const NoisePath* noise_path = nullptr;
};

/// Integrates to t_final. Throws BlowUpError naming the first step with a
/// non-finite value.
Trajectory solve(const SolverConfig& config, const SolveOptions& options = {});

/// L2 norm of u(t) - S(t)u0 + i int S(t-s) N(u(s)) ds + i sum S(t - t_{m+1}) dW_m
/// with trapezoid quadrature on the snapshot times.
double duhamel_residual(const Trajectory& trajectory, std::size_t time_index);

/// u -> exp(-i t) u snapshot by snapshot; the result is in the cubic frame.
Trajectory gauge_transform(const Trajectory& trajectory);

// Initial data (all return v = u - 1) -----------------------------------------

ComplexField initial_constant(const GridPtr& grid, Complex alpha);
ComplexField initial_plane_wave(const GridPtr& grid, std::span<const int> modes);
/// Real bump amplitude * exp(-|x - c|^2 / (2 width^2)) centred in the box.
ComplexField initial_gaussian_bump(const GridPtr& grid, double amplitude, double width);
/// Random modes with 0 < |k| <= k_max scaled to the requested homogeneous H^1 norm.
ComplexField initial_random_band_limited(const GridPtr& grid, double h1_norm, double k_max,
                                         std::uint64_t seed);

}  // namespace snls
