#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "snls/lattice.hpp"

namespace snls {

enum class NoiseKind { zero, multiplier, rank_list };

/// The Hilbert-Schmidt operator phi acting on the cylindrical Wiener process.
///
/// `multiplier` is diagonal in the discrete Fourier basis with symbol
/// amplitude * (1 + |k|^2)^(-sigma/2), optionally truncated to |k| <= cutoff.
/// `rank_list` is given by its images phi_n = phi e_n.
class NoiseSpec {
 public:
  /// Zero noise not yet bound to a grid.
  NoiseSpec() = default;

  static NoiseSpec zero(GridPtr grid);
  static NoiseSpec multiplier(GridPtr grid, double amplitude, double sigma,
                              std::optional<double> cutoff = std::nullopt);
  static NoiseSpec rank_list(GridPtr grid, std::vector<ComplexField> columns);

  NoiseKind kind() const noexcept { return kind_; }
  const GridPtr& grid() const noexcept { return grid_; }
  double amplitude() const noexcept { return amplitude_; }
  double sigma() const noexcept { return sigma_; }
  std::optional<double> cutoff() const noexcept { return cutoff_; }

  /// phi-hat(k) per flat spectral index (multiplier kind; zeros otherwise).
  std::span<const double> symbol() const noexcept { return symbol_; }
  std::span<const ComplexField> columns() const noexcept { return columns_; }

  /// True when every increment is identically zero.
  bool is_trivial() const noexcept;

  /// Same operator multiplied by c >= 0.
  NoiseSpec scaled(double c) const;

  /// sum_n |phi_n(x)|^2 at every lattice point.
  std::vector<double> variance_density() const;

 private:
  NoiseSpec(NoiseKind kind, GridPtr grid) : kind_(kind), grid_(std::move(grid)) {}

  NoiseKind kind_ = NoiseKind::zero;
  GridPtr grid_;
  double amplitude_ = 0.0;
  double sigma_ = 0.0;
  std::optional<double> cutoff_;
  std::vector<double> symbol_;
  std::vector<ComplexField> columns_;
};

/// ||phi||_{HS(L2; H^s)}.
double hs_norm(const NoiseSpec& spec, double s);

// ---------------------------------------------------------------------------
// Counter-based random numbers: every Gaussian is a pure function of
// (seed, stream, step, index), so a path does not depend on call order.

struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t step = 0;
};

/// Standard complex Gaussian (E|z|^2 = 1, real and imaginary parts
/// independent with variance 1/2) for one counter tuple.
Complex counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                         std::uint64_t index) noexcept;

/// One increment phi * dW over a step of length dt; advances rng.step.
ComplexField sample_wiener_increment(const NoiseSpec& spec, double dt, RngState& rng);

/// Recorded increments phi * dW, one per step.
struct NoisePath {
  double dt = 0.0;
  std::vector<ComplexField> increments;
  std::uint64_t rng_seed = 0;
  std::uint64_t stream_id = 0;

  std::size_t steps() const noexcept { return increments.size(); }
};

NoisePath generate_noise_path(const NoiseSpec& spec, double dt, std::size_t steps,
                              std::uint64_t seed, std::uint64_t stream_id);

/// Sums each block of `factor` consecutive increments; the result drives a
/// run with step dt * factor on the same Brownian path.
NoisePath coarsen(const NoisePath& fine, std::size_t factor);

/// Psi(t + dt) = S(dt) Psi(t) - i * increment. Exact in law for
/// multiplier-type phi because the propagator is unimodular mode by mode.
ComplexField step_stochastic_convolution(const ComplexField& psi, const ComplexField& increment,
                                         double dt);

/// Samples a fresh increment, advances Psi and appends the increment to
/// `record` when given.
ComplexField step_stochastic_convolution(const ComplexField& psi, const NoiseSpec& spec, double dt,
                                         RngState& rng, NoisePath* record = nullptr);

/// Snapshots of Psi alone, starting from Psi(0) = 0.
struct PsiPath {
  std::vector<double> times;
  std::vector<ComplexField> psi;
};

PsiPath sample_psi_path(const NoiseSpec& spec, double dt, std::size_t steps, std::uint64_t seed,
                        std::uint64_t stream_id, std::size_t snapshot_stride = 1);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo estimate of E[sup_{tau <= t} ||Psi(tau)||^p_{H^s}] where t is
/// the time of snapshot `time_index`. With `supremum` false the sup is
/// dropped and the moment at time t itself is estimated.
MomentEstimate psi_moment_estimate(std::span<const PsiPath> ensemble, std::size_t time_index,
                                   double s, double p, bool supremum = true);

/// Sample mean with standard error.
MomentEstimate mean_with_error(std::span<const double> samples);

}  // namespace snls
