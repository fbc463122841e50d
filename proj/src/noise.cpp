#include "snls/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "snls/error.hpp"

namespace snls {

NoiseSpec NoiseSpec::zero(GridPtr grid) {
  NoiseSpec spec(NoiseKind::zero, std::move(grid));
  spec.symbol_.assign(spec.grid_->size(), 0.0);
  return spec;
}

NoiseSpec NoiseSpec::multiplier(GridPtr grid, double amplitude, double sigma,
                                std::optional<double> cutoff) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw ConfigError("noise amplitude must be finite and >= 0");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise sigma must be >= 0");
  if (cutoff && !(*cutoff >= 0.0)) throw ConfigError("noise cutoff must be >= 0");

  NoiseSpec spec(NoiseKind::multiplier, std::move(grid));
  spec.amplitude_ = amplitude;
  spec.sigma_ = sigma;
  spec.cutoff_ = cutoff;
  const auto k2 = spec.grid_->k_squared();
  spec.symbol_.resize(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) {
    const bool kept = !cutoff || k2[i] <= (*cutoff) * (*cutoff);
    spec.symbol_[i] = kept ? amplitude * std::pow(1.0 + k2[i], -0.5 * sigma) : 0.0;
  }
  return spec;
}

NoiseSpec NoiseSpec::rank_list(GridPtr grid, std::vector<ComplexField> columns) {
  NoiseSpec spec(NoiseKind::rank_list, std::move(grid));
  for (const auto& c : columns) {
    if (!c.grid_ptr() || !(c.grid() == *spec.grid_)) {
      throw UsageError("rank_list column lives on a different grid");
    }
  }
  spec.symbol_.assign(spec.grid_->size(), 0.0);
  spec.columns_ = std::move(columns);
  return spec;
}

bool NoiseSpec::is_trivial() const noexcept {
  switch (kind_) {
    case NoiseKind::zero:
      return true;
    case NoiseKind::multiplier:
      return std::all_of(symbol_.begin(), symbol_.end(), [](double x) { return x == 0.0; });
    case NoiseKind::rank_list:
      return std::all_of(columns_.begin(), columns_.end(), [](const ComplexField& c) {
        return std::all_of(c.values().begin(), c.values().end(),
                           [](const Complex& z) { return z == Complex{}; });
      });
  }
  return true;
}

NoiseSpec NoiseSpec::scaled(double c) const {
  if (!(c >= 0.0)) throw ConfigError("noise scale factor must be >= 0");
  NoiseSpec out = *this;
  out.amplitude_ *= c;
  for (auto& x : out.symbol_) x *= c;
  for (auto& col : out.columns_) col *= c;
  return out;
}

std::vector<double> NoiseSpec::variance_density() const {
  std::vector<double> density(grid_->size(), 0.0);
  if (kind_ == NoiseKind::multiplier) {
    double sum = 0.0;
    for (double x : symbol_) sum += x * x;
    std::fill(density.begin(), density.end(), sum / grid_->volume());
  } else if (kind_ == NoiseKind::rank_list) {
    for (const auto& col : columns_) {
      for (std::size_t i = 0; i < density.size(); ++i) density[i] += std::norm(col[i]);
    }
  }
  return density;
}

double hs_norm(const NoiseSpec& spec, double s) {
  double sum = 0.0;
  switch (spec.kind()) {
    case NoiseKind::zero:
      return 0.0;
    case NoiseKind::multiplier: {
      const auto k2 = spec.grid()->k_squared();
      const auto sym = spec.symbol();
      for (std::size_t i = 0; i < sym.size(); ++i) {
        if (sym[i] != 0.0) sum += std::pow(1.0 + k2[i], s) * sym[i] * sym[i];
      }
      break;
    }
    case NoiseKind::rank_list:
      for (const auto& col : spec.columns()) {
        const double n = sobolev_norm(col, s);
        sum += n * n;
      }
      break;
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                                     std::uint64_t index, std::uint64_t lane) noexcept {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc908ULL);
  h = mix64(h ^ stream);
  h = mix64(h ^ step);
  h = mix64(h ^ index);
  return mix64(h ^ lane);
}

// Uniform in (0, 1], 53 bits.
double to_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

Complex counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                         std::uint64_t index) noexcept {
  const double u1 = to_unit(counter_hash(seed, stream, step, index, 0));
  const double u2 = to_unit(counter_hash(seed, stream, step, index, 1));
  // Box-Muller with radius scaled so each component has variance 1/2.
  const double radius = std::sqrt(-std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

ComplexField sample_wiener_increment(const NoiseSpec& spec, double dt, RngState& rng) {
  if (!(dt > 0.0)) throw UsageError("sample_wiener_increment: dt must be positive");
  const auto step = rng.step++;
  const auto& grid = spec.grid();
  const double root_dt = std::sqrt(dt);

  switch (spec.kind()) {
    case NoiseKind::zero:
      return ComplexField(grid);
    case NoiseKind::multiplier: {
      const auto sym = spec.symbol();
      std::vector<Complex> coeff(sym.size());
      for (std::size_t i = 0; i < sym.size(); ++i) {
        if (sym[i] != 0.0) {
          coeff[i] = (sym[i] * root_dt) * counter_gaussian(rng.seed, rng.stream, step, i);
        }
      }
      return from_spectral(grid, coeff);
    }
    case NoiseKind::rank_list: {
      ComplexField out(grid);
      const auto cols = spec.columns();
      for (std::size_t n = 0; n < cols.size(); ++n) {
        const Complex beta = root_dt * counter_gaussian(rng.seed, rng.stream, step, n);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += cols[n][i] * beta;
      }
      return out;
    }
  }
  return ComplexField(grid);
}

NoisePath generate_noise_path(const NoiseSpec& spec, double dt, std::size_t steps,
                              std::uint64_t seed, std::uint64_t stream_id) {
  NoisePath path;
  path.dt = dt;
  path.rng_seed = seed;
  path.stream_id = stream_id;
  path.increments.reserve(steps);
  RngState rng{seed, stream_id, 0};
  for (std::size_t n = 0; n < steps; ++n) {
    path.increments.push_back(sample_wiener_increment(spec, dt, rng));
  }
  return path;
}

NoisePath coarsen(const NoisePath& fine, std::size_t factor) {
  if (factor == 0 || fine.steps() % factor != 0) {
    throw UsageError("coarsen: factor " + std::to_string(factor) + " does not divide " +
                     std::to_string(fine.steps()) + " steps");
  }
  NoisePath coarse;
  coarse.dt = fine.dt * static_cast<double>(factor);
  coarse.rng_seed = fine.rng_seed;
  coarse.stream_id = fine.stream_id;
  for (std::size_t n = 0; n < fine.steps(); n += factor) {
    ComplexField sum = fine.increments[n];
    for (std::size_t j = 1; j < factor; ++j) sum += fine.increments[n + j];
    coarse.increments.push_back(std::move(sum));
  }
  return coarse;
}

ComplexField step_stochastic_convolution(const ComplexField& psi, const ComplexField& increment,
                                         double dt) {
  require_same_grid(psi, increment, "step_stochastic_convolution");
  auto out = apply_schrodinger_group(psi, dt);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += Complex(0.0, -1.0) * increment[i];
  return out;
}

ComplexField step_stochastic_convolution(const ComplexField& psi, const NoiseSpec& spec, double dt,
                                         RngState& rng, NoisePath* record) {
  if (!psi.grid_ptr() || !(psi.grid() == *spec.grid())) {
    throw UsageError("step_stochastic_convolution: grid mismatch");
  }
  auto inc = sample_wiener_increment(spec, dt, rng);
  auto out = step_stochastic_convolution(psi, inc, dt);
  if (record) record->increments.push_back(std::move(inc));
  return out;
}

PsiPath sample_psi_path(const NoiseSpec& spec, double dt, std::size_t steps, std::uint64_t seed,
                        std::uint64_t stream_id, std::size_t snapshot_stride) {
  if (snapshot_stride == 0) throw UsageError("snapshot_stride must be positive");
  PsiPath path;
  ComplexField psi(spec.grid());
  path.times.push_back(0.0);
  path.psi.push_back(psi);
  RngState rng{seed, stream_id, 0};
  for (std::size_t n = 1; n <= steps; ++n) {
    psi = step_stochastic_convolution(psi, spec, dt, rng);
    if (n % snapshot_stride == 0) {
      path.times.push_back(static_cast<double>(n) * dt);
      path.psi.push_back(psi);
    }
  }
  return path;
}

MomentEstimate mean_with_error(std::span<const double> samples) {
  MomentEstimate est;
  est.samples = samples.size();
  if (samples.empty()) return est;
  double sum = 0.0;
  for (double x : samples) sum += x;
  est.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - est.mean) * (x - est.mean);
    const double var = ss / static_cast<double>(samples.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(samples.size()));
  }
  return est;
}

MomentEstimate psi_moment_estimate(std::span<const PsiPath> ensemble, std::size_t time_index,
                                   double s, double p, bool supremum) {
  if (ensemble.empty()) throw UsageError("psi_moment_estimate: empty ensemble");
  if (!(p >= 2.0)) throw UsageError("psi_moment_estimate: p must be >= 2");
  std::vector<double> samples;
  samples.reserve(ensemble.size());
  for (const auto& path : ensemble) {
    if (time_index >= path.psi.size()) {
      throw UsageError("psi_moment_estimate: time index beyond path length");
    }
    double value = 0.0;
    const std::size_t first = supremum ? 0 : time_index;
    for (std::size_t i = first; i <= time_index; ++i) {
      value = std::max(value, std::pow(sobolev_norm(path.psi[i], s), p));
    }
    samples.push_back(value);
  }
  return mean_with_error(samples);
}

}  // namespace snls
