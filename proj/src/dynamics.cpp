#include "snls/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "snls/error.hpp"

namespace snls {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

bool is_integral_ratio(double num, double den, std::size_t& count) {
  const double ratio = num / den;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded) return false;
  count = static_cast<std::size_t>(rounded);
  return true;
}

// v -> v' with 1 + v' = (1 + v) exp(-i theta), avoiding cancellation at v = 0.
Complex rotate_shifted(Complex v, double theta) noexcept {
  const double s = std::sin(theta);
  const double half = std::sin(0.5 * theta);
  const Complex rot_minus_one{-2.0 * half * half, -s};
  return v * std::polar(1.0, -theta) + rot_minus_one;
}

ComplexField phase_substep_shifted(const ComplexField& v, double dt, Frame frame) {
  ComplexField out(v.grid_ptr());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Complex z = v[i];
    // |1 + v|^2 - 1 = 2 Re v + |v|^2
    const double excess = 2.0 * z.real() + std::norm(z);
    const double density = frame == Frame::gross_pitaevskii ? excess : excess + 1.0;
    out[i] = rotate_shifted(z, density * dt);
  }
  return out;
}

void ensure_finite(const ComplexField& f, std::size_t step, const char* what) {
  if (!f.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite " << what << " after step " << step;
    throw BlowUpError(msg.str(), static_cast<long>(step));
  }
}

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::direct: return "direct";
    case Scheme::dpd: return "dpd";
    case Scheme::deterministic_gp: return "deterministic_gp";
    case Scheme::deterministic_cubic: return "deterministic_cubic";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (auto s : {Scheme::direct, Scheme::dpd, Scheme::deterministic_gp,
                 Scheme::deterministic_cubic}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

bool is_stochastic(Scheme scheme) noexcept {
  return scheme == Scheme::direct || scheme == Scheme::dpd;
}

std::size_t SolverConfig::steps() const {
  std::size_t n = 0;
  if (!(dt > 0.0) || !(t_final > 0.0) || !is_integral_ratio(t_final, dt, n)) {
    throw ConfigError("t_final / dt must be a positive integer");
  }
  return n;
}

void SolverConfig::validate() const {
  if (!grid) throw ConfigError("solver config has no grid");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be positive");
  if (dt > t_final) throw ConfigError("dt must not exceed t_final");
  const auto n = steps();
  if (snapshot_stride == 0 || n % snapshot_stride != 0) {
    throw ConfigError("snapshot_stride must divide the step count " + std::to_string(n));
  }
  if (!initial_v.grid_ptr() || !(initial_v.grid() == *grid)) {
    throw ConfigError("initial_v does not live on the solver grid");
  }
  if (!initial_v.all_finite()) throw ConfigError("initial_v has non-finite entries");
  if (noise.grid() && !(*noise.grid() == *grid)) {
    throw ConfigError("noise spec lives on a different grid");
  }
}

ComplexField Trajectory::v_star(std::size_t index) const {
  auto out = v.at(index);
  if (config.scheme == Scheme::dpd) out += psi.at(index);
  return out;
}

ComplexField Trajectory::u(std::size_t index) const {
  auto out = v_star(index);
  for (auto& z : out.values()) z += 1.0;
  return out;
}

double Trajectory::snapshot_dt() const noexcept {
  return config.dt * static_cast<double>(config.snapshot_stride);
}

// ---------------------------------------------------------------------------

ComplexField gp_nonlinearity(const ComplexField& u) {
  ComplexField out(u.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = (std::norm(u[i]) - 1.0) * u[i];
  return out;
}

Complex dpd_nonlinearity(Complex v, Complex psi) noexcept {
  const double re_v = v.real();
  const double re_psi = psi.real();
  const double re_vbar_psi = (std::conj(v) * psi).real();
  const double abs_v2 = std::norm(v);
  const double abs_psi2 = std::norm(psi);

  // |v|^2 v, then the perturbation g(v, Psi) grouped by its v- and Psi-factor.
  Complex sum = abs_v2 * v;
  sum += 2.0 * re_v * v;
  sum += 2.0 * re_psi * v;
  sum += 2.0 * re_vbar_psi * v;
  sum += abs_psi2 * v;
  sum += abs_v2;
  sum += 2.0 * re_v;
  sum += 2.0 * re_psi;
  sum += 2.0 * re_vbar_psi;
  sum += abs_psi2;
  sum += psi * abs_v2;
  sum += 2.0 * re_v * psi;
  sum += 2.0 * re_psi * psi;
  sum += 2.0 * re_vbar_psi * psi;
  sum += abs_psi2 * psi;
  return sum;
}

ComplexField dpd_nonlinearity(const ComplexField& v, const ComplexField& psi) {
  require_same_grid(v, psi, "dpd_nonlinearity");
  ComplexField out(v.grid_ptr());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = dpd_nonlinearity(v[i], psi[i]);
  return out;
}

ComplexField nonlinear_phase_substep(const ComplexField& u, double dt) {
  ComplexField out(u.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = u[i] * std::polar(1.0, -(std::norm(u[i]) - 1.0) * dt);
  }
  return out;
}

ComplexField strang_step_deterministic(const ComplexField& v, double dt, Frame frame,
                                       bool nonlinearity) {
  if (!nonlinearity) return apply_schrodinger_group(v, dt);
  auto half = apply_schrodinger_group(v, 0.5 * dt);
  half = phase_substep_shifted(half, dt, frame);
  return apply_schrodinger_group(half, 0.5 * dt);
}

ComplexField strang_step_direct(const ComplexField& v, const ComplexField& increment, double dt) {
  require_same_grid(v, increment, "strang_step_direct");
  auto out = strang_step_deterministic(v, dt);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += kMinusI * increment[i];
  return out;
}

ComplexField strang_step_direct(const ComplexField& v, const NoiseSpec& noise, double dt,
                                RngState& rng, NoisePath* record) {
  if (!(dt > 0.0)) throw UsageError("strang_step_direct: dt must be positive");
  auto inc = noise.grid() ? sample_wiener_increment(noise, dt, rng) : ComplexField(v.grid_ptr());
  auto out = strang_step_direct(v, inc, dt);
  if (record) record->increments.push_back(std::move(inc));
  return out;
}

ComplexField strang_step_dpd(const ComplexField& v, const ComplexField& psi, double dt) {
  require_same_grid(v, psi, "strang_step_dpd");
  auto w = apply_schrodinger_group(v, 0.5 * dt);
  // Psi carried through the first half linear step with v.
  const auto psi_mid = apply_schrodinger_group(psi, 0.5 * dt);

  // RK4 for w' = -i N(w, psi), pointwise.
  const double h = dt;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Complex y = w[i];
    const Complex p = psi_mid[i];
    const Complex k1 = kMinusI * dpd_nonlinearity(y, p);
    const Complex k2 = kMinusI * dpd_nonlinearity(y + 0.5 * h * k1, p);
    const Complex k3 = kMinusI * dpd_nonlinearity(y + 0.5 * h * k2, p);
    const Complex k4 = kMinusI * dpd_nonlinearity(y + h * k3, p);
    w[i] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return apply_schrodinger_group(w, 0.5 * dt);
}

// ---------------------------------------------------------------------------

Trajectory solve(const SolverConfig& config, const SolveOptions& options) {
  config.validate();
  const auto steps = config.steps();
  const auto& grid = config.grid;
  const bool stochastic = is_stochastic(config.scheme);

  Trajectory traj;
  traj.config = config;
  traj.frame = config.scheme == Scheme::deterministic_cubic ? Frame::cubic : Frame::gross_pitaevskii;

  NoisePath path;
  if (stochastic) {
    if (options.noise_path) {
      if (options.noise_path->steps() != steps ||
          std::abs(options.noise_path->dt - config.dt) > 1e-12 * config.dt) {
        throw UsageError("supplied noise path does not match the solver step count or dt");
      }
      path = *options.noise_path;
    } else {
      const NoiseSpec noise = config.noise.grid() ? config.noise : NoiseSpec::zero(grid);
      path = generate_noise_path(noise, config.dt, steps, options.seed, options.stream_id);
    }
  }
  const bool add_noise = stochastic && !(config.noise.grid() == nullptr || config.noise.is_trivial());

  ComplexField v = config.initial_v;
  ComplexField psi(grid);
  traj.times.push_back(0.0);
  traj.v.push_back(v);
  traj.psi.push_back(psi);

  for (std::size_t n = 0; n < steps; ++n) {
    switch (config.scheme) {
      case Scheme::dpd:
        v = config.nonlinearity ? strang_step_dpd(v, psi, config.dt)
                                : apply_schrodinger_group(v, config.dt);
        psi = step_stochastic_convolution(psi, path.increments[n], config.dt);
        ensure_finite(psi, n + 1, "Psi");
        break;
      case Scheme::direct:
        v = strang_step_deterministic(v, config.dt, Frame::gross_pitaevskii, config.nonlinearity);
        if (add_noise) {
          const auto& inc = path.increments[n];
          for (std::size_t i = 0; i < v.size(); ++i) v[i] += kMinusI * inc[i];
        }
        break;
      case Scheme::deterministic_gp:
        v = strang_step_deterministic(v, config.dt, Frame::gross_pitaevskii, config.nonlinearity);
        break;
      case Scheme::deterministic_cubic:
        v = strang_step_deterministic(v, config.dt, Frame::cubic, config.nonlinearity);
        break;
    }
    ensure_finite(v, n + 1, "v");
    if ((n + 1) % config.snapshot_stride == 0) {
      traj.times.push_back(static_cast<double>(n + 1) * config.dt);
      traj.v.push_back(v);
      traj.psi.push_back(config.scheme == Scheme::dpd ? psi : ComplexField(grid));
    }
  }
  if (stochastic) traj.noise_path = std::move(path);
  return traj;
}

double duhamel_residual(const Trajectory& traj, std::size_t time_index) {
  if (time_index >= traj.size()) throw UsageError("duhamel_residual: time index out of range");
  const bool stochastic = is_stochastic(traj.config.scheme);
  if (stochastic && !traj.noise_path) {
    throw UsageError("duhamel_residual: stochastic trajectory without noise path");
  }
  const auto& grid = traj.config.grid;
  const auto k2 = grid->k_squared();
  const double t = traj.times[time_index];
  const std::size_t m = k2.size();

  auto propagate = [&](std::vector<Complex>& c, double tau) {
    for (std::size_t i = 0; i < m; ++i) c[i] *= std::polar(1.0, -k2[i] * tau);
  };
  auto nonlinearity = [&](std::size_t j) {
    auto u = traj.u(j);
    if (traj.frame == Frame::gross_pitaevskii) return gp_nonlinearity(u);
    ComplexField out(grid);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::norm(u[i]) * u[i];
    return out;
  };

  // u(t) - S(t) u0; constants are fixed by S(t), so the shift by 1 cancels.
  auto residual = to_spectral(traj.v_star(time_index));
  auto free = to_spectral(traj.v_star(0));
  propagate(free, t);
  for (std::size_t i = 0; i < m; ++i) residual[i] -= free[i];

  // + i * trapezoid sum of S(t - s) N(u(s)).
  std::vector<Complex> integral(m);
  for (std::size_t j = 0; j + 1 <= time_index; ++j) {
    const double h = traj.times[j + 1] - traj.times[j];
    for (std::size_t end : {j, j + 1}) {
      auto c = to_spectral(nonlinearity(end));
      propagate(c, t - traj.times[end]);
      for (std::size_t i = 0; i < m; ++i) integral[i] += 0.5 * h * c[i];
    }
  }
  for (std::size_t i = 0; i < m; ++i) residual[i] += Complex(0.0, 1.0) * integral[i];

  // + i * sum_m S(t - t_{m+1}) dW_m over the steps up to t.
  if (stochastic) {
    const auto& path = *traj.noise_path;
    const std::size_t steps = time_index * traj.config.snapshot_stride;
    std::vector<Complex> acc(m);
    for (std::size_t n = 0; n < steps; ++n) {
      propagate(acc, path.dt);
      const auto c = to_spectral(path.increments[n]);
      for (std::size_t i = 0; i < m; ++i) acc[i] += c[i];
    }
    for (std::size_t i = 0; i < m; ++i) residual[i] += Complex(0.0, 1.0) * acc[i];
  }

  double sum = 0.0;
  for (const auto& c : residual) sum += std::norm(c);
  return std::sqrt(sum);
}

Trajectory gauge_transform(const Trajectory& traj) {
  Trajectory out = traj;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const Complex phase = std::polar(1.0, -out.times[j]);
    const Complex shift = phase - 1.0;
    for (auto& z : out.v[j].values()) z = phase * z + shift;
    out.psi[j] *= phase;
  }
  out.frame = Frame::cubic;
  return out;
}

// ---------------------------------------------------------------------------

ComplexField initial_constant(const GridPtr& grid, Complex alpha) {
  return ComplexField::constant(grid, alpha - 1.0);
}

ComplexField initial_plane_wave(const GridPtr& grid, std::span<const int> modes) {
  auto v = ComplexField::plane_wave(grid, modes);
  for (auto& z : v.values()) z -= 1.0;
  return v;
}

ComplexField initial_gaussian_bump(const GridPtr& grid, double amplitude, double width) {
  if (!(width > 0.0)) throw ConfigError("gaussian bump width must be positive");
  ComplexField v(grid);
  const double centre = 0.5 * grid->box_length();
  for (std::size_t i = 0; i < v.size(); ++i) {
    double r2 = 0.0;
    for (int a = 0; a < grid->dim(); ++a) {
      const double d = grid->coordinate(i, a) - centre;
      r2 += d * d;
    }
    v[i] = amplitude * std::exp(-r2 / (2.0 * width * width));
  }
  return v;
}

ComplexField initial_random_band_limited(const GridPtr& grid, double h1_norm, double k_max,
                                         std::uint64_t seed) {
  if (!(h1_norm >= 0.0)) throw ConfigError("random initial data needs h1_norm >= 0");
  const auto k2 = grid->k_squared();
  std::vector<Complex> c(k2.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (k2[i] > 0.0 && k2[i] <= k_max * k_max) {
      c[i] = counter_gaussian(seed, 0x1a17ULL, 0, i);
    }
  }
  auto v = from_spectral(grid, c);
  const double norm = sobolev_norm(v, 1.0, true);
  if (norm > 0.0) v *= h1_norm / norm;
  return v;
}

}  // namespace snls
