#include "snls/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "snls/error.hpp"

namespace snls {

EnergyParts energy_parts(const ComplexField& v_star) {
  const auto& g = v_star.grid();
  EnergyParts parts;
  const auto c = to_spectral(v_star);
  const auto k2 = g.k_squared();
  double kin = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) kin += k2[i] * std::norm(c[i]);
  parts.kinetic = 0.5 * kin;

  double pot = 0.0;
  for (const auto& z : v_star.values()) {
    const double w = std::norm(z) + 2.0 * z.real();
    pot += w * w;
  }
  parts.potential = 0.25 * pot * g.cell_measure();
  return parts;
}

double energy(const ComplexField& v_star) { return energy_parts(v_star).total(); }

ComplexField martingale_integrand(const ComplexField& v_star) {
  auto out = laplacian(v_star);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Complex v = v_star[i];
    const Complex vbar = std::conj(v);
    const double a2 = std::norm(v);
    const double re = v.real();
    out[i] = a2 * vbar - std::conj(out[i]) + a2 + 2.0 * re * vbar + 2.0 * re;
  }
  return out;
}

namespace {

double weighted_integral(const ComplexField& v, std::span<const double> density, LedgerVariant variant) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Complex z = v[i];
    const double integrand = variant == LedgerVariant::literal
                                 ? std::norm(z) + z.imag() * z.imag() + 4.0 * z.real()
                                 : std::norm(z) + 2.0 * z.real();
    sum += integrand * density[i];
  }
  return sum * v.grid().cell_measure();
}

}  // namespace

EnergyLedger ito_ledger(const Trajectory& traj, LedgerVariant variant) {
  // Deterministic runs carry no path; their noise terms vanish.
  const bool noisy = is_stochastic(traj.config.scheme);
  if (noisy && !traj.noise_path) throw UsageError("ito_ledger: trajectory carries no noise path");
  const auto stride = traj.config.snapshot_stride;
  const std::size_t snaps = traj.size();
  if (noisy && traj.noise_path->steps() < (snaps - 1) * stride) {
    throw UsageError("ito_ledger: noise path shorter than the trajectory");
  }

  const auto& grid = traj.config.grid;
  const NoiseSpec noise = noisy && traj.config.noise.grid() ? traj.config.noise : NoiseSpec();
  const std::vector<double> density =
      noise.grid() ? noise.variance_density() : std::vector<double>(grid->size(), 0.0);
  const double hs1 = noise.grid() ? hs_norm(noise, 1.0) : 0.0;
  const double drift_rate = (variant == LedgerVariant::literal ? 1.0 : 0.5) * hs1 * hs1;

  EnergyLedger ledger;
  ledger.variant = variant;
  double ham2 = 0.0;
  double ham3 = 0.0;
  double prev_weight = 0.0;
  double e0 = 0.0;
  for (std::size_t j = 0; j < snaps; ++j) {
    const auto vs = traj.v_star(j);
    const double t = traj.times[j];
    const double e = energy(vs);
    const double weight = weighted_integral(vs, density, variant);
    if (j == 0) {
      e0 = e;
    } else {
      ham2 += 0.5 * (t - traj.times[j - 1]) * (prev_weight + weight);
    }
    const double ham1 = drift_rate * t;

    ledger.times.push_back(t);
    ledger.energy.push_back(e);
    ledger.ham1.push_back(ham1);
    ledger.ham2.push_back(ham2);
    ledger.ham3.push_back(ham3);
    ledger.residual.push_back(e - e0 - ham1 - ham2 - ham3);

    // Left-point pairing with the increments of the next snapshot interval.
    if (noisy && j + 1 < snaps) {
      const auto& path = *traj.noise_path;
      const auto f = martingale_integrand(vs);
      double im = 0.0;
      for (std::size_t n = j * stride; n < (j + 1) * stride; ++n) {
        const auto& inc = path.increments[n];
        for (std::size_t i = 0; i < f.size(); ++i) im += (f[i] * inc[i]).imag();
      }
      ham3 += im * grid->cell_measure();
    }
    prev_weight = weight;
  }
  return ledger;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw UsageError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

EnergyBoundReport energy_bound_report(std::span<const double> per_path_sup) {
  if (per_path_sup.empty()) throw UsageError("energy_bound_report: empty ensemble");
  EnergyBoundReport report;
  report.per_path.assign(per_path_sup.begin(), per_path_sup.end());
  report.sup_energy = mean_with_error(report.per_path);
  for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    report.quantiles.push_back(quantile(report.per_path, q));
  }
  return report;
}

EnergyBoundReport energy_bound_report(std::span<const Trajectory> ensemble) {
  if (ensemble.empty()) throw UsageError("energy_bound_report: empty ensemble");
  std::vector<double> sups;
  sups.reserve(ensemble.size());
  for (const auto& traj : ensemble) {
    double sup = 0.0;
    for (std::size_t j = 0; j < traj.size(); ++j) sup = std::max(sup, energy(traj.v_star(j)));
    sups.push_back(sup);
  }
  return energy_bound_report(sups);
}

// ---------------------------------------------------------------------------

std::vector<ComplexField> component_snapshots(const Trajectory& traj, Component component) {
  std::vector<ComplexField> out;
  out.reserve(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    switch (component) {
      case Component::total: out.push_back(traj.v_star(j)); break;
      case Component::v_part: out.push_back(traj.v[j]); break;
      case Component::psi_part: out.push_back(traj.psi[j]); break;
    }
  }
  return out;
}

double spacetime_norm(const Trajectory& traj, SpacetimeInterval interval, double q, double r,
                      int derivative_order, Component component) {
  const auto snaps = component_snapshots(traj, component);
  return spacetime_norm(traj.times, snaps, interval, q, r, derivative_order);
}

double x1_norm(const Trajectory& traj, SpacetimeInterval interval, Component component) {
  const auto snaps = component_snapshots(traj, component);
  return x1_norm(traj.times, snaps, interval);
}

IntervalPartition partition_intervals(const Trajectory& traj, double eta) {
  if (!(eta > 0.0)) throw UsageError("partition_intervals: eta must be positive");
  const std::size_t n = traj.size();
  if (n < 2) throw UsageError("partition_intervals: need at least two snapshots");

  constexpr double q = 6.0;
  constexpr double r = 12.0 / 5.0;
  std::vector<double> gv(n), gpsi(n);
  for (std::size_t j = 0; j < n; ++j) {
    gv[j] = spatial_norm(traj.v[j], r, 1);
    gpsi[j] = spatial_norm(traj.psi[j], r, 1);
  }
  auto combined = [&](SpacetimeInterval iv) {
    return time_lebesgue_norm(traj.times, gv, iv, q) + time_lebesgue_norm(traj.times, gpsi, iv, q);
  };

  IntervalPartition part;
  part.eta = eta;
  std::size_t start = 0;
  while (start + 1 < n) {
    SpacetimeInterval iv{start, start + 1};
    double norm = combined(iv);
    const bool irreducible = norm > eta;
    if (!irreducible) {
      while (iv.end_index + 1 < n) {
        const SpacetimeInterval next{start, iv.end_index + 1};
        const double next_norm = combined(next);
        if (next_norm > eta) break;
        iv = next;
        norm = next_norm;
      }
    }
    part.intervals.push_back(iv);
    part.norms.push_back(norm);
    part.irreducible.push_back(irreducible);
    start = iv.end_index;
  }
  return part;
}

StrichartzReport strichartz_report(const Trajectory& traj, SpacetimeInterval interval) {
  const auto snaps = component_snapshots(traj, Component::total);
  const auto& t = traj.times;
  StrichartzReport rep;
  rep.grad_l2_l4 = spacetime_norm(t, snaps, interval, 2.0, 4.0, 1);
  rep.grad_l6_l12_5 = spacetime_norm(t, snaps, interval, 6.0, 12.0 / 5.0, 1);
  rep.grad_linf_l2 = spacetime_norm(t, snaps, interval, kInfinity, 2.0, 1);
  rep.l6 = spacetime_norm(t, snaps, interval, 6.0, 6.0, 0);
  rep.x1 = x1_norm(t, snaps, interval);
  rep.s1_proxy = std::max({rep.grad_l2_l4, rep.grad_l6_l12_5, rep.grad_linf_l2});
  return rep;
}

DiagnosticsTable diagnostics_table(const Trajectory& traj, LedgerVariant variant) {
  DiagnosticsTable table;
  table.ledger = ito_ledger(traj, variant);
  const auto n = traj.size();
  std::vector<double> gx(n), g6(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto vs = traj.v_star(j);
    gx[j] = spatial_norm(vs, 12.0 / 5.0, 1);
    g6[j] = spatial_norm(vs, 6.0, 0);
  }
  double sx = 0.0, s6 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      const double h = traj.times[j] - traj.times[j - 1];
      sx += 0.5 * h * (std::pow(gx[j - 1], 6.0) + std::pow(gx[j], 6.0));
      s6 += 0.5 * h * (std::pow(g6[j - 1], 6.0) + std::pow(g6[j], 6.0));
    }
    table.x1_cum.push_back(std::pow(sx, 1.0 / 6.0));
    table.l6_cum.push_back(std::pow(s6, 1.0 / 6.0));
  }
  return table;
}

}  // namespace snls
