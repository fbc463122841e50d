#pragma once

#include <span>
#include <string>
#include <vector>

#include "snls/dynamics.hpp"
#include "snls/lattice.hpp"
#include "snls/noise.hpp"

namespace snls {

/// Ginzburg-Landau energy in terms of v* = u - 1:
/// 1/2 int |grad v*|^2 + 1/4 int (|v*|^2 + 2 Re v*)^2.
double energy(const ComplexField& v_star);

/// Gradient and potential parts of `energy` separately.
struct EnergyParts {
  double kinetic = 0.0;
  double potential = 0.0;
  double total() const noexcept { return kinetic + potential; }
};
EnergyParts energy_parts(const ComplexField& v_star);

/// Which drift terms the ledger uses.
///
/// `literal` takes the deterministic drift t * ||phi||^2_{HS(L2;H1)} and the
/// quadratic-variation integrand (|v*|^2 + (Im v*)^2 + 4 Re v*) |phi_n|^2.
/// `balanced` takes the terms Ito's formula yields for increments with
/// E|phi dW|^2 = dt ||phi||^2: half the drift and the integrand
/// (|v*|^2 + 2 Re v*) |phi_n|^2. The martingale term is shared.
enum class LedgerVariant { literal, balanced };

struct EnergyLedger {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> ham1;
  std::vector<double> ham2;
  std::vector<double> ham3;
  std::vector<double> residual;
  LedgerVariant variant = LedgerVariant::literal;

  std::size_t size() const noexcept { return times.size(); }
};

/// Energy, the three Ito terms and their residual at every snapshot. The
/// martingale term pairs the integrand at the left snapshot with the
/// increments recorded over the following snapshot interval. Stochastic
/// trajectories must carry their noise path; deterministic ones get zero
/// noise terms.
EnergyLedger ito_ledger(const Trajectory& trajectory, LedgerVariant variant = LedgerVariant::literal);

/// Integrand of the martingale term, conj(grad E(u)):
/// |v|^2 conj(v) - Lap conj(v) + |v|^2 + 2 Re(v) conj(v) + 2 Re(v).
ComplexField martingale_integrand(const ComplexField& v_star);

struct EnergyBoundReport {
  MomentEstimate sup_energy;
  /// Per-path sup_t E(u)(t).
  std::vector<double> per_path;
  /// 5/25/50/75/95 % quantiles of `per_path`.
  std::vector<double> quantiles;
};

EnergyBoundReport energy_bound_report(std::span<const Trajectory> ensemble);
EnergyBoundReport energy_bound_report(std::span<const double> per_path_sup);

/// Linearly interpolated sample quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

// Space-time norms on trajectories ---------------------------------------------

/// Part of u - 1 a norm is taken of.
enum class Component { total, v_part, psi_part };

std::vector<ComplexField> component_snapshots(const Trajectory& trajectory, Component component);

double spacetime_norm(const Trajectory& trajectory, SpacetimeInterval interval, double q, double r,
                      int derivative_order, Component component = Component::total);
double x1_norm(const Trajectory& trajectory, SpacetimeInterval interval,
               Component component = Component::total);

struct IntervalPartition {
  double eta = 0.0;
  std::vector<SpacetimeInterval> intervals;
  /// x1_norm(v part) + x1_norm(Psi part) per interval.
  std::vector<double> norms;
  /// Single-step intervals whose norm still exceeds eta.
  std::vector<bool> irreducible;

  std::size_t count() const noexcept { return intervals.size(); }
};

/// Greedy left-to-right split into maximal intervals with
/// ||v||_X1 + ||Psi||_X1 <= eta. Consecutive intervals share an endpoint.
IntervalPartition partition_intervals(const Trajectory& trajectory, double eta);

struct StrichartzReport {
  double grad_l2_l4 = 0.0;
  double grad_l6_l12_5 = 0.0;
  double grad_linf_l2 = 0.0;
  /// ||u - 1||_{L^6_{t,x}}.
  double l6 = 0.0;
  double x1 = 0.0;
  /// Max of the three gradient entries.
  double s1_proxy = 0.0;
};

StrichartzReport strichartz_report(const Trajectory& trajectory, SpacetimeInterval interval);

/// Per-snapshot table backing the diagnostics CSV.
struct DiagnosticsTable {
  EnergyLedger ledger;
  /// ||u - 1||_{X1([0, t])} and ||u - 1||_{L^6([0, t])} per snapshot.
  std::vector<double> x1_cum;
  std::vector<double> l6_cum;
};

DiagnosticsTable diagnostics_table(const Trajectory& trajectory,
                                   LedgerVariant variant = LedgerVariant::literal);

}  // namespace snls
