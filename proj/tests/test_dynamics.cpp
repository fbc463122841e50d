#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "snls/dynamics.hpp"
#include "snls/error.hpp"

using namespace snls;
using std::numbers::pi;

namespace {

SolverConfig base_config(const GridPtr& g, Scheme scheme, double t_final, double dt, ComplexField v0) {
  SolverConfig c;
  c.grid = g;
  c.scheme = scheme;
  c.t_final = t_final;
  c.dt = dt;
  c.initial_v = std::move(v0);
  c.noise = NoiseSpec::zero(g);
  return c;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("pointwise nonlinearities") {
  auto g = make_grid(1, 8, 1.0);
  const auto n = gp_nonlinearity(ComplexField(g, {{2, 0}, {0, 1}, {0, 0}, {3, 4}, {}, {}, {}, {}}));
  CHECK(n[0] == Complex(6, 0));
  CHECK(n[1] == Complex(0, 0));
  CHECK(n[2] == Complex(0, 0));
  CHECK(std::abs(n[3] - 24.0 * Complex(3, 4)) < 1e-12);

  CHECK(dpd_nonlinearity(Complex{}, Complex{}) == Complex{});

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> r(-1.4, 1.4);
  for (int i = 0; i < 200; ++i) {
    const Complex v{r(gen), r(gen)}, psi{r(gen), r(gen)};
    const Complex u = 1.0 + v + psi;
    const Complex expected = (std::norm(u) - 1.0) * u;
    CHECK(std::abs(dpd_nonlinearity(v, psi) - expected) < 1e-12);
  }
  // Psi = 0 reduces to the GP nonlinearity in the v variable.
  const Complex v{0.3, -0.7};
  CHECK(std::abs(dpd_nonlinearity(v, {}) - (std::norm(1.0 + v) - 1.0) * (1.0 + v)) < 1e-15);
}

TEST_CASE("exact phase substep") {
  auto g = make_grid(2, 8, 1.0);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n;
  ComplexField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = {n(gen), n(gen)};
  const double dt = 0.37;
  const auto out = nonlinear_phase_substep(u, dt);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(std::abs(out[i]) == doctest::Approx(std::abs(u[i])).epsilon(1e-14));
    const Complex expected = u[i] * std::polar(1.0, -(std::norm(u[i]) - 1.0) * dt);
    CHECK(std::abs(out[i] - expected) < 1e-13);
  }
}

TEST_CASE("config validation") {
  auto g = make_grid(2, 8, 2 * pi);
  auto c = base_config(g, Scheme::deterministic_gp, 1.0, 0.1, ComplexField(g));
  CHECK(c.steps() == 10);
  CHECK_NOTHROW(c.validate());

  auto bad = c;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.dt = 0.3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.snapshot_stride = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.initial_v = ComplexField(make_grid(2, 16, 2 * pi));
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.initial_v[3] = {std::nan(""), 0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  CHECK(parse_scheme("dpd") == Scheme::dpd);
  CHECK(to_string(Scheme::deterministic_cubic) == "deterministic_cubic");
  CHECK_THROWS_AS(parse_scheme("euler"), ConfigError);
  CHECK(is_stochastic(Scheme::direct));
  CHECK_FALSE(is_stochastic(Scheme::deterministic_gp));
}

TEST_CASE("unit-modulus constants are stationary") {
  auto g = make_grid(2, 16, 2 * pi);
  for (Scheme s : {Scheme::deterministic_gp, Scheme::direct, Scheme::dpd}) {
    const auto v0 = initial_constant(g, std::polar(1.0, 0.8));
    const auto traj = solve(base_config(g, s, 0.2, 0.01, v0));
    CHECK(traj.size() == 21);
    CHECK(max_abs_diff(traj.v.back(), v0) < 1e-13);
  }
  const auto zero = solve(base_config(g, Scheme::deterministic_gp, 0.1, 0.01, ComplexField(g)));
  for (const auto& v : zero.v) CHECK(lebesgue_norm(v, kInfinity) == 0.0);
}

TEST_CASE("plane waves are exact solutions") {
  auto g = make_grid(2, 16, 2 * pi);
  const int modes[] = {2, -1};
  const double k2 = 5.0, t = 0.3;

  SUBCASE("Gross-Pitaevskii: |u| = 1 switches the nonlinearity off") {
    const auto traj = solve(base_config(g, Scheme::deterministic_gp, t, 0.01, initial_plane_wave(g, modes)));
    const auto exact = std::polar(1.0, -k2 * t) * ComplexField::plane_wave(g, modes);
    CHECK(max_abs_diff(traj.u(traj.size() - 1), exact) < 1e-11);
  }
  SUBCASE("cubic: extra phase |a|^2 t") {
    const Complex a{0.6, 0.2};
    auto v0 = a * ComplexField::plane_wave(g, modes);
    v0 -= ComplexField::constant(g, 1.0);
    const auto traj = solve(base_config(g, Scheme::deterministic_cubic, t, 0.01, v0));
    const auto exact = std::polar(1.0, -(k2 + std::norm(a)) * t) * (a * ComplexField::plane_wave(g, modes));
    CHECK(traj.frame == Frame::cubic);
    CHECK(max_abs_diff(traj.u(traj.size() - 1), exact) < 1e-11);
  }
}

TEST_CASE("linear flow is integrated exactly") {
  auto g = make_grid(2, 16, 2 * pi);
  const auto v0 = initial_gaussian_bump(g, 0.5, 0.8);
  auto c = base_config(g, Scheme::deterministic_gp, 0.5, 0.05, v0);
  c.nonlinearity = false;
  const auto traj = solve(c);
  // u = 1 + v and S(t)1 = 1, so v follows S(t) itself.
  CHECK(max_abs_diff(traj.v.back(), apply_schrodinger_group(v0, 0.5)) < 1e-13);
}

TEST_CASE("direct scheme without noise reproduces the deterministic run bit for bit") {
  auto g = make_grid(2, 16, 2 * pi);
  const auto v0 = initial_gaussian_bump(g, 0.5, 0.8);
  const auto det = solve(base_config(g, Scheme::deterministic_gp, 0.1, 0.01, v0));
  const auto dir = solve(base_config(g, Scheme::direct, 0.1, 0.01, v0));
  for (std::size_t i = 0; i < v0.size(); ++i) CHECK(det.v.back()[i] == dir.v.back()[i]);
}

TEST_CASE("dpd without noise matches the direct step to O(dt^3) per step") {
  auto g = make_grid(2, 16, 2 * pi);
  const auto v0 = initial_gaussian_bump(g, 0.5, 0.8);
  const ComplexField psi(g), inc(g);
  std::vector<double> err;
  for (double dt : {0.02, 0.01}) {
    err.push_back(max_abs_diff(strang_step_dpd(v0, psi, dt), strang_step_direct(v0, inc, dt)));
  }
  CHECK(err[0] > 0.0);
  CHECK(err[0] / err[1] > 6.0);
}

TEST_CASE("direct and dpd agree on a shared noise path") {
  auto g = make_grid(2, 16, 2 * pi);
  const auto v0 = initial_gaussian_bump(g, 0.5, 0.8);
  const auto phi = NoiseSpec::multiplier(g, 0.2, 2.0);
  std::vector<double> dist;
  const auto fine = generate_noise_path(phi, 0.005, 20, 4, 0);
  for (std::size_t factor : {4, 2, 1}) {
    const auto path = factor == 1 ? fine : coarsen(fine, factor);
    auto c = base_config(g, Scheme::direct, 0.1, 0.005 * static_cast<double>(factor), v0);
    c.noise = phi;
    const auto a = solve(c, {4, 0, &path});
    c.scheme = Scheme::dpd;
    const auto b = solve(c, {4, 0, &path});
    CHECK(b.noise_path.has_value());
    dist.push_back(lebesgue_norm(a.u(a.size() - 1) - b.u(b.size() - 1), 2.0));
  }
  CHECK(dist[1] < dist[0]);
  CHECK(dist[2] < dist[1]);
}

TEST_CASE("supplied noise paths must match the run") {
  auto g = make_grid(2, 8, 2 * pi);
  auto c = base_config(g, Scheme::direct, 0.1, 0.01, ComplexField(g));
  c.noise = NoiseSpec::multiplier(g, 0.1, 2.0);
  const auto short_path = generate_noise_path(c.noise, 0.01, 5, 0, 0);
  CHECK_THROWS_AS(solve(c, {0, 0, &short_path}), UsageError);
  const auto wrong_dt = generate_noise_path(c.noise, 0.02, 10, 0, 0);
  CHECK_THROWS_AS(solve(c, {0, 0, &wrong_dt}), UsageError);
}

TEST_CASE("solve is deterministic and snapshots follow the stride") {
  auto g = make_grid(2, 8, 2 * pi);
  auto c = base_config(g, Scheme::dpd, 0.1, 0.01, initial_gaussian_bump(g, 0.3, 1.0));
  c.noise = NoiseSpec::multiplier(g, 0.1, 2.0);
  c.snapshot_stride = 5;
  const auto a = solve(c, {11, 3, nullptr});
  const auto b = solve(c, {11, 3, nullptr});
  REQUIRE(a.size() == 3);
  CHECK(a.times[1] == doctest::Approx(0.05));
  CHECK(a.snapshot_dt() == doctest::Approx(0.05));
  CHECK(lebesgue_norm(a.psi.back(), 2.0) > 0.0);
  for (std::size_t i = 0; i < g->size(); ++i) {
    CHECK(a.v.back()[i] == b.v.back()[i]);
    CHECK(a.psi.back()[i] == b.psi.back()[i]);
  }
  // The stored Psi is the exact stochastic convolution of the recorded path.
  ComplexField psi(g);
  for (const auto& inc : a.noise_path->increments) psi = step_stochastic_convolution(psi, inc, 0.01);
  CHECK(max_abs_diff(psi, a.psi.back()) < 1e-15);
}

TEST_CASE("blow-up is reported with the failing step") {
  auto g = make_grid(2, 8, 2 * pi);
  auto c = base_config(g, Scheme::dpd, 0.05, 0.01, ComplexField(g));
  c.noise = NoiseSpec::multiplier(g, 1e200, 0.0);
  try {
    solve(c);
    FAIL("expected a blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.step() >= 1);
  }
}

TEST_CASE("Duhamel residual") {
  auto g = make_grid(2, 16, 2 * pi);
  SUBCASE("u = 1") {
    const auto traj = solve(base_config(g, Scheme::deterministic_gp, 0.1, 0.01, ComplexField(g)));
    CHECK(duhamel_residual(traj, traj.size() - 1) < 1e-10);
  }
  SUBCASE("plane wave") {
    const int modes[] = {1, 1};
    const auto traj = solve(base_config(g, Scheme::deterministic_gp, 0.1, 0.01, initial_plane_wave(g, modes)));
    CHECK(duhamel_residual(traj, traj.size() - 1) < 1e-8);
  }
  SUBCASE("generic data: residual shrinks at least by half with dt") {
    const auto v0 = initial_gaussian_bump(g, 0.5, 0.8);
    std::vector<double> r;
    for (double dt : {0.02, 0.01, 0.005}) {
      const auto traj = solve(base_config(g, Scheme::deterministic_gp, 0.2, dt, v0));
      r.push_back(duhamel_residual(traj, traj.size() - 1));
    }
    CHECK(r[1] <= 0.5 * r[0]);
    CHECK(r[2] <= 0.5 * r[1]);
  }
  SUBCASE("stochastic run") {
    const auto v0 = initial_gaussian_bump(g, 0.5, 0.8);
    std::vector<double> r;
    const auto phi = NoiseSpec::multiplier(g, 0.2, 2.0);
    const auto fine = generate_noise_path(phi, 0.005, 40, 1, 0);
    for (std::size_t factor : {4, 2, 1}) {
      const auto path = factor == 1 ? fine : coarsen(fine, factor);
      auto c = base_config(g, Scheme::direct, 0.2, 0.005 * static_cast<double>(factor), v0);
      c.noise = phi;
      const auto traj = solve(c, {1, 0, &path});
      r.push_back(duhamel_residual(traj, traj.size() - 1));
    }
    CHECK(r[2] < r[0]);
  }
}

TEST_CASE("gauge transform") {
  auto g = make_grid(2, 16, 2 * pi);
  const auto v0 = initial_gaussian_bump(g, 0.5, 0.8);
  const auto traj = solve(base_config(g, Scheme::deterministic_gp, 0.2, 0.01, v0));
  const auto gauged = gauge_transform(traj);
  CHECK(gauged.frame == Frame::cubic);
  CHECK(max_abs_diff(gauged.u(0), traj.u(0)) == 0.0);
  const auto a = gauged.u(gauged.size() - 1), b = traj.u(traj.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i]) == doctest::Approx(std::abs(b[i])).epsilon(1e-14));
    CHECK(std::abs(a[i] - std::polar(1.0, -0.2) * b[i]) < 1e-14);
  }
}

TEST_CASE("initial data") {
  auto g = make_grid(2, 32, 2 * pi);
  const auto bump = initial_gaussian_bump(g, 0.5, 0.8);
  double peak = 0.0;
  for (std::size_t i = 0; i < bump.size(); ++i) {
    CHECK(bump[i].imag() == 0.0);
    peak = std::max(peak, bump[i].real());
  }
  CHECK(peak == doctest::Approx(0.5));  // the centre L/2 lies on the grid

  const auto rnd = initial_random_band_limited(g, 1.7, 3.0, 4);
  CHECK(sobolev_norm(rnd, 1.0, true) == doctest::Approx(1.7));
  const auto c = to_spectral(rnd);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (g->k_squared()[k] > 9.0 + 1e-12 || k == 0) CHECK(std::abs(c[k]) < 1e-12);
  }
  const auto again = initial_random_band_limited(g, 1.7, 3.0, 4);
  CHECK(max_abs_diff(rnd, again) == 0.0);

  const auto one = initial_constant(g, 1.0);
  CHECK(lebesgue_norm(one, kInfinity) == 0.0);
}
