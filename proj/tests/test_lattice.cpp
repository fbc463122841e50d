#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "snls/error.hpp"
#include "snls/lattice.hpp"

using namespace snls;
using std::numbers::pi;

namespace {

ComplexField random_field(const GridPtr& g, unsigned seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, scale);
  ComplexField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {n(gen), n(gen)};
  return f;
}

// Direct O(N^2) evaluation of c_k = h^d / sqrt(V) sum_x u(x) exp(-i k.x).
std::vector<Complex> naive_dft(const ComplexField& f) {
  const auto& g = f.grid();
  std::vector<Complex> c(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    Complex acc{};
    for (std::size_t x = 0; x < f.size(); ++x) {
      double phase = 0.0;
      for (int a = 0; a < g.dim(); ++a) phase += g.wavenumber(k, a) * g.coordinate(x, a);
      acc += f[x] * std::polar(1.0, -phase);
    }
    c[k] = acc * g.cell_measure() / std::sqrt(g.volume());
  }
  return c;
}

double l2_distance(const ComplexField& a, const ComplexField& b) { return lebesgue_norm(a - b, 2.0); }

}  // namespace

TEST_CASE("grid geometry") {
  auto g = make_grid(2, 8, 2 * pi);
  CHECK(g->size() == 64);
  CHECK(g->spacing() == doctest::Approx(pi / 4));
  CHECK(g->volume() == doctest::Approx(4 * pi * pi));
  CHECK(g->cell_measure() == doctest::Approx(pi * pi / 16));
  const std::vector<double> expected{0, 1, 2, 3, 4, -3, -2, -1};
  for (std::size_t j = 0; j < 8; ++j) CHECK(g->wavenumbers()[j] == doctest::Approx(expected[j]));

  // Flat index 8*5 + 3: modes (-3, 3) along the two axes.
  CHECK(g->mode_index(43, 0) == -3);
  CHECK(g->mode_index(43, 1) == 3);
  CHECK(g->k_squared()[43] == doctest::Approx(18.0));
  CHECK(g->coordinate(43, 0) == doctest::Approx(5 * pi / 4));

  auto h = make_grid(1, 8, 10.0);
  CHECK(h->wavenumbers()[2] == doctest::Approx(2 * pi * 2 / 10.0));
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(make_grid(0, 8, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(2, 0, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(2, 8, 0.0), ConfigError);
  CHECK_THROWS_AS(make_grid(2, 8, -1.0), ConfigError);
  auto a = make_grid(2, 8, 1.0);
  CHECK_THROWS_AS(make_grid(2, 12, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(2, 4, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(5, 8, 1.0), ConfigError);
  auto b = make_grid(2, 16, 1.0);
  CHECK_THROWS_AS(require_same_grid(ComplexField(a), ComplexField(b), "test"), UsageError);
  ComplexField fa(a);
  CHECK_THROWS_AS(fa += ComplexField(b), UsageError);
}

TEST_CASE("spectral transform agrees with a direct sum") {
  for (auto g : {make_grid(1, 16, 3.0), make_grid(2, 8, 2 * pi), make_grid(3, 8, 5.0)}) {
    const auto f = random_field(g, 7);
    const auto fast = to_spectral(f);
    const auto slow = naive_dft(f);
    double err = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) err = std::max(err, std::abs(fast[k] - slow[k]));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("plane wave has one coefficient of size sqrt(V)") {
  auto g = make_grid(2, 16, 2 * pi);
  const int modes[] = {2, -1};
  const auto c = to_spectral(ComplexField::plane_wave(g, modes));
  for (std::size_t k = 0; k < c.size(); ++k) {
    const bool hit = g->mode_index(k, 0) == 2 && g->mode_index(k, 1) == -1;
    CHECK(std::abs(c[k] - (hit ? Complex(std::sqrt(g->volume())) : Complex{})) < 1e-12);
  }
}

TEST_CASE("Plancherel and round trip") {
  auto g = make_grid(3, 8, 4.0);
  const auto f = random_field(g, 3);
  const auto c = to_spectral(f);
  double spec = 0.0;
  for (const auto& z : c) spec += std::norm(z);
  double phys = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) phys += std::norm(f[i]);
  phys *= g->cell_measure();
  CHECK(spec == doctest::Approx(phys).epsilon(1e-13));

  const auto back = from_spectral(g, c);
  CHECK(l2_distance(back, f) < 1e-12 * lebesgue_norm(f, 2.0));
}

TEST_CASE("Schrodinger group") {
  auto g = make_grid(2, 16, 2 * pi);
  const auto f = random_field(g, 11);

  SUBCASE("t = 0 is the identity") {
    const auto s = apply_schrodinger_group(f, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(s[i] == f[i]);
  }
  SUBCASE("group law and isometry") {
    const auto ab = apply_schrodinger_group(apply_schrodinger_group(f, 0.3), 0.45);
    const auto direct = apply_schrodinger_group(f, 0.75);
    CHECK(l2_distance(ab, direct) < 1e-12);
    CHECK(lebesgue_norm(direct, 2.0) == doctest::Approx(lebesgue_norm(f, 2.0)).epsilon(1e-13));
    const auto back = apply_schrodinger_group(direct, -0.75);
    CHECK(l2_distance(back, f) < 1e-12);
  }
  SUBCASE("plane wave picks up exp(-i |k|^2 t)") {
    const int modes[] = {3, 1};
    const auto pw = ComplexField::plane_wave(g, modes);
    const double t = 0.37;
    const auto s = apply_schrodinger_group(pw, t);
    const Complex phase = std::polar(1.0, -10.0 * t);
    double err = 0.0;
    for (std::size_t i = 0; i < pw.size(); ++i) err = std::max(err, std::abs(s[i] - phase * pw[i]));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("derivatives of a plane wave") {
  auto g = make_grid(2, 16, 4.0);
  const int modes[] = {1, -2};
  const auto pw = ComplexField::plane_wave(g, modes);
  const double k0 = 2 * pi / 4.0;
  const double kx = k0, ky = -2 * k0;

  const auto lap = laplacian(pw);
  const auto grad = gradient(pw);
  const auto mag = gradient_magnitude(pw);
  for (std::size_t i = 0; i < pw.size(); ++i) {
    CHECK(std::abs(lap[i] + (kx * kx + ky * ky) * pw[i]) < 1e-10);
    CHECK(std::abs(grad[0][i] - Complex(0, kx) * pw[i]) < 1e-11);
    CHECK(std::abs(grad[1][i] - Complex(0, ky) * pw[i]) < 1e-11);
    CHECK(mag[i] == doctest::Approx(std::hypot(kx, ky)).epsilon(1e-12));
  }
}

TEST_CASE("Sobolev norms") {
  auto g = make_grid(2, 16, 2 * pi);
  const double sqrt_v = std::sqrt(g->volume());

  SUBCASE("plane wave") {
    const int modes[] = {2, 1};
    const auto pw = ComplexField::plane_wave(g, modes);
    CHECK(sobolev_norm(pw, 0.0) == doctest::Approx(sqrt_v));
    CHECK(sobolev_norm(pw, 1.0) == doctest::Approx(sqrt_v * std::sqrt(6.0)));
    CHECK(sobolev_norm(pw, 1.5) == doctest::Approx(sqrt_v * std::pow(6.0, 0.75)));
    CHECK(sobolev_norm(pw, 1.0, true) == doctest::Approx(sqrt_v * std::sqrt(5.0)));
  }
  SUBCASE("constants have zero homogeneous norm") {
    const auto c = ComplexField::constant(g, {2.0, -1.0});
    CHECK(sobolev_norm(c, 1.0, true) == doctest::Approx(0.0));
    CHECK(sobolev_norm(c, 1.0) == doctest::Approx(std::sqrt(5.0) * sqrt_v));
  }
  SUBCASE("monotone in s") {
    const auto f = random_field(g, 5);
    double prev = 0.0;
    for (double s : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      const double n = sobolev_norm(f, s);
      CHECK(n >= prev);
      prev = n;
    }
    CHECK(sobolev_norm(f, 0.0) == doctest::Approx(lebesgue_norm(f, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("Lebesgue norms") {
  auto g = make_grid(2, 8, 3.0);
  const auto c = ComplexField::constant(g, {0.0, 2.0});
  CHECK(lebesgue_norm(c, 2.0) == doctest::Approx(2.0 * 3.0));
  CHECK(lebesgue_norm(c, 4.0) == doctest::Approx(2.0 * std::pow(9.0, 0.25)));
  CHECK(lebesgue_norm(c, kInfinity) == doctest::Approx(2.0));

  auto f = random_field(g, 9);
  f[17] = {5.0, 12.0};
  CHECK(lebesgue_norm(f, kInfinity) >= 13.0);
  // Hoelder on a finite measure: ||f||_2 <= V^{1/2 - 1/4} ||f||_4.
  CHECK(lebesgue_norm(f, 2.0) <= std::pow(g->volume(), 0.25) * lebesgue_norm(f, 4.0) + 1e-12);
}

TEST_CASE("time quadrature") {
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};

  SUBCASE("constant integrand") {
    const std::vector<double> ones(times.size(), 3.0);
    CHECK(time_lebesgue_norm(times, ones, {0, 4}, 2.0) == doctest::Approx(3.0));
    CHECK(time_lebesgue_norm(times, ones, {1, 3}, 4.0) == doctest::Approx(3.0 * std::pow(0.5, 0.25)));
    CHECK(time_lebesgue_norm(times, ones, {0, 4}, kInfinity) == doctest::Approx(3.0));
  }
  SUBCASE("trapezoid is exact for linear integrands") {
    CHECK(time_lebesgue_norm(times, times, {0, 4}, 1.0) == doctest::Approx(0.5));
  }
  SUBCASE("bad intervals") {
    CHECK_THROWS_AS(time_lebesgue_norm(times, times, {3, 1}, 2.0), UsageError);
    CHECK_THROWS_AS(time_lebesgue_norm(times, times, {0, 5}, 2.0), UsageError);
  }
}

TEST_CASE("space-time norms of a plane wave") {
  auto g = make_grid(2, 16, 2 * pi);
  const int modes[] = {1, 0};
  const auto pw = ComplexField::plane_wave(g, modes);
  const std::vector<double> times{0.0, 0.1, 0.2};
  const std::vector<ComplexField> snaps(3, pw);
  const double v = g->volume();
  // |u| = 1 and |grad u| = 1 everywhere.
  CHECK(spacetime_norm(times, snaps, {0, 2}, 4.0, 2.0, 0) ==
        doctest::Approx(std::pow(0.2, 0.25) * std::sqrt(v)));
  CHECK(x1_norm(times, snaps, {0, 2}) ==
        doctest::Approx(std::pow(0.2, 1.0 / 6.0) * std::pow(v, 5.0 / 12.0)));
  CHECK(spatial_norm(pw, 6.0, 1) == doctest::Approx(std::pow(v, 1.0 / 6.0)));
}
