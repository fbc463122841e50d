#include <cmath>
#include <numbers>

#include "doctest.h"
#include "snls/error.hpp"
#include "snls/noise.hpp"

using namespace snls;
using std::numbers::pi;

namespace {

// ||phi||^2_{HS(L2;H^s)} summed over the integer mode lattice directly.
double hs_sum_oracle(int dim, int n, double length, double amplitude, double sigma, double s,
                     double cutoff = kInfinity) {
  const double k0 = 2 * pi / length;
  double sum = 0.0;
  std::vector<int> m(static_cast<std::size_t>(dim), -n / 2 + 1);
  while (true) {
    double k2 = 0.0;
    for (int x : m) k2 += (k0 * x) * (k0 * x);
    if (std::sqrt(k2) <= cutoff) {
      const double sym = amplitude * std::pow(1.0 + k2, -sigma / 2);
      sum += sym * sym * std::pow(1.0 + k2, s);
    }
    std::size_t a = 0;
    while (a < m.size() && ++m[a] > n / 2) m[a++] = -n / 2 + 1;
    if (a == m.size()) break;
  }
  return sum;
}

}  // namespace

TEST_CASE("multiplier symbol and Hilbert-Schmidt norms") {
  auto g = make_grid(2, 16, 2 * pi);
  const auto phi = NoiseSpec::multiplier(g, 0.3, 2.5);
  CHECK(phi.kind() == NoiseKind::multiplier);
  CHECK(phi.symbol()[0] == doctest::Approx(0.3));
  for (double s : {0.0, 1.0}) {
    CHECK(hs_norm(phi, s) == doctest::Approx(std::sqrt(hs_sum_oracle(2, 16, 2 * pi, 0.3, 2.5, s))));
  }
  const auto cut = NoiseSpec::multiplier(g, 0.3, 2.5, 2.0);
  CHECK(hs_norm(cut, 1.0) ==
        doctest::Approx(std::sqrt(hs_sum_oracle(2, 16, 2 * pi, 0.3, 2.5, 1.0, 2.0))));
  CHECK(hs_norm(cut, 1.0) < hs_norm(phi, 1.0));

  auto g4 = make_grid(4, 8, 3.0);
  CHECK(hs_norm(NoiseSpec::multiplier(g4, 1.0, 3.5), 1.0) ==
        doctest::Approx(std::sqrt(hs_sum_oracle(4, 8, 3.0, 1.0, 3.5, 1.0))));
}

TEST_CASE("variance density of a multiplier is constant") {
  auto g = make_grid(2, 8, 5.0);
  const auto phi = NoiseSpec::multiplier(g, 0.7, 1.5);
  const double expected = hs_sum_oracle(2, 8, 5.0, 0.7, 1.5, 0.0) / g->volume();
  for (double d : phi.variance_density()) CHECK(d == doctest::Approx(expected));
}

TEST_CASE("trivial and rank-list operators") {
  auto g = make_grid(1, 16, 2 * pi);
  CHECK(NoiseSpec::zero(g).is_trivial());
  CHECK(NoiseSpec::multiplier(g, 0.0, 1.0).is_trivial());
  CHECK_FALSE(NoiseSpec::multiplier(g, 0.1, 1.0).is_trivial());
  CHECK(hs_norm(NoiseSpec::zero(g), 1.0) == 0.0);

  const int modes[] = {3};
  const auto col = ComplexField::plane_wave(g, modes);
  const auto r = NoiseSpec::rank_list(g, {col});
  // ||e^{3ix}||^2_{H^1} = V (1 + 9).
  CHECK(hs_norm(r, 1.0) == doctest::Approx(std::sqrt(g->volume() * 10.0)));
  for (double d : r.variance_density()) CHECK(d == doctest::Approx(1.0));

  auto other = make_grid(1, 8, 2 * pi);
  CHECK_THROWS_AS(NoiseSpec::rank_list(g, {ComplexField(other)}), UsageError);
}

TEST_CASE("counter Gaussians") {
  CHECK(counter_gaussian(1, 2, 3, 4) == counter_gaussian(1, 2, 3, 4));
  CHECK(counter_gaussian(1, 2, 3, 4) != counter_gaussian(1, 2, 3, 5));
  CHECK(counter_gaussian(1, 2, 3, 4) != counter_gaussian(1, 3, 3, 4));
  CHECK(counter_gaussian(1, 2, 3, 4) != counter_gaussian(2, 2, 3, 4));

  const std::size_t n = 200000;
  double re = 0, im = 0, re2 = 0, im2 = 0, reim = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex z = counter_gaussian(42, 0, i / 1000, i % 1000);
    re += z.real();
    im += z.imag();
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
    reim += z.real() * z.imag();
  }
  const double dn = static_cast<double>(n);
  // Each statistic has standard error at most sqrt(0.5 / n).
  const double tol = 5.0 / std::sqrt(dn);
  CHECK(std::abs(re / dn) < tol);
  CHECK(std::abs(im / dn) < tol);
  CHECK(std::abs(re2 / dn - 0.5) < tol);
  CHECK(std::abs(im2 / dn - 0.5) < tol);
  CHECK(std::abs(reim / dn) < tol);
}

TEST_CASE("increment spectrum has variance dt * phi_hat^2") {
  auto g = make_grid(1, 8, 2 * pi);
  const auto phi = NoiseSpec::multiplier(g, 0.5, 1.0);
  const double dt = 0.01;
  const std::size_t steps = 20000;
  std::vector<double> second(g->size(), 0.0);
  std::vector<Complex> first(g->size());
  RngState rng{9, 0, 0};
  for (std::size_t s = 0; s < steps; ++s) {
    const auto c = to_spectral(sample_wiener_increment(phi, dt, rng));
    for (std::size_t k = 0; k < c.size(); ++k) {
      second[k] += std::norm(c[k]);
      first[k] += c[k];
    }
  }
  CHECK(rng.step == steps);
  for (std::size_t k = 0; k < g->size(); ++k) {
    const double var = dt * phi.symbol()[k] * phi.symbol()[k];
    const double se = var / std::sqrt(static_cast<double>(steps));  // |z|^2 is Exp(1)-distributed
    CHECK(std::abs(second[k] / steps - var) < 5 * se);
    CHECK(std::abs(first[k] / static_cast<double>(steps)) < 5 * std::sqrt(var / steps));
  }
}

TEST_CASE("noise paths are replayable and linear in phi") {
  auto g = make_grid(2, 8, 2 * pi);
  const auto phi = NoiseSpec::multiplier(g, 0.2, 2.0);
  const auto a = generate_noise_path(phi, 0.01, 5, 3, 1);
  const auto b = generate_noise_path(phi, 0.01, 5, 3, 1);
  const auto c = generate_noise_path(phi, 0.01, 5, 3, 2);
  const auto twice = generate_noise_path(phi.scaled(2.0), 0.01, 5, 3, 1);
  REQUIRE(a.steps() == 5);
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      CHECK(a.increments[s][i] == b.increments[s][i]);
      CHECK(std::abs(twice.increments[s][i] - 2.0 * a.increments[s][i]) < 1e-15);
    }
  }
  CHECK(a.increments[0][0] != c.increments[0][0]);

  // Drawing one increment at a time gives the same path.
  RngState rng{3, 1, 0};
  for (std::size_t s = 0; s < 5; ++s) {
    const auto inc = sample_wiener_increment(phi, 0.01, rng);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(inc[i] == a.increments[s][i]);
  }
}

TEST_CASE("coarsening sums blocks of increments") {
  auto g = make_grid(1, 8, 2 * pi);
  const auto fine = generate_noise_path(NoiseSpec::multiplier(g, 1.0, 1.0), 0.001, 6, 0, 0);
  const auto coarse = coarsen(fine, 3);
  CHECK(coarse.dt == doctest::Approx(0.003));
  REQUIRE(coarse.steps() == 2);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Complex s = fine.increments[3][i] + fine.increments[4][i] + fine.increments[5][i];
    CHECK(std::abs(coarse.increments[1][i] - s) < 1e-15);
  }
  CHECK_THROWS_AS(coarsen(fine, 4), UsageError);
  CHECK_THROWS_AS(coarsen(fine, 0), UsageError);
}

TEST_CASE("stochastic convolution step") {
  auto g = make_grid(2, 8, 2 * pi);
  const int modes[] = {1, 1};
  const auto psi = ComplexField::plane_wave(g, modes);
  const auto zero = ComplexField(g);
  const auto next = step_stochastic_convolution(psi, zero, 0.1);
  const auto ref = apply_schrodinger_group(psi, 0.1);
  for (std::size_t i = 0; i < psi.size(); ++i) CHECK(std::abs(next[i] - ref[i]) < 1e-14);

  const auto inc = ComplexField::constant(g, {0.5, 0.0});
  const auto from_zero = step_stochastic_convolution(zero, inc, 0.1);
  for (std::size_t i = 0; i < psi.size(); ++i) CHECK(std::abs(from_zero[i] - Complex(0, -0.5)) < 1e-15);

  // The sampling overload records what it used.
  NoisePath record;
  RngState rng{1, 0, 0};
  const auto phi = NoiseSpec::multiplier(g, 0.1, 2.0);
  const auto sampled = step_stochastic_convolution(psi, phi, 0.1, rng, &record);
  REQUIRE(record.steps() == 1);
  const auto replay = step_stochastic_convolution(psi, record.increments[0], 0.1);
  for (std::size_t i = 0; i < psi.size(); ++i) CHECK(sampled[i] == replay[i]);
}

TEST_CASE("Ito isometry for the stochastic convolution") {
  auto g = make_grid(2, 8, 2 * pi);
  const auto phi = NoiseSpec::multiplier(g, 0.3, 2.0);
  const double dt = 0.02;
  const std::size_t steps = 10, members = 600;
  std::vector<PsiPath> ensemble;
  for (std::size_t m = 0; m < members; ++m) ensemble.push_back(sample_psi_path(phi, dt, steps, 77, m, 5));
  REQUIRE(ensemble[0].times.size() == 3);
  CHECK(ensemble[0].times.back() == doctest::Approx(0.2));

  const auto est = psi_moment_estimate(ensemble, 2, 1.0, 2.0, false);
  const double hs = hs_norm(phi, 1.0);
  CHECK(est.samples == members);
  CHECK(std::abs(est.mean - 0.2 * hs * hs) < 3.5 * est.std_error);

  const auto sup = psi_moment_estimate(ensemble, 2, 1.0, 2.0, true);
  CHECK(sup.mean >= est.mean);

  CHECK_THROWS_AS(psi_moment_estimate({}, 0, 1.0, 2.0), UsageError);
  CHECK_THROWS_AS(psi_moment_estimate(ensemble, 0, 1.0, 1.0), UsageError);
}

TEST_CASE("sample mean with standard error") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto m = mean_with_error(x);
  CHECK(m.mean == doctest::Approx(2.0));
  CHECK(m.std_error == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(m.samples == 3);
  const std::vector<double> one{4.0};
  CHECK(mean_with_error(one).std_error == 0.0);
}
