#include "snls/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "snls/error.hpp"

namespace snls {

GridSpec::GridSpec(int dim, std::size_t points_per_axis, double box_length)
    : dim_(dim), n_(points_per_axis), length_(box_length) {
  spacing_ = length_ / static_cast<double>(n_);
  size_ = 1;
  for (int d = 0; d < dim_; ++d) size_ *= n_;
  volume_ = std::pow(length_, dim_);
  cell_ = std::pow(spacing_, dim_);

  k_axis_.resize(n_);
  const double base = 2.0 * std::numbers::pi / length_;
  for (std::size_t j = 0; j < n_; ++j) {
    const long m = j <= n_ / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n_);
    k_axis_[j] = base * static_cast<double>(m);
  }

  k2_.assign(size_, 0.0);
  for (std::size_t flat = 0; flat < size_; ++flat) {
    double sum = 0.0;
    for (int a = 0; a < dim_; ++a) {
      const double k = k_axis_[axis_index(flat, a)];
      sum += k * k;
    }
    k2_[flat] = sum;
  }
}

std::size_t GridSpec::axis_index(std::size_t flat, int axis) const noexcept {
  std::size_t stride = 1;
  for (int a = dim_ - 1; a > axis; --a) stride *= n_;
  return (flat / stride) % n_;
}

int GridSpec::mode_index(std::size_t flat, int axis) const noexcept {
  const auto j = axis_index(flat, axis);
  return j <= n_ / 2 ? static_cast<int>(j) : static_cast<int>(j) - static_cast<int>(n_);
}

double GridSpec::wavenumber(std::size_t flat, int axis) const noexcept {
  return k_axis_[axis_index(flat, axis)];
}

double GridSpec::coordinate(std::size_t flat, int axis) const noexcept {
  return spacing_ * static_cast<double>(axis_index(flat, axis));
}

GridPtr make_grid(int dim, std::size_t points_per_axis, double box_length) {
  if (dim < 1 || dim > 4) {
    throw ConfigError("grid dimension must be in {1,2,3,4}, got " + std::to_string(dim));
  }
  const bool pow2 = points_per_axis != 0 && (points_per_axis & (points_per_axis - 1)) == 0;
  if (!pow2 || points_per_axis < 8) {
    throw ConfigError("points_per_axis must be a power of two >= 8, got " +
                      std::to_string(points_per_axis));
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length)) {
    std::ostringstream msg;
    msg << "box_length must be positive and finite, got " << box_length;
    throw ConfigError(msg.str());
  }
  return std::make_shared<const GridSpec>(dim, points_per_axis, box_length);
}

// ---------------------------------------------------------------------------

ComplexField::ComplexField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size()) {}

ComplexField::ComplexField(GridPtr grid, std::vector<Complex> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) {
    throw UsageError("field length " + std::to_string(values_.size()) +
                     " does not match grid size " + std::to_string(grid_->size()));
  }
}

ComplexField ComplexField::constant(GridPtr grid, Complex value) {
  const auto n = grid->size();
  return ComplexField(std::move(grid), std::vector<Complex>(n, value));
}

ComplexField ComplexField::plane_wave(GridPtr grid, std::span<const int> modes) {
  if (static_cast<int>(modes.size()) != grid->dim()) {
    throw UsageError("plane_wave needs one mode number per axis");
  }
  ComplexField out(grid);
  const double base = 2.0 * std::numbers::pi / grid->box_length();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double phase = 0.0;
    for (int a = 0; a < grid->dim(); ++a) {
      phase += base * modes[static_cast<std::size_t>(a)] * grid->coordinate(i, a);
    }
    out[i] = std::polar(1.0, phase);
  }
  return out;
}

bool ComplexField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

bool ComplexField::same_grid(const ComplexField& other) const noexcept {
  return grid_ && other.grid_ && (grid_ == other.grid_ || *grid_ == *other.grid_);
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
  require_same_grid(*this, other, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
  require_same_grid(*this, other, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator*=(Complex scale) noexcept {
  for (auto& z : values_) z *= scale;
  return *this;
}

void require_same_grid(const ComplexField& a, const ComplexField& b, const char* where) {
  if (!a.same_grid(b)) throw UsageError(std::string(where) + ": grid mismatch");
}

// ---------------------------------------------------------------------------

std::vector<Complex> to_spectral(const ComplexField& field) {
  const auto& g = field.grid();
  std::vector<Complex> c(field.values().begin(), field.values().end());
  detail::fft_inplace(g, c.data(), -1);
  const double scale = g.cell_measure() / std::sqrt(g.volume());
  for (auto& z : c) z *= scale;
  return c;
}

ComplexField from_spectral(const GridPtr& grid, std::span<const Complex> coefficients) {
  std::vector<Complex> v(coefficients.begin(), coefficients.end());
  if (v.size() != grid->size()) throw UsageError("from_spectral: coefficient count mismatch");
  detail::fft_inplace(*grid, v.data(), +1);
  const double scale = 1.0 / std::sqrt(grid->volume());
  for (auto& z : v) z *= scale;
  return ComplexField(grid, std::move(v));
}

ComplexField apply_schrodinger_group(const ComplexField& field, double t) {
  if (t == 0.0) return field;
  auto c = to_spectral(field);
  const auto k2 = field.grid().k_squared();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, -k2[i] * t);
  return from_spectral(field.grid_ptr(), c);
}

ComplexField laplacian(const ComplexField& field) {
  auto c = to_spectral(field);
  const auto k2 = field.grid().k_squared();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= -k2[i];
  return from_spectral(field.grid_ptr(), c);
}

std::vector<ComplexField> gradient(const ComplexField& field) {
  const auto& g = field.grid();
  const auto c = to_spectral(field);
  std::vector<ComplexField> out;
  out.reserve(static_cast<std::size_t>(g.dim()));
  std::vector<Complex> d(c.size());
  for (int a = 0; a < g.dim(); ++a) {
    for (std::size_t i = 0; i < c.size(); ++i) d[i] = Complex(0.0, g.wavenumber(i, a)) * c[i];
    out.push_back(from_spectral(field.grid_ptr(), d));
  }
  return out;
}

std::vector<double> gradient_magnitude(const ComplexField& field) {
  const auto parts = gradient(field);
  std::vector<double> mag(field.size(), 0.0);
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += std::norm(p[i]);
  }
  for (auto& m : mag) m = std::sqrt(m);
  return mag;
}

double sobolev_norm(const ComplexField& field, double s, bool homogeneous) {
  const auto c = to_spectral(field);
  const auto k2 = field.grid().k_squared();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a = std::norm(c[i]);
    if (a == 0.0) continue;
    if (homogeneous) {
      if (k2[i] == 0.0) continue;
      sum += std::pow(k2[i], s) * a;
    } else {
      sum += std::pow(1.0 + k2[i], s) * a;
    }
  }
  return std::sqrt(sum);
}

double lebesgue_norm(std::span<const double> magnitudes, double cell_measure, double r) {
  if (r == kInfinity) {
    double m = 0.0;
    for (double x : magnitudes) m = std::max(m, x);
    return m;
  }
  if (!(r >= 1.0)) throw UsageError("lebesgue exponent must be in [1, inf]");
  double sum = 0.0;
  if (r == 2.0) {
    for (double x : magnitudes) sum += x * x;
  } else {
    for (double x : magnitudes) sum += std::pow(x, r);
  }
  return std::pow(sum * cell_measure, 1.0 / r);
}

double lebesgue_norm(const ComplexField& field, double r) {
  std::vector<double> mag(field.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(field[i]);
  return lebesgue_norm(mag, field.grid().cell_measure(), r);
}

double spatial_norm(const ComplexField& field, double r, int derivative_order) {
  if (derivative_order == 0) return lebesgue_norm(field, r);
  if (derivative_order == 1) {
    return lebesgue_norm(gradient_magnitude(field), field.grid().cell_measure(), r);
  }
  throw UsageError("derivative_order must be 0 or 1");
}

namespace {

void check_interval(std::size_t count, SpacetimeInterval interval) {
  if (interval.start_index > interval.end_index || interval.end_index >= count) {
    throw UsageError("interval [" + std::to_string(interval.start_index) + ", " +
                     std::to_string(interval.end_index) + "] outside snapshot range of size " +
                     std::to_string(count));
  }
}

}  // namespace

double time_lebesgue_norm(std::span<const double> times, std::span<const double> spatial_norms,
                          SpacetimeInterval interval, double q) {
  check_interval(std::min(times.size(), spatial_norms.size()), interval);
  if (q == kInfinity) {
    double m = 0.0;
    for (auto i = interval.start_index; i <= interval.end_index; ++i) {
      m = std::max(m, spatial_norms[i]);
    }
    return m;
  }
  if (!(q >= 1.0)) throw UsageError("time exponent must be in [1, inf]");
  double sum = 0.0;
  for (auto i = interval.start_index; i < interval.end_index; ++i) {
    const double dt = times[i + 1] - times[i];
    sum += 0.5 * dt * (std::pow(spatial_norms[i], q) + std::pow(spatial_norms[i + 1], q));
  }
  return std::pow(sum, 1.0 / q);
}

double spacetime_norm(std::span<const double> times, std::span<const ComplexField> snapshots,
                      SpacetimeInterval interval, double q, double r, int derivative_order) {
  check_interval(std::min(times.size(), snapshots.size()), interval);
  std::vector<double> norms(snapshots.size(), 0.0);
  for (auto i = interval.start_index; i <= interval.end_index; ++i) {
    norms[i] = spatial_norm(snapshots[i], r, derivative_order);
  }
  return time_lebesgue_norm(times, norms, interval, q);
}

double x1_norm(std::span<const double> times, std::span<const ComplexField> snapshots,
               SpacetimeInterval interval) {
  return spacetime_norm(times, snapshots, interval, 6.0, 12.0 / 5.0, 1);
}

}  // namespace snls
