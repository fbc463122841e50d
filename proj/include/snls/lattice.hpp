#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace snls {

using Complex = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Periodic lattice on [0, L)^dim with the same number of points per axis.
///
/// Spectral data is stored in FFT order: along each axis index j carries the
/// integer mode m = j for j <= n/2 and m = j - n otherwise, so the mode range
/// is {-n/2 + 1, ..., n/2} with the Nyquist mode on the positive side.
class GridSpec {
 public:
  GridSpec(int dim, std::size_t points_per_axis, double box_length);

  int dim() const noexcept { return dim_; }
  std::size_t points_per_axis() const noexcept { return n_; }
  double box_length() const noexcept { return length_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return size_; }
  double volume() const noexcept { return volume_; }
  /// spacing^dim, the quadrature weight of one lattice point.
  double cell_measure() const noexcept { return cell_; }

  /// Per-axis wave numbers 2*pi*m/L in FFT order (identical on every axis).
  std::span<const double> wavenumbers() const noexcept { return k_axis_; }
  /// |k|^2 for every flat spectral index.
  std::span<const double> k_squared() const noexcept { return k2_; }
  /// Integer mode number of a flat index along one axis.
  int mode_index(std::size_t flat, int axis) const noexcept;
  double wavenumber(std::size_t flat, int axis) const noexcept;
  /// Physical coordinate j*h of a flat index along one axis.
  double coordinate(std::size_t flat, int axis) const noexcept;

  bool operator==(const GridSpec& other) const noexcept {
    return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
  }

 private:
  std::size_t axis_index(std::size_t flat, int axis) const noexcept;

  int dim_;
  std::size_t n_;
  double length_;
  double spacing_;
  std::size_t size_;
  double volume_;
  double cell_;
  std::vector<double> k_axis_;
  std::vector<double> k2_;
};

using GridPtr = std::shared_ptr<const GridSpec>;

/// Validates and builds a grid; throws ConfigError on bad input.
GridPtr make_grid(int dim, std::size_t points_per_axis, double box_length);

/// Complex lattice function, row-major with the last axis fastest.
class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(GridPtr grid);
  ComplexField(GridPtr grid, std::vector<Complex> values);

  static ComplexField constant(GridPtr grid, Complex value);
  /// exp(i k.x) with integer mode numbers `modes` (one per axis).
  static ComplexField plane_wave(GridPtr grid, std::span<const int> modes);

  const GridSpec& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<Complex> values() noexcept { return values_; }
  std::span<const Complex> values() const noexcept { return values_; }
  Complex& operator[](std::size_t i) noexcept { return values_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return values_[i]; }

  bool all_finite() const noexcept;
  bool same_grid(const ComplexField& other) const noexcept;

  ComplexField& operator+=(const ComplexField& other);
  ComplexField& operator-=(const ComplexField& other);
  ComplexField& operator*=(Complex scale) noexcept;

  friend ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
  friend ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
  friend ComplexField operator*(Complex s, ComplexField a) { return a *= s; }

 private:
  GridPtr grid_;
  std::vector<Complex> values_;
};

/// Throws UsageError unless both fields live on equal grids.
void require_same_grid(const ComplexField& a, const ComplexField& b, const char* where);

// ---------------------------------------------------------------------------
// Spectral transform
//
// Coefficients are inner products with the orthonormal exponentials
// e_k(x) = exp(i k.x) / sqrt(V), so sum_k |c_k|^2 equals the physical L2 norm
// squared computed with the cell measure.

std::vector<Complex> to_spectral(const ComplexField& field);
ComplexField from_spectral(const GridPtr& grid, std::span<const Complex> coefficients);

/// S(t) = exp(i t Laplacian): multiplies each coefficient by exp(-i |k|^2 t).
ComplexField apply_schrodinger_group(const ComplexField& field, double t);

ComplexField laplacian(const ComplexField& field);
/// Spectral partial derivatives, one field per axis.
std::vector<ComplexField> gradient(const ComplexField& field);
/// Pointwise (sum_j |d_j u|^2)^(1/2).
std::vector<double> gradient_magnitude(const ComplexField& field);

// ---------------------------------------------------------------------------
// Norms

/// H^s (weight (1+|k|^2)^s) or homogeneous H^s (weight |k|^{2s}, zero mode
/// excluded) norm.
double sobolev_norm(const ComplexField& field, double s, bool homogeneous = false);

/// Discrete L^r norm with the cell measure; r = kInfinity gives the max.
double lebesgue_norm(const ComplexField& field, double r);
double lebesgue_norm(std::span<const double> magnitudes, double cell_measure, double r);

/// Inclusive range of snapshot indices.
struct SpacetimeInterval {
  std::size_t start_index = 0;
  std::size_t end_index = 0;
};

/// Time L^q norm of per-snapshot spatial norms by the trapezoid rule.
double time_lebesgue_norm(std::span<const double> times, std::span<const double> spatial_norms,
                          SpacetimeInterval interval, double q);

/// L^q_t L^r_x norm of grad^j u over the interval, j in {0, 1}.
double spacetime_norm(std::span<const double> times, std::span<const ComplexField> snapshots,
                      SpacetimeInterval interval, double q, double r, int derivative_order);

/// ||grad u||_{L^6_t L^{12/5}_x}.
double x1_norm(std::span<const double> times, std::span<const ComplexField> snapshots,
               SpacetimeInterval interval);

/// Spatial L^r norm of grad^j u for one snapshot.
double spatial_norm(const ComplexField& field, double r, int derivative_order);

}  // namespace snls
