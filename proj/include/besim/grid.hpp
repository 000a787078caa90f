#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace besim {

namespace detail {
struct FftPlans;
}

/// Uniform periodic grid with its spectral tables.
///
/// Physical samples are stored with axis 3 fastest: p = (i n2 + j) n3 + k.
/// Spectral arrays use the real-to-complex half layout n1 x n2 x (n3/2+1).
/// The dealias mask keeps a mode iff |f_i| <= floor(N_i/3) on every axis.
class SpectralGrid {
 public:
  static std::shared_ptr<const SpectralGrid> make(
      std::array<int, 3> dims,
      std::array<double, 3> box = {2 * std::numbers::pi, 2 * std::numbers::pi,
                                   2 * std::numbers::pi});

  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;
  ~SpectralGrid();

  const std::array<int, 3>& dims() const { return dims_; }
  const std::array<double, 3>& box() const { return box_; }
  int half_modes() const { return dims_[2] / 2 + 1; }
  std::size_t points() const { return points_; }
  std::size_t modes() const { return modes_; }
  double volume() const { return box_[0] * box_[1] * box_[2]; }
  double cell_volume() const { return volume() / static_cast<double>(points_); }
  double spacing(int axis) const { return box_[axis] / dims_[axis]; }
  double min_spacing() const;

  /// Integer frequencies of one axis in standard DFT order.
  std::span<const int> frequencies(int axis) const { return freq_[axis]; }
  int cutoff(int axis) const { return dims_[axis] / 3; }

  std::size_t point_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
  }
  std::size_t mode_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims_[1] + j) * half_modes() + k;
  }
  /// Integer frequency triple of a stored spectral mode.
  std::array<int, 3> mode_frequency(std::size_t mode) const;
  /// Coordinates of a grid point.
  std::array<double, 3> coordinate(std::size_t point) const;

  /// Per-mode wavenumber used by derivatives; zero on each axis's Nyquist index.
  std::span<const double> derivative_wavenumber(int axis) const { return kd_[axis]; }
  /// Per-mode |k|^2 including Nyquist entries.
  std::span<const double> k_squared() const { return k2_; }
  std::span<const std::uint8_t> dealias_mask() const { return mask_; }
  bool keeps(std::size_t mode) const { return mask_[mode] != 0; }
  /// Weight of a stored mode in full-spectrum sums (1 on the k3 = 0 and
  /// Nyquist planes, 2 elsewhere).
  double hermitian_weight(std::size_t mode) const;

  bool same_shape(const SpectralGrid& other) const;

  const detail::FftPlans& plans() const { return *plans_; }

 private:
  SpectralGrid(std::array<int, 3> dims, std::array<double, 3> box);

  std::array<int, 3> dims_;
  std::array<double, 3> box_;
  std::size_t points_;
  std::size_t modes_;
  std::array<std::vector<int>, 3> freq_;
  std::array<std::vector<double>, 3> kd_;
  std::vector<double> k2_;
  std::vector<std::uint8_t> mask_;
  std::unique_ptr<detail::FftPlans> plans_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Throws a configuration error for odd or < 4 dims or a nonpositive box.
GridPtr make_grid(std::array<int, 3> dims, std::array<double, 3> box);
GridPtr make_grid(std::array<int, 3> dims);

/// Throws a dimension error unless both grids have identical dims and box.
void require_same_grid(const SpectralGrid& a, const SpectralGrid& b, const char* what);

}  // namespace besim
