#include "besim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "besim/error.hpp"
#include "fft_plans.hpp"

namespace besim {

namespace detail {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

FftPlans::FftPlans(std::array<int, 3> dims) {
  const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  const std::size_t nh = static_cast<std::size_t>(dims[0]) * dims[1] * (dims[2] / 2 + 1);
  std::lock_guard lock(fftw_planner_mutex());
  double* real = fftw_alloc_real(n);
  fftw_complex* cplx = fftw_alloc_complex(nh);
  // ESTIMATE keeps plan selection, and therefore round-off, reproducible.
  r2c = fftw_plan_dft_r2c_3d(dims[0], dims[1], dims[2], real, cplx, FFTW_ESTIMATE);
  c2r = fftw_plan_dft_c2r_3d(dims[0], dims[1], dims[2], cplx, real,
                             FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
  r2c_unaligned = fftw_plan_dft_r2c_3d(dims[0], dims[1], dims[2], real, cplx,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  c2r_unaligned = fftw_plan_dft_c2r_3d(dims[0], dims[1], dims[2], cplx, real,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  fftw_free(real);
  fftw_free(cplx);
  if (!r2c || !c2r || !r2c_unaligned || !c2r_unaligned)
    throw Error(ErrorKind::configuration, "FFTW failed to create plans");
}

FftPlans::~FftPlans() {
  std::lock_guard lock(fftw_planner_mutex());
  if (r2c) fftw_destroy_plan(r2c);
  if (c2r) fftw_destroy_plan(c2r);
  if (r2c_unaligned) fftw_destroy_plan(r2c_unaligned);
  if (c2r_unaligned) fftw_destroy_plan(c2r_unaligned);
}

}  // namespace detail

namespace {

std::vector<int> dft_frequencies(int n) {
  std::vector<int> f(n);
  for (int i = 0; i < n; ++i) f[i] = i < n / 2 ? i : i - n;
  return f;
}

}  // namespace

SpectralGrid::SpectralGrid(std::array<int, 3> dims, std::array<double, 3> box)
    : dims_(dims), box_(box) {
  points_ = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  modes_ = static_cast<std::size_t>(dims[0]) * dims[1] * half_modes();
  for (int ax = 0; ax < 3; ++ax) freq_[ax] = dft_frequencies(dims[ax]);

  for (auto& k : kd_) k.resize(modes_);
  k2_.resize(modes_);
  mask_.resize(modes_);
  const int nh = half_modes();
  for (int i = 0; i < dims[0]; ++i)
    for (int j = 0; j < dims[1]; ++j)
      for (int k = 0; k < nh; ++k) {
        const std::size_t m = mode_index(i, j, k);
        const std::array<int, 3> idx{i, j, k};
        const std::array<int, 3> f = mode_frequency(m);
        double k2 = 0.0;
        bool keep = true;
        for (int ax = 0; ax < 3; ++ax) {
          const double kw = 2.0 * std::numbers::pi * f[ax] / box[ax];
          k2 += kw * kw;
          const bool nyquist = idx[ax] == dims[ax] / 2;
          kd_[ax][m] = nyquist ? 0.0 : kw;
          if (std::abs(f[ax]) > dims[ax] / 3) keep = false;
        }
        k2_[m] = k2;
        mask_[m] = keep ? 1 : 0;
      }
  plans_ = std::make_unique<detail::FftPlans>(dims);
}

SpectralGrid::~SpectralGrid() = default;

std::shared_ptr<const SpectralGrid> SpectralGrid::make(std::array<int, 3> dims,
                                                       std::array<double, 3> box) {
  for (int ax = 0; ax < 3; ++ax) {
    if (dims[ax] < 4 || dims[ax] % 2 != 0)
      throw Error(ErrorKind::configuration,
                  "grid dimension " + std::to_string(ax + 1) + " = " + std::to_string(dims[ax]) +
                      " must be even and at least 4");
    if (!(box[ax] > 0.0) || !std::isfinite(box[ax]))
      throw Error(ErrorKind::configuration,
                  "box length " + std::to_string(ax + 1) + " must be positive and finite");
  }
  return std::shared_ptr<const SpectralGrid>(new SpectralGrid(dims, box));
}

double SpectralGrid::min_spacing() const {
  return std::min({spacing(0), spacing(1), spacing(2)});
}

std::array<int, 3> SpectralGrid::mode_frequency(std::size_t mode) const {
  const int nh = half_modes();
  const int k = static_cast<int>(mode % nh);
  const std::size_t rest = mode / nh;
  const int j = static_cast<int>(rest % dims_[1]);
  const int i = static_cast<int>(rest / dims_[1]);
  // The stored axis-3 index k = n3/2 is the Nyquist plane; report it as -n3/2
  // like the full DFT table does.
  return {freq_[0][i], freq_[1][j], freq_[2][k]};
}

std::array<double, 3> SpectralGrid::coordinate(std::size_t point) const {
  const int k = static_cast<int>(point % dims_[2]);
  const std::size_t rest = point / dims_[2];
  const int j = static_cast<int>(rest % dims_[1]);
  const int i = static_cast<int>(rest / dims_[1]);
  return {i * spacing(0), j * spacing(1), k * spacing(2)};
}

double SpectralGrid::hermitian_weight(std::size_t mode) const {
  const int k = static_cast<int>(mode % half_modes());
  return (k == 0 || k == dims_[2] / 2) ? 1.0 : 2.0;
}

bool SpectralGrid::same_shape(const SpectralGrid& other) const {
  return this == &other || (dims_ == other.dims_ && box_ == other.box_);
}

GridPtr make_grid(std::array<int, 3> dims, std::array<double, 3> box) {
  return SpectralGrid::make(dims, box);
}

GridPtr make_grid(std::array<int, 3> dims) { return SpectralGrid::make(dims); }

void require_same_grid(const SpectralGrid& a, const SpectralGrid& b, const char* what) {
  if (!a.same_shape(b))
    throw Error(ErrorKind::dimension, std::string("grid mismatch in ") + what);
}

}  // namespace besim
