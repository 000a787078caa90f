#pragma once

#include <fftw3.h>

#include <array>
#include <mutex>

namespace besim::detail {

// The FFTW planner is not thread safe; execution of an existing plan is.
std::mutex& fftw_planner_mutex();

struct FftPlans {
  FftPlans(std::array<int, 3> dims);
  ~FftPlans();
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  // SIMD plans for 16-byte aligned buffers (anything from operator new),
  // with generic fallbacks.
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan r2c_unaligned = nullptr;
  fftw_plan c2r_unaligned = nullptr;
};

}  // namespace besim::detail
