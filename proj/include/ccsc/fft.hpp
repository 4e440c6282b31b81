#pragma once

// 2-D complex DFT backed by FFTW.
//
// Convention: the forward transform is unnormalized, the inverse is scaled by
// 1/(rows*cols), so forward followed by inverse is the identity. Under this
// convention circular convolution maps to a per-bin product and
// ||x||^2 = ||fft(x)||^2 / N.

#include <fftw3.h>

#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "ccsc/image.hpp"

namespace ccsc::fft {

namespace detail {

/// Process-wide cache of in-place FFTW plans. Plan creation is serialized;
/// execution through fftw_execute_dft on caller-owned buffers is reentrant.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t rows, std::size_t cols, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(rows, cols, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Complex> scratch(rows * cols);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf,
                                      sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

inline void execute(std::span<Complex> data, std::size_t rows, std::size_t cols, int sign) {
  if (data.size() != rows * cols) throw DimensionError("fft: buffer size does not match shape");
  if (data.empty()) return;
  fftw_plan plan = PlanCache::instance().get(rows, cols, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace detail

/// In-place unnormalized forward transform of a row-major rows x cols buffer.
inline void forward_inplace(std::span<Complex> data, std::size_t rows, std::size_t cols) {
  detail::execute(data, rows, cols, FFTW_FORWARD);
}

/// In-place inverse transform including the 1/N scale.
inline void inverse_inplace(std::span<Complex> data, std::size_t rows, std::size_t cols) {
  detail::execute(data, rows, cols, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(rows * cols);
  for (auto& z : data) z *= scale;
}

inline ComplexImage forward(ComplexImage img) {
  forward_inplace(img.span(), img.rows(), img.cols());
  return img;
}

inline ComplexImage inverse(ComplexImage img) {
  inverse_inplace(img.span(), img.rows(), img.cols());
  return img;
}

}  // namespace ccsc::fft
