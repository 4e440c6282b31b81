#pragma once

// Circular convolution plumbing: zero-padding filters to image size (support
// anchored at the top-left corner) and moving filter banks / coefficient
// stacks in and out of the frequency domain.

#include <cstddef>
#include <span>

#include "ccsc/error.hpp"
#include "ccsc/fft.hpp"
#include "ccsc/image.hpp"
#include "ccsc/sherman_morrison.hpp"

namespace ccsc {

inline ComplexImage pad_filter(const ComplexImage& filter, std::size_t rows, std::size_t cols) {
  if (filter.rows() > rows || filter.cols() > cols) {
    throw DimensionError("filter " + shape_string(filter.rows(), filter.cols()) +
                         " does not fit image " + shape_string(rows, cols));
  }
  ComplexImage out(rows, cols);
  for (std::size_t r = 0; r < filter.rows(); ++r) {
    for (std::size_t c = 0; c < filter.cols(); ++c) out(r, c) = filter(r, c);
  }
  return out;
}

inline ComplexImage crop_filter(const ComplexImage& padded, std::size_t size) {
  if (size > padded.rows() || size > padded.cols()) {
    throw DimensionError("crop size exceeds padded filter");
  }
  ComplexImage out(size, size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) out(r, c) = padded(r, c);
  }
  return out;
}

/// Spectra of the zero-padded filters: plane m = fft(pad(d_m)).
inline FrequencyGrid bank_spectrum(const FilterBank& bank, std::size_t rows, std::size_t cols) {
  if (bank.filter_size() > rows || bank.filter_size() > cols) {
    throw DimensionError("filter size " + std::to_string(bank.filter_size()) +
                         " exceeds image " + shape_string(rows, cols));
  }
  FrequencyGrid out(rows, cols, bank.num_filters());
  for (std::size_t m = 0; m < bank.num_filters(); ++m) {
    auto plane = out.plane(m);
    const auto& f = bank[m];
    for (std::size_t r = 0; r < f.rows(); ++r) {
      for (std::size_t c = 0; c < f.cols(); ++c) plane[r * cols + c] = f(r, c);
    }
    fft::forward_inplace(plane, rows, cols);
  }
  return out;
}

inline FrequencyGrid stack_spectrum(const CoefficientStack& stack) {
  FrequencyGrid out(stack.rows(), stack.cols(), stack.num_maps());
  for (std::size_t m = 0; m < stack.num_maps(); ++m) {
    auto plane = out.plane(m);
    std::copy(stack.maps[m].span().begin(), stack.maps[m].span().end(), plane.begin());
    fft::forward_inplace(plane, stack.rows(), stack.cols());
  }
  return out;
}

inline CoefficientStack stack_from_spectrum(const FrequencyGrid& spec) {
  CoefficientStack out(spec.depth(), spec.rows(), spec.cols());
  for (std::size_t m = 0; m < spec.depth(); ++m) {
    auto plane = spec.plane(m);
    std::copy(plane.begin(), plane.end(), out.maps[m].span().begin());
    fft::inverse_inplace(out.maps[m].span(), spec.rows(), spec.cols());
  }
  return out;
}

/// Per-bin sum over components of a_m * b_m (the spectrum of sum_m d_m * x_m).
inline ComplexImage spectral_product_sum(const FrequencyGrid& a, const FrequencyGrid& b) {
  if (!a.same_shape(b)) throw DimensionError("spectral product: shape mismatch");
  ComplexImage out(a.rows(), a.cols());
  for (std::size_t m = 0; m < a.depth(); ++m) {
    auto pa = a.plane(m);
    auto pb = b.plane(m);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += pa[i] * pb[i];
  }
  return out;
}

/// sum_m d_m * x_m under circular convolution.
inline ComplexImage convolve_sum(const FilterBank& bank, const CoefficientStack& coeffs) {
  if (coeffs.num_maps() != bank.num_filters()) {
    throw DimensionError("convolve_sum: " + std::to_string(bank.num_filters()) + " filters vs " +
                         std::to_string(coeffs.num_maps()) + " coefficient maps");
  }
  const FrequencyGrid dhat = bank_spectrum(bank, coeffs.rows(), coeffs.cols());
  const FrequencyGrid xhat = stack_spectrum(coeffs);
  return fft::inverse(spectral_product_sum(dhat, xhat));
}

/// Circular convolution of an image with a kernel of the same size.
inline ComplexImage circular_convolve(const ComplexImage& kernel, const ComplexImage& x) {
  require_same_shape(kernel, x, "circular_convolve");
  ComplexImage kh = fft::forward(kernel);
  ComplexImage xh = fft::forward(x);
  for (std::size_t i = 0; i < xh.size(); ++i) xh[i] *= kh[i];
  return fft::inverse(std::move(xh));
}

}  // namespace ccsc
