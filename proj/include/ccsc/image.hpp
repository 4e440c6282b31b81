#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccsc/error.hpp"

namespace ccsc {

using Complex = std::complex<double>;

/// Dense row-major 2-D grid. Used for complex interferograms, coefficient
/// maps, zero-padded filters, and real-valued phase/coherence maps.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Grid(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("grid data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> span() noexcept { return data_; }
  std::span<const T> span() const noexcept { return data_; }
  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using ComplexImage = Grid<Complex>;
using RealImage = Grid<double>;

inline std::string shape_string(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape " + shape_string(a.rows(), a.cols()) +
                         " vs " + shape_string(b.rows(), b.cols()));
  }
}

inline bool all_finite(std::span<const Complex> v) {
  return std::all_of(v.begin(), v.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline double squared_norm(std::span<const Complex> v) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::norm(z);
  return acc;
}

inline double l2_norm(std::span<const Complex> v) { return std::sqrt(squared_norm(v)); }

inline double l1_norm(std::span<const Complex> v) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::abs(z);
  return acc;
}

/// Wraps an angle to (-pi, pi].
inline double wrap_phase(double angle) {
  constexpr double pi = 3.14159265358979323846;
  double w = std::remainder(angle, 2.0 * pi);
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

/// Angle of a complex sample in (-pi, pi].
inline double phase_of(const Complex& z) {
  constexpr double pi = 3.14159265358979323846;
  double a = std::arg(z);
  return a <= -pi ? pi : a;
}

inline RealImage phase(const ComplexImage& img) {
  RealImage out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = phase_of(img[i]);
  return out;
}

inline RealImage amplitude(const ComplexImage& img) {
  RealImage out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = std::abs(img[i]);
  return out;
}

/// Unit-amplitude complex image exp(j*phase).
inline ComplexImage phasor(const RealImage& phase_map) {
  ComplexImage out(phase_map.rows(), phase_map.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(1.0, phase_map[i]);
  return out;
}

/// The M learned filters {d_m}, each filter_size x filter_size.
class FilterBank {
 public:
  FilterBank() = default;
  FilterBank(std::size_t num_filters, std::size_t filter_size)
      : filter_size_(filter_size),
        filters_(num_filters, ComplexImage(filter_size, filter_size)) {
    validate();
  }
  explicit FilterBank(std::vector<ComplexImage> filters) : filters_(std::move(filters)) {
    filter_size_ = filters_.empty() ? 0 : filters_.front().rows();
    validate();
  }

  std::size_t num_filters() const noexcept { return filters_.size(); }
  std::size_t filter_size() const noexcept { return filter_size_; }

  ComplexImage& operator[](std::size_t m) noexcept { return filters_[m]; }
  const ComplexImage& operator[](std::size_t m) const noexcept { return filters_[m]; }
  const std::vector<ComplexImage>& filters() const noexcept { return filters_; }

  /// Largest deviation of any filter's l2 norm from 1.
  double max_norm_deviation() const {
    double worst = 0.0;
    for (const auto& f : filters_) worst = std::max(worst, std::abs(l2_norm(f.span()) - 1.0));
    return worst;
  }

  friend bool operator==(const FilterBank&, const FilterBank&) = default;

 private:
  void validate() const {
    if (filters_.empty()) throw ConfigError("filter bank needs at least one filter");
    if (filter_size_ == 0) throw ConfigError("filter size must be positive");
    for (const auto& f : filters_) {
      if (f.rows() != filter_size_ || f.cols() != filter_size_) {
        throw DimensionError("every filter must be " + shape_string(filter_size_, filter_size_));
      }
    }
  }

  std::size_t filter_size_ = 0;
  std::vector<ComplexImage> filters_;
};

/// M coefficient maps {x_m}, all of one spatial size.
struct CoefficientStack {
  std::vector<ComplexImage> maps;

  CoefficientStack() = default;
  CoefficientStack(std::size_t num_maps, std::size_t rows, std::size_t cols)
      : maps(num_maps, ComplexImage(rows, cols)) {}
  explicit CoefficientStack(std::vector<ComplexImage> m) : maps(std::move(m)) {
    for (const auto& x : maps) require_same_shape(x, maps.front(), "coefficient stack");
  }

  std::size_t num_maps() const noexcept { return maps.size(); }
  std::size_t rows() const noexcept { return maps.empty() ? 0 : maps.front().rows(); }
  std::size_t cols() const noexcept { return maps.empty() ? 0 : maps.front().cols(); }

  double squared_norm() const {
    double acc = 0.0;
    for (const auto& x : maps) acc += ccsc::squared_norm(x.span());
    return acc;
  }
  double l1_norm() const {
    double acc = 0.0;
    for (const auto& x : maps) acc += ccsc::l1_norm(x.span());
    return acc;
  }

  friend bool operator==(const CoefficientStack&, const CoefficientStack&) = default;
};

inline double max_abs_difference(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_difference: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline double max_abs_difference(const CoefficientStack& a, const CoefficientStack& b) {
  if (a.num_maps() != b.num_maps()) throw DimensionError("max_abs_difference: map count mismatch");
  double worst = 0.0;
  for (std::size_t m = 0; m < a.num_maps(); ++m) {
    worst = std::max(worst, max_abs_difference(a.maps[m].span(), b.maps[m].span()));
  }
  return worst;
}

}  // namespace ccsc
