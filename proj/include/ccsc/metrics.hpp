#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "ccsc/error.hpp"
#include "ccsc/image.hpp"

namespace ccsc {

/// Per-pixel angle(conj(truth) * estimate), wrapped to (-pi, pi].
inline RealImage residual_phase(const ComplexImage& truth, const ComplexImage& estimate) {
  require_same_shape(truth, estimate, "residual_phase");
  RealImage out(truth.rows(), truth.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = phase_of(std::conj(truth[i]) * estimate[i]);
  return out;
}

/// 10 log10(4 N pi^2 / ||residual phase||^2) in dB; +infinity when the
/// residual vanishes.
inline double psnr(const ComplexImage& truth, const ComplexImage& estimate) {
  const RealImage res = residual_phase(truth, estimate);
  double energy = 0.0;
  for (double v : res.span()) energy += v * v;
  if (energy == 0.0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(res.size());
  return 10.0 * std::log10(4.0 * n * std::numbers::pi * std::numbers::pi / energy);
}

/// Value stored at border pixels of a colinearity map, where the window does
/// not fit.
inline constexpr double kInvalidColinearity = -1.0;

/// Local phase-consistency score over a window x window neighbourhood
/// (center excluded):
///   C_i = |sum_p exp(j(phi_i - phi_p))| / (W^2 - 1)
///         * sum_p |exp(j(phi_i - phi_p))| / (W^2 - 1)
/// Pixels closer than window/2 to the border hold kInvalidColinearity.
inline RealImage colinearity_map(const RealImage& phase_map, std::size_t window = 7) {
  if (window < 3 || window % 2 == 0) throw ConfigError("colinearity window must be odd and >= 3");
  if (phase_map.rows() <= window || phase_map.cols() <= window) {
    throw DimensionError("colinearity: image must be larger than the window");
  }
  const std::size_t half = window / 2;
  const double terms = static_cast<double>(window * window - 1);
  RealImage out(phase_map.rows(), phase_map.cols(), kInvalidColinearity);
  for (std::size_t r = half; r + half < phase_map.rows(); ++r) {
    for (std::size_t c = half; c + half < phase_map.cols(); ++c) {
      const double center = phase_map(r, c);
      Complex coherent_sum{0.0, 0.0};
      double magnitude_sum = 0.0;
      for (std::size_t pr = r - half; pr <= r + half; ++pr) {
        for (std::size_t pc = c - half; pc <= c + half; ++pc) {
          if (pr == r && pc == c) continue;
          const Complex e = std::polar(1.0, center - phase_map(pr, pc));
          coherent_sum += e;
          magnitude_sum += std::abs(e);
        }
      }
      const double second = magnitude_sum / terms;
      // unit phasors: the second factor is 1 up to rounding
      assert(std::abs(second - 1.0) < 1e-12);
      out(r, c) = std::abs(coherent_sum) / terms * second;
    }
  }
  return out;
}

/// Density histogram over [0, 1] of the valid entries of a colinearity map;
/// sum(density) * bin_width == 1.
struct Histogram {
  std::vector<double> density;
  double bin_width = 0.0;
  std::size_t samples = 0;
};

inline Histogram colinearity_histogram(const RealImage& colinearity, std::size_t bins = 50) {
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  Histogram h{std::vector<double>(bins, 0.0), 1.0 / static_cast<double>(bins), 0};
  for (double v : colinearity.span()) {
    if (v == kInvalidColinearity) continue;
    const double clamped = std::min(std::max(v, 0.0), 1.0);
    const auto b = std::min(bins - 1, static_cast<std::size_t>(clamped * static_cast<double>(bins)));
    h.density[b] += 1.0;
    ++h.samples;
  }
  if (h.samples > 0) {
    const double scale = 1.0 / (static_cast<double>(h.samples) * h.bin_width);
    for (auto& d : h.density) d *= scale;
  }
  return h;
}

struct MetricReport {
  double psnr_db = 0.0;
  Histogram colinearity_histogram;
  RealImage colinearity;
  RealImage residual_phase;
};

inline MetricReport evaluate(const ComplexImage& truth, const ComplexImage& estimate,
                             std::size_t window = 7, std::size_t bins = 50) {
  MetricReport report;
  report.psnr_db = psnr(truth, estimate);
  report.residual_phase = residual_phase(truth, estimate);
  report.colinearity = colinearity_map(phase(estimate), window);
  report.colinearity_histogram = colinearity_histogram(report.colinearity, bins);
  return report;
}

}  // namespace ccsc
