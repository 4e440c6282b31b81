#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "ccsc/error.hpp"
#include "ccsc/image.hpp"

namespace ccsc {

/// Proximal map of gamma*|y| at a: keeps the phase of a, shrinks its
/// amplitude by gamma, and sends anything inside the gamma-disc to 0.
inline Complex complex_soft_threshold(Complex a, double gamma) noexcept {
  const double mag = std::abs(a);
  if (mag <= gamma || mag == 0.0) return {0.0, 0.0};
  return a * ((mag - gamma) / mag);
}

inline void complex_soft_threshold_inplace(std::span<Complex> values, double gamma) {
  if (!(gamma >= 0.0)) throw ConfigError("soft threshold requires gamma >= 0");
  for (auto& z : values) z = complex_soft_threshold(z, gamma);
}

inline ComplexImage complex_soft_threshold(ComplexImage a, double gamma) {
  complex_soft_threshold_inplace(a.span(), gamma);
  return a;
}

struct Projection {
  ComplexImage value;
  /// Set when the support block had zero norm and the canonical impulse
  /// was substituted.
  bool degenerate = false;
};

/// Projection onto the set of filters supported on the top-left
/// support_size x support_size block with unit l2 norm.
inline Projection project_to_constraint_set(const ComplexImage& d_padded,
                                            std::size_t support_size) {
  if (support_size == 0 || support_size > d_padded.rows() || support_size > d_padded.cols()) {
    throw ConfigError("support size " + std::to_string(support_size) +
                      " does not fit a " + shape_string(d_padded.rows(), d_padded.cols()) +
                      " grid");
  }
  Projection out{ComplexImage(d_padded.rows(), d_padded.cols()), false};
  double energy = 0.0;
  for (std::size_t r = 0; r < support_size; ++r) {
    for (std::size_t c = 0; c < support_size; ++c) energy += std::norm(d_padded(r, c));
  }
  if (energy == 0.0) {
    out.value(0, 0) = 1.0;
    out.degenerate = true;
    return out;
  }
  const double inv = 1.0 / std::sqrt(energy);
  for (std::size_t r = 0; r < support_size; ++r) {
    for (std::size_t c = 0; c < support_size; ++c) out.value(r, c) = d_padded(r, c) * inv;
  }
  return out;
}

}  // namespace ccsc
