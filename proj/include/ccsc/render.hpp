#pragma once

// Interferogram display: hue follows phase (cyclic, so -pi and pi meet),
// full saturation, value follows log-amplitude normalized to [0, 1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "ccsc/image.hpp"

namespace ccsc {

struct Rgb8Image {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major RGB triplets
};

inline void hsv_to_rgb(double h, double s, double v, std::uint8_t* rgb) {
  h = h - std::floor(h);
  const double sector = h * 6.0;
  const int i = static_cast<int>(sector) % 6;
  const double f = sector - std::floor(sector);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r = 0, g = 0, b = 0;
  switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  auto to8 = [](double x) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
  };
  rgb[0] = to8(r);
  rgb[1] = to8(g);
  rgb[2] = to8(b);
}

inline Rgb8Image render_phase(const ComplexImage& img) {
  Rgb8Image out{img.rows(), img.cols(), std::vector<std::uint8_t>(3 * img.size())};
  std::vector<double> loga(img.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < img.size(); ++i) {
    loga[i] = std::log(std::abs(img[i]) + 1e-12);
    lo = std::min(lo, loga[i]);
    hi = std::max(hi, loga[i]);
  }
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double hue = (phase_of(img[i]) + std::numbers::pi) / (2.0 * std::numbers::pi);
    const double value = hi > lo ? (loga[i] - lo) / (hi - lo) : 1.0;
    hsv_to_rgb(hue, 1.0, value, &out.pixels[3 * i]);
  }
  return out;
}

}  // namespace ccsc
