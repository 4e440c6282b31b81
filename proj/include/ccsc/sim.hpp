#pragma once

// Synthetic interferograms from the correlated circular-Gaussian scatterer
// model, a small library of ground-truth phase patterns, the boxcar baseline
// and the step-function Monte-Carlo harness.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccsc/error.hpp"
#include "ccsc/fft.hpp"
#include "ccsc/image.hpp"
#include "ccsc/parallel.hpp"

namespace ccsc {

/// Ground truth driving the noise model: phase in (-pi, pi], amplitude > 0,
/// coherence in [0, 1].
struct SyntheticScene {
  RealImage true_phase;
  RealImage amplitude;
  RealImage coherence;

  std::size_t rows() const noexcept { return true_phase.rows(); }
  std::size_t cols() const noexcept { return true_phase.cols(); }

  void validate() const {
    require_same_shape(true_phase, amplitude, "scene amplitude");
    require_same_shape(true_phase, coherence, "scene coherence");
    for (std::size_t i = 0; i < true_phase.size(); ++i) {
      if (!(amplitude[i] > 0.0)) throw ConfigError("scene amplitude must be > 0");
      if (!(coherence[i] >= 0.0 && coherence[i] <= 1.0)) {
        throw ConfigError("scene coherence must lie in [0, 1]");
      }
      if (!std::isfinite(true_phase[i])) throw ConfigError("scene phase must be finite");
    }
  }

  /// Noise-free interferogram a^2 exp(j phi).
  ComplexImage clean() const {
    ComplexImage out(rows(), cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = std::polar(amplitude[i] * amplitude[i], true_phase[i]);
    }
    return out;
  }
};

enum class PatternKind { step, ramp, peaks, shear_plane, squares, mountain_like };

inline PatternKind parse_pattern_kind(std::string_view name) {
  if (name == "step") return PatternKind::step;
  if (name == "ramp") return PatternKind::ramp;
  if (name == "peaks") return PatternKind::peaks;
  if (name == "shear_plane" || name == "shear-plane") return PatternKind::shear_plane;
  if (name == "squares") return PatternKind::squares;
  if (name == "mountain_like" || name == "mountain-like" || name == "mountain") {
    return PatternKind::mountain_like;
  }
  throw ConfigError("unknown pattern kind '" + std::string(name) + "'");
}

inline std::string_view pattern_name(PatternKind kind) {
  switch (kind) {
    case PatternKind::step: return "step";
    case PatternKind::ramp: return "ramp";
    case PatternKind::peaks: return "peaks";
    case PatternKind::shear_plane: return "shear_plane";
    case PatternKind::squares: return "squares";
    case PatternKind::mountain_like: return "mountain_like";
  }
  return "unknown";
}

/// Gaussian bump for the peaks pattern; positions and width are fractions of
/// the image side, height in radians.
struct Bump {
  double row = 0.5;
  double col = 0.5;
  double width = 0.15;
  double height = 6.0;
};

/// Coherence either constant (left == right) or a linear ramp from the
/// leftmost column to the rightmost one.
struct CoherenceSpec {
  double left = 1.0;
  double right = 1.0;
};

struct PatternSpec {
  PatternKind kind = PatternKind::step;
  std::size_t rows = 256;
  std::size_t cols = 256;

  // step: left half at step_low, right half at step_high
  double step_low = -std::numbers::pi / 3.0;
  double step_high = std::numbers::pi / 3.0;
  // ramp: number of 2*pi cycles across the image along each axis
  double ramp_cycles_x = 3.0;
  double ramp_cycles_y = 1.0;
  // peaks: unwrapped phase is the sum of the bumps
  std::vector<Bump> bumps = {{0.35, 0.3, 0.12, 9.0}, {0.6, 0.7, 0.15, -7.0},
                             {0.75, 0.35, 0.08, 4.0}};
  // shear_plane: flat left part, then a linear ramp of shear_slope rad/pixel
  double shear_split = 0.5;
  double shear_slope = 0.35;
  // squares: blocks x blocks cells, each holding `nesting` nested squares
  // whose levels step by level_step radians
  std::size_t blocks = 2;
  std::size_t nesting = 3;
  double level_step = 1.5;
  // mountain_like: peak-to-peak-ish unwrapped amplitude of the smoothed field
  double mountain_amplitude = 14.0;
  double mountain_scale = 0.12;  ///< coarsest smoothing length, fraction of side
  std::uint64_t seed = 0;

  CoherenceSpec coherence;
};

namespace detail {

/// Smoothed zero-mean unit-variance random field (circular Gaussian blur of
/// white noise, sum of three octaves).
inline RealImage smooth_field(std::size_t rows, std::size_t cols, double scale,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RealImage out(rows, cols);
  const double side = static_cast<double>(std::min(rows, cols));
  for (int octave = 0; octave < 3; ++octave) {
    ComplexImage noise(rows, cols);
    for (auto& z : noise.span()) z = normal(rng);
    fft::forward_inplace(noise.span(), rows, cols);
    const double s = scale * side / std::pow(2.0, octave);
    for (std::size_t r = 0; r < rows; ++r) {
      const double fr = static_cast<double>(r <= rows / 2 ? r : rows - r) / static_cast<double>(rows);
      for (std::size_t c = 0; c < cols; ++c) {
        const double fc =
            static_cast<double>(c <= cols / 2 ? c : cols - c) / static_cast<double>(cols);
        const double w2 = 4.0 * std::numbers::pi * std::numbers::pi * (fr * fr + fc * fc);
        noise(r, c) *= std::exp(-0.5 * s * s * w2);
      }
    }
    fft::inverse_inplace(noise.span(), rows, cols);
    const double weight = std::pow(0.5, octave);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weight * noise[i].real();
  }
  double mean = 0.0;
  for (double v : out.span()) mean += v;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double v : out.span()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  for (auto& v : out.span()) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return out;
}

}  // namespace detail

/// Unwrapped ground-truth phase for a pattern (before wrapping).
inline RealImage pattern_unwrapped_phase(const PatternSpec& spec) {
  const std::size_t rows = spec.rows;
  const std::size_t cols = spec.cols;
  if (rows == 0 || cols == 0) throw ConfigError("pattern size must be positive");
  RealImage phi(rows, cols);
  const double two_pi = 2.0 * std::numbers::pi;
  switch (spec.kind) {
    case PatternKind::step:
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) phi(r, c) = c < cols / 2 ? spec.step_low : spec.step_high;
      }
      break;
    case PatternKind::ramp:
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          phi(r, c) = two_pi * (spec.ramp_cycles_x * static_cast<double>(c) / static_cast<double>(cols) +
                                spec.ramp_cycles_y * static_cast<double>(r) / static_cast<double>(rows));
        }
      }
      break;
    case PatternKind::peaks:
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double y = static_cast<double>(r) / static_cast<double>(rows);
          const double x = static_cast<double>(c) / static_cast<double>(cols);
          double v = 0.0;
          for (const auto& b : spec.bumps) {
            const double dr = y - b.row;
            const double dc = x - b.col;
            v += b.height * std::exp(-(dr * dr + dc * dc) / (2.0 * b.width * b.width));
          }
          phi(r, c) = v;
        }
      }
      break;
    case PatternKind::shear_plane: {
      const double split = spec.shear_split * static_cast<double>(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double x = static_cast<double>(c);
          phi(r, c) = x < split ? 0.0 : spec.shear_slope * (x - split);
        }
      }
      break;
    }
    case PatternKind::squares: {
      if (spec.blocks == 0 || spec.nesting == 0) throw ConfigError("squares needs blocks, nesting >= 1");
      const std::size_t cell_h = rows / spec.blocks;
      const std::size_t cell_w = cols / spec.blocks;
      if (cell_h < 2 * spec.nesting + 1 || cell_w < 2 * spec.nesting + 1) {
        throw ConfigError("squares: image too small for requested blocks/nesting");
      }
      const std::size_t margin_step = std::min(cell_h, cell_w) / (2 * (spec.nesting + 1));
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t br = std::min(r / cell_h, spec.blocks - 1);
          const std::size_t bc = std::min(c / cell_w, spec.blocks - 1);
          const std::size_t lr = r - br * cell_h;
          const std::size_t lc = c - bc * cell_w;
          const std::size_t h = br + 1 == spec.blocks ? rows - br * cell_h : cell_h;
          const std::size_t w = bc + 1 == spec.blocks ? cols - bc * cell_w : cell_w;
          // depth of nesting: how many concentric squares contain this pixel
          const std::size_t edge = std::min({lr, lc, h - 1 - lr, w - 1 - lc});
          const std::size_t depth = std::min(spec.nesting, edge / std::max<std::size_t>(margin_step, 1));
          const double sign = ((br + bc) % 2 == 0) ? 1.0 : -1.0;
          phi(r, c) = sign * spec.level_step * static_cast<double>(depth);
        }
      }
      break;
    }
    case PatternKind::mountain_like: {
      const RealImage field = detail::smooth_field(rows, cols, spec.mountain_scale, spec.seed);
      for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = 0.5 * spec.mountain_amplitude * field[i];
      break;
    }
  }
  return phi;
}

inline RealImage coherence_map(std::size_t rows, std::size_t cols, const CoherenceSpec& spec) {
  if (!(spec.left >= 0.0 && spec.left <= 1.0 && spec.right >= 0.0 && spec.right <= 1.0)) {
    throw ConfigError("coherence must lie in [0, 1]");
  }
  RealImage g(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const double t = cols > 1 ? static_cast<double>(c) / static_cast<double>(cols - 1) : 0.0;
    const double v = c + 1 == cols ? spec.right : spec.left + (spec.right - spec.left) * t;
    for (std::size_t r = 0; r < rows; ++r) g(r, c) = v;
  }
  return g;
}

/// Wrapped pattern phase, unit amplitude, and the requested coherence.
inline SyntheticScene make_pattern(const PatternSpec& spec) {
  RealImage phi = pattern_unwrapped_phase(spec);
  for (auto& v : phi.span()) v = wrap_phase(v);
  SyntheticScene scene{std::move(phi), RealImage(spec.rows, spec.cols, 1.0),
                       coherence_map(spec.rows, spec.cols, spec.coherence)};
  scene.validate();
  return scene;
}

/// Clean unit-amplitude interferograms cycling through every pattern kind
/// with seeded parameter variations, for dictionary learning.
inline std::vector<ComplexImage> make_training_set(std::size_t rows, std::size_t cols,
                                                   std::size_t count, std::uint64_t seed) {
  constexpr PatternKind order[] = {PatternKind::ramp,          PatternKind::peaks,
                                   PatternKind::shear_plane,   PatternKind::squares,
                                   PatternKind::mountain_like, PatternKind::step};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ComplexImage> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    PatternSpec spec;
    spec.kind = order[k % std::size(order)];
    spec.rows = rows;
    spec.cols = cols;
    spec.seed = rng();
    spec.ramp_cycles_x = -3.0 + 6.0 * unit(rng);
    spec.ramp_cycles_y = -3.0 + 6.0 * unit(rng);
    for (auto& b : spec.bumps) {
      b.row = 0.2 + 0.6 * unit(rng);
      b.col = 0.2 + 0.6 * unit(rng);
    }
    spec.shear_split = 0.3 + 0.4 * unit(rng);
    spec.shear_slope = 0.2 + 0.3 * unit(rng);
    spec.level_step = 1.2 + 0.8 * unit(rng);
    const double step = 0.5 + 1.5 * unit(rng);
    spec.step_low = -step;
    spec.step_high = step;
    out.push_back(make_pattern(spec).clean());
  }
  return out;
}

/// The two correlated single-look acquisitions (u1, u2) of every pixel:
/// u1 = a r1, u2 = a (gamma e^{-j phi} r1 + sqrt(1 - gamma^2) r2) with r1, r2
/// independent unit-variance circular complex Gaussians.
inline std::pair<ComplexImage, ComplexImage> simulate_acquisitions(const SyntheticScene& scene,
                                                                   std::uint64_t seed) {
  scene.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexImage u1(scene.rows(), scene.cols());
  ComplexImage u2(scene.rows(), scene.cols());
  for (std::size_t i = 0; i < u1.size(); ++i) {
    const double re1 = normal(rng);
    const double im1 = normal(rng);
    const double re2 = normal(rng);
    const double im2 = normal(rng);
    const Complex r1{re1, im1};
    const Complex r2{re2, im2};
    const double a = scene.amplitude[i];
    const double g = scene.coherence[i];
    u1[i] = a * r1;
    u2[i] = a * (g * std::polar(1.0, -scene.true_phase[i]) * r1 + std::sqrt(1.0 - g * g) * r2);
  }
  return {std::move(u1), std::move(u2)};
}

/// Interferogram s = u1 conj(u2), deterministic given the seed.
inline ComplexImage simulate_interferogram(const SyntheticScene& scene, std::uint64_t seed) {
  auto [u1, u2] = simulate_acquisitions(scene, seed);
  for (std::size_t i = 0; i < u1.size(); ++i) u1[i] *= std::conj(u2[i]);
  return std::move(u1);
}

/// Complex mean over a centered window x window neighbourhood, circular
/// boundary. Separable: a row pass followed by a column pass.
inline ComplexImage boxcar_filter(const ComplexImage& image, std::size_t window) {
  if (window == 0 || window % 2 == 0) throw ConfigError("boxcar window must be odd and positive");
  if (window > image.rows() || window > image.cols()) {
    throw DimensionError("boxcar window larger than image");
  }
  const std::size_t rows = image.rows();
  const std::size_t cols = image.cols();
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window / 2);
  auto wrap = [](std::ptrdiff_t i, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
  };
  ComplexImage tmp(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      Complex acc{0.0, 0.0};
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        acc += image(r, wrap(static_cast<std::ptrdiff_t>(c) + k, cols));
      }
      tmp(r, c) = acc;
    }
  }
  ComplexImage out(rows, cols);
  const double scale = 1.0 / static_cast<double>(window * window);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      Complex acc{0.0, 0.0};
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        acc += tmp(wrap(static_cast<std::ptrdiff_t>(r) + k, rows), c);
      }
      out(r, c) = acc * scale;
    }
  }
  return out;
}

using ImageFilter = std::function<ComplexImage(const ComplexImage&)>;

struct NamedFilter {
  std::string name;
  ImageFilter filter;
};

struct StepExperimentConfig {
  std::size_t trials = 200;
  double coherence = 0.3;
  std::size_t rows = 16;     ///< the 1-D profile is replicated over this many rows
  std::size_t length = 256;  ///< profile length (image columns)
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Per-column circular statistics of one method's filtered phase.
struct StepProfile {
  std::string name;
  std::vector<double> mean;
  std::vector<double> std;
};

/// Circular mean angle and circular standard deviation sqrt(-2 ln R).
inline std::pair<double, double> circular_stats(std::span<const double> angles) {
  if (angles.empty()) return {0.0, 0.0};
  Complex sum{0.0, 0.0};
  for (double a : angles) sum += std::polar(1.0, a);
  const double mean = phase_of(sum);
  // R = mean cos(a - mean) equals |sum|/n and is exactly 1 for identical angles.
  double r = 0.0;
  for (double a : angles) r += std::cos(a - mean);
  r /= static_cast<double>(angles.size());
  if (r >= 1.0) return {mean, 0.0};
  r = std::max(r, 1e-300);
  return {mean, std::sqrt(-2.0 * std::log(r))};
}

/// The step scene used by the Monte-Carlo study: left half -pi/3, right half
/// +pi/3, unit amplitude, constant coherence.
inline SyntheticScene step_scene(std::size_t rows, std::size_t length, double coherence) {
  PatternSpec spec;
  spec.kind = PatternKind::step;
  spec.rows = rows;
  spec.cols = length;
  spec.coherence = {coherence, coherence};
  return make_pattern(spec);
}

/// Runs every method on `trials` independently simulated step
/// interferograms. Trial t draws its noise from seed_seq{seed, t}, so the
/// result does not depend on the thread schedule.
inline std::vector<StepProfile> mc_step_experiment(const StepExperimentConfig& config,
                                                   std::span<const NamedFilter> methods) {
  if (config.trials < 1) throw ConfigError("need at least one trial");
  const SyntheticScene scene = step_scene(config.rows, config.length, config.coherence);
  const std::size_t per_trial = config.rows * config.length;
  std::vector<std::vector<double>> phases(methods.size(),
                                          std::vector<double>(config.trials * per_trial));
  parallel_for(config.trials, config.threads, [&](std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::uint64_t trial_seed = 0;
    std::vector<std::uint32_t> words(2);
    seq.generate(words.begin(), words.end());
    trial_seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    const ComplexImage noisy = simulate_interferogram(scene, trial_seed);
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const ComplexImage filtered = methods[k].filter(noisy);
      require_same_shape(filtered, noisy, "mc_step_experiment filter output");
      // stored column-major per trial so each column's samples are contiguous
      double* dst = phases[k].data();
      for (std::size_t r = 0; r < config.rows; ++r) {
        for (std::size_t c = 0; c < config.length; ++c) {
          dst[(c * config.trials + t) * config.rows + r] = phase_of(filtered(r, c));
        }
      }
    }
  });
  std::vector<StepProfile> out;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    StepProfile p{methods[k].name, std::vector<double>(config.length),
                  std::vector<double>(config.length)};
    const std::size_t per_col = config.trials * config.rows;
    for (std::size_t c = 0; c < config.length; ++c) {
      auto [m, s] = circular_stats(std::span<const double>(phases[k]).subspan(c * per_col, per_col));
      p.mean[c] = m;
      p.std[c] = s;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ccsc
