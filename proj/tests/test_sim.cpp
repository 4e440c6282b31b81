#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace ccsc;
using namespace ccsc::test;

namespace {

constexpr double kThird = std::numbers::pi / 3.0;

SyntheticScene constant_scene(std::size_t rows, std::size_t cols, double phase, double amp,
                              double coherence) {
  return {RealImage(rows, cols, phase), RealImage(rows, cols, amp), RealImage(rows, cols, coherence)};
}

struct Moments {
  double p1 = 0.0;
  double p2 = 0.0;
  Complex cross{0.0, 0.0};
};

Moments moments(const ComplexImage& u1, const ComplexImage& u2) {
  Moments m;
  for (std::size_t i = 0; i < u1.size(); ++i) {
    m.p1 += std::norm(u1[i]);
    m.p2 += std::norm(u2[i]);
    m.cross += u1[i] * std::conj(u2[i]);
  }
  const double n = static_cast<double>(u1.size());
  m.p1 /= n;
  m.p2 /= n;
  m.cross /= n;
  return m;
}

}  // namespace

TEST(Simulate, FullCoherenceKeepsPhaseExactly) {
  for (PatternKind kind : {PatternKind::step, PatternKind::peaks, PatternKind::squares}) {
    PatternSpec spec;
    spec.kind = kind;
    spec.rows = 40;
    spec.cols = 50;
    const SyntheticScene scene = make_pattern(spec);
    const ComplexImage s = simulate_interferogram(scene, 17);
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_NEAR(wrap_phase(phase_of(s[i]) - scene.true_phase[i]), 0.0, 1e-12);
    }
  }
}

TEST(Simulate, ZeroCoherenceDecorrelates) {
  const auto [u1, u2] = simulate_acquisitions(constant_scene(250, 400, 0.8, 1.0, 0.0), 3);
  const Moments m = moments(u1, u2);
  EXPECT_LT(std::abs(m.cross) / std::sqrt(m.p1 * m.p2), 0.02);
}

TEST(Simulate, SampleCoherenceAndPhase) {
  const auto [u1, u2] = simulate_acquisitions(constant_scene(250, 400, 0.5, 1.0, 0.7), 4);
  const Moments m = moments(u1, u2);
  EXPECT_NEAR(std::abs(m.cross) / (0.5 * (m.p1 + m.p2)), 0.7, 0.02);
  EXPECT_NEAR(std::arg(m.cross), 0.5, 0.02);
}

TEST(Simulate, CovarianceEntrywise) {
  const double a = 1.5;
  const double g = 0.6;
  const double phi = 1.0;
  const auto [u1, u2] = simulate_acquisitions(constant_scene(250, 400, phi, a, g), 5);
  const Moments m = moments(u1, u2);
  const Complex expected_cross = a * a * g * std::polar(1.0, phi);
  EXPECT_NEAR(m.p1, a * a, 0.03 * a * a);
  EXPECT_NEAR(m.p2, a * a, 0.03 * a * a);
  EXPECT_NEAR(m.cross.real(), expected_cross.real(), 0.03 * std::abs(expected_cross.real()));
  EXPECT_NEAR(m.cross.imag(), expected_cross.imag(), 0.03 * std::abs(expected_cross.imag()));
}

TEST(Simulate, DeterministicGivenSeed) {
  const SyntheticScene scene = step_scene(8, 32, 0.4);
  EXPECT_EQ(simulate_interferogram(scene, 9), simulate_interferogram(scene, 9));
  EXPECT_FALSE(simulate_interferogram(scene, 9) == simulate_interferogram(scene, 10));
}

TEST(Patterns, StepLevels) {
  const SyntheticScene scene = step_scene(4, 20, 0.3);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 20; ++c) {
      EXPECT_DOUBLE_EQ(scene.true_phase(r, c), c < 10 ? -kThird : kThird);
      EXPECT_DOUBLE_EQ(scene.coherence(r, c), 0.3);
      EXPECT_DOUBLE_EQ(scene.amplitude(r, c), 1.0);
    }
  }
}

TEST(Patterns, CoherenceRampIsLinear) {
  const RealImage g = coherence_map(5, 128, {0.3, 0.9});
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_DOUBLE_EQ(g(r, 0), 0.3);
    EXPECT_DOUBLE_EQ(g(r, 127), 0.9);
    for (std::size_t c = 1; c < 127; ++c) {
      EXPECT_NEAR(g(r, c) - g(r, c - 1), 0.6 / 127.0, 1e-14);
    }
  }
  EXPECT_THROW(coherence_map(2, 2, {0.3, 1.2}), ConfigError);
}

TEST(Patterns, SquaresHaveLargeJumps) {
  PatternSpec spec;
  spec.kind = PatternKind::squares;
  spec.rows = 128;
  spec.cols = 128;
  const RealImage phi = make_pattern(spec).true_phase;
  std::size_t jumps = 0;
  for (std::size_t r = 0; r < 128; ++r) {
    for (std::size_t c = 1; c < 128; ++c) {
      const double d = std::abs(wrap_phase(phi(r, c) - phi(r, c - 1)));
      if (d > 0.0) {
        EXPECT_GT(d, 1.0);
        ++jumps;
      }
    }
  }
  EXPECT_GT(jumps, 0u);
}

TEST(Patterns, EveryKindIsWrappedWithUnitAmplitude) {
  for (PatternKind kind : {PatternKind::step, PatternKind::ramp, PatternKind::peaks,
                           PatternKind::shear_plane, PatternKind::squares, PatternKind::mountain_like}) {
    PatternSpec spec;
    spec.kind = kind;
    spec.rows = 64;
    spec.cols = 48;
    const SyntheticScene scene = make_pattern(spec);
    for (double v : scene.true_phase.span()) {
      EXPECT_GT(v, -std::numbers::pi);
      EXPECT_LE(v, std::numbers::pi);
    }
    for (double a : scene.amplitude.span()) EXPECT_EQ(a, 1.0);
    EXPECT_EQ(parse_pattern_kind(pattern_name(kind)), kind);
  }
  EXPECT_THROW(parse_pattern_kind("spiral"), ConfigError);
}

TEST(Patterns, TrainingSetIsSeededAndVaried) {
  const auto a = make_training_set(32, 24, 7, 3);
  const auto b = make_training_set(32, 24, 7, 3);
  ASSERT_EQ(a.size(), 7u);
  EXPECT_EQ(a, b);
  for (const auto& img : a) {
    EXPECT_EQ(img.rows(), 32u);
    EXPECT_EQ(img.cols(), 24u);
    for (const auto& z : img.span()) EXPECT_NEAR(std::abs(z), 1.0, 1e-12);
  }
  EXPECT_FALSE(a[0] == a[6]);
}

TEST(Boxcar, ConstantAndIdentity) {
  Rng rng(1);
  const ComplexImage flat(9, 11, Complex(0.4, -2.0));
  EXPECT_LT(max_abs_difference(boxcar_filter(flat, 5).span(), flat.span()), 1e-15);
  const ComplexImage img = random_image(9, 11, rng);
  EXPECT_EQ(boxcar_filter(img, 1), img);
  EXPECT_THROW(boxcar_filter(img, 4), ConfigError);
  EXPECT_THROW(boxcar_filter(img, 13), DimensionError);
}

TEST(Boxcar, MatchesNaiveWindowMean) {
  Rng rng(2);
  const ComplexImage img = random_image(16, 16, rng);
  const ComplexImage out = boxcar_filter(img, 5);
  for (std::size_t r = 0; r < 16; ++r) {
    for (std::size_t c = 0; c < 16; ++c) {
      Complex acc{0.0, 0.0};
      for (int dr = -2; dr <= 2; ++dr) {
        for (int dc = -2; dc <= 2; ++dc) {
          acc += img(wrap(static_cast<std::ptrdiff_t>(r) + dr, 16), wrap(static_cast<std::ptrdiff_t>(c) + dc, 16));
        }
      }
      EXPECT_NEAR(std::abs(out(r, c) - acc / 25.0), 0.0, 1e-12);
    }
  }
}

TEST(CircularStats, IdenticalAnglesHaveZeroSpread) {
  const std::vector<double> same(50, 1.1);
  const auto [mean, sd] = circular_stats(same);
  EXPECT_NEAR(mean, 1.1, 1e-15);
  EXPECT_EQ(sd, 0.0);
  const std::vector<double> pair{0.0, 0.2};
  const auto [m2, s2] = circular_stats(pair);
  EXPECT_NEAR(m2, 0.1, 1e-15);
  EXPECT_NEAR(s2, std::sqrt(-2.0 * std::log(std::cos(0.1))), 1e-12);
}

TEST(MonteCarlo, IdentityAtFullCoherenceReproducesStep) {
  StepExperimentConfig c;
  c.trials = 5;
  c.coherence = 1.0;
  c.rows = 4;
  c.length = 32;
  const std::vector<NamedFilter> methods{{"identity", [](const ComplexImage& s) { return s; }}};
  const auto profiles = mc_step_experiment(c, methods);
  ASSERT_EQ(profiles.size(), 1u);
  for (std::size_t col = 0; col < 32; ++col) {
    EXPECT_NEAR(profiles[0].mean[col], col < 16 ? -kThird : kThird, 1e-12);
    EXPECT_EQ(profiles[0].std[col], 0.0);
  }
}

TEST(MonteCarlo, BoxcarPlateausAndSmear) {
  StepExperimentConfig c;
  c.trials = 200;
  c.coherence = 0.3;
  c.seed = 8;
  const std::vector<NamedFilter> methods{
      {"identity", [](const ComplexImage& s) { return s; }},
      {"boxcar", [](const ComplexImage& s) { return boxcar_filter(s, 5); }}};
  const auto profiles = mc_step_experiment(c, methods);
  const StepProfile& box = profiles[1];
  for (std::size_t col = 0; col < c.length; ++col) {
    EXPECT_GE(box.std[col], 0.0);
    EXPECT_GE(profiles[0].std[col], 0.0);
    const std::size_t to_center = col > 128 ? col - 128 : 128 - col;
    const std::size_t to_edge = std::min(col, c.length - col);
    if (std::min(to_center, to_edge) > 10) {
      EXPECT_NEAR(box.mean[col], col < 128 ? -kThird : kThird, 0.2) << "column " << col;
      EXPECT_LT(box.std[col], profiles[0].std[col]);
    }
  }
  auto on_left = [&](std::size_t col) { return std::abs(box.mean[col] + kThird) <= 0.2; };
  auto on_right = [&](std::size_t col) { return std::abs(box.mean[col] - kThird) <= 0.2; };
  std::size_t last_left = 128;
  while (last_left > 100 && !on_left(last_left)) --last_left;
  std::size_t first_right = 120;
  while (first_right < 160 && !on_right(first_right)) ++first_right;
  EXPECT_GE(first_right - last_left, 5u);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  StepExperimentConfig c;
  c.trials = 6;
  c.rows = 4;
  c.length = 32;
  c.seed = 3;
  const std::vector<NamedFilter> methods{{"boxcar", [](const ComplexImage& s) { return boxcar_filter(s, 3); }}};
  const auto a = mc_step_experiment(c, methods);
  c.threads = 3;
  const auto b = mc_step_experiment(c, methods);
  EXPECT_EQ(a[0].mean, b[0].mean);
  EXPECT_EQ(a[0].std, b[0].std);
}
