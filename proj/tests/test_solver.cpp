#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace ccsc;
using namespace ccsc::test;

namespace {

SolverConfig config(double lambda, double mu, double rho, int iters = 200, double tol = 1e-3) {
  SolverConfig c;
  c.lambda = lambda;
  c.mu = mu;
  c.rho = rho;
  c.max_iters = iters;
  c.tol = tol;
  return c;
}

ComplexImage smooth_phase_image(std::size_t n, std::uint64_t seed) {
  PatternSpec spec;
  spec.kind = PatternKind::mountain_like;
  spec.rows = n;
  spec.cols = n;
  spec.mountain_amplitude = 4.0;
  spec.seed = seed;
  return make_pattern(spec).clean();
}

}  // namespace

TEST(Encode, ZeroImageStopsAfterOneIteration) {
  Rng rng(1);
  const FilterBank bank = random_bank(3, 4, rng);
  const EncodeResult r = encode(ComplexImage(16, 16), bank, config(2.5, 5.0, 25.0));
  EXPECT_TRUE(r.trace.converged);
  EXPECT_EQ(r.trace.iterations(), 1);
  for (const auto& m : r.coefficients.maps) EXPECT_EQ(squared_norm(m.span()), 0.0);
  EXPECT_EQ(r.trace.records.back().objective, 0.0);
}

TEST(Encode, MuZeroGradientPathEqualsPlainPath) {
  Rng rng(2);
  const FilterBank bank = random_bank(4, 5, rng);
  const ComplexImage s = random_image(24, 20, rng);
  const SolverConfig c = config(0.7, 0.0, 3.0, 40, 1e-12);
  const EncodeResult plain = encode_comcsc(s, bank, c);
  const EncodeResult gr = encode_gr(s, bank, c, GradientFilters::forward_difference());
  const EncodeResult zero = encode_gr(s, bank, c, GradientFilters::zero());
  EXPECT_LE(max_abs_difference(plain.coefficients, gr.coefficients), 1e-12);
  EXPECT_LE(max_abs_difference(plain.coefficients, zero.coefficients), 1e-12);
  EXPECT_EQ(plain.trace.iterations(), gr.trace.iterations());
}

TEST(Encode, FinalObjectiveBelowZeroStack) {
  Rng rng(3);
  const FilterBank bank = random_bank(4, 6, rng);
  const ComplexImage s = smooth_phase_image(32, 4);
  const SolverConfig c = config(2.5, 0.0, 10.0, 200);
  const EncodeResult r = encode(s, bank, c);
  const double zero = 0.5 * squared_norm(s.span());
  EXPECT_NEAR(objective(s, bank, CoefficientStack(4, 32, 32), c), zero, 1e-9 * zero);
  EXPECT_LE(objective(s, bank, r.coefficients, c), zero);
  EXPECT_LE(r.trace.records.back().objective, zero);
}

TEST(Encode, OverRegularizedGivesZeroImage) {
  Rng rng(4);
  ComplexImage impulse(3, 3);
  impulse(0, 0) = 1.0;
  const FilterBank bank({impulse});
  const ComplexImage s = random_image(12, 12, rng);
  const ComplexImage out = denoise(s, bank, config(1e6, 0.0, 1e7));
  EXPECT_EQ(squared_norm(out.span()), 0.0);
}

TEST(Encode, UnregularizedFitReconstructs) {
  Rng rng(5);
  const FilterBank bank = random_bank(6, 4, rng);
  const ComplexImage s = smooth_phase_image(32, 9);
  const SolverConfig c = config(0.0, 0.0, SolverConfig::default_rho(0.0), 2000, 1e-6);
  const ComplexImage fit = denoise(s, bank, c);
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) err += std::norm(fit[i] - s[i]);
  EXPECT_LE(std::sqrt(err) / l2_norm(s.span()), 1e-3);
}

TEST(Encode, DenoisingRaisesPsnr) {
  PatternSpec spec;
  spec.kind = PatternKind::squares;
  spec.rows = 64;
  spec.cols = 64;
  spec.coherence = {0.5, 0.9};
  const SyntheticScene scene = make_pattern(spec);
  const ComplexImage noisy = simulate_interferogram(scene, 3);
  const TrainResult dict = ccdl_train(training_batch(32, 6, 2), [] {
    TrainConfig t;
    t.num_filters = 8;
    t.filter_size = 6;
    t.outer_iters = 30;
    return t;
  }());
  const ComplexImage restored = denoise(noisy, dict.bank, config(2.5, 5.0, 25.0));
  EXPECT_GT(psnr(scene.clean(), restored), psnr(scene.clean(), noisy));
}

TEST(Objective, ZeroStackAndPureDataFit) {
  Rng rng(6);
  const FilterBank bank = random_bank(2, 3, rng);
  const ComplexImage s = random_image(8, 9, rng);
  const CoefficientStack x = random_stack(2, 8, 9, rng);
  EXPECT_NEAR(objective(s, bank, CoefficientStack(2, 8, 9), config(1.0, 3.0, 1.0)),
              0.5 * squared_norm(s.span()), 1e-10);
  const ComplexImage fit = naive_convolve_sum(bank, x);
  double data = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) data += std::norm(fit[i] - s[i]);
  EXPECT_NEAR(objective(s, bank, x, config(0.0, 0.0, 1.0)), 0.5 * data, 1e-10 * data);
}

TEST(Objective, MatchesSpatialRecomputation) {
  Rng rng(7);
  const FilterBank bank = random_bank(3, 4, rng);
  const ComplexImage s = random_image(10, 12, rng);
  const CoefficientStack x = random_stack(3, 10, 12, rng, 0.5);
  GradientFilters g{{Complex(-1.0, 0.2), Complex(0.7, 0.0), Complex(0.3, -0.1)},
                    {Complex(-1.0, 0.0), Complex(1.0, 0.5)}};
  for (double mu : {0.0, 2.0, 5.0}) {
    const double ref = spatial_objective(s, bank, x, 1.3, mu, g);
    EXPECT_NEAR(objective(s, bank, x, config(1.3, mu, 1.0), g), ref, 1e-10 * ref);
  }
}

TEST(CoefficientUpdate, MatchesDenseNormalEquations) {
  Rng rng(8);
  const FilterBank bank = random_bank(2, 3, rng);
  const ComplexImage s = random_image(6, 7, rng);
  const CoefficientStack y = random_stack(2, 6, 7, rng);
  const CoefficientStack u = random_stack(2, 6, 7, rng, 0.3);
  const GradientFilters g = GradientFilters::forward_difference();
  const CoefficientStack x = coefficient_update(s, bank, config(1.0, 4.0, 2.5), g, y, u);
  const CoefficientStack ref = dense_coefficient_update(s, bank, 2.5, 4.0, g, y, u);
  EXPECT_LE(max_abs_difference(x, ref), 1e-10);
}

TEST(CoefficientUpdate, SatisfiesNormalEquationsInSpatialDomain) {
  // Plug-back: D^H (D x - s) + mu G^H G x + rho (x - (y - u)) = 0, applied
  // with spatial convolutions by the flipped-conjugate kernels.
  Rng rng(9);
  const FilterBank bank = random_bank(3, 4, rng);
  const ComplexImage s = random_image(12, 10, rng);
  const CoefficientStack y = random_stack(3, 12, 10, rng);
  const CoefficientStack u = random_stack(3, 12, 10, rng);
  const GradientFilters g = GradientFilters::forward_difference();
  const double rho = 7.0;
  const double mu = 3.0;
  const CoefficientStack x = coefficient_update(s, bank, config(0.5, mu, rho), g, y, u);
  const auto rows = s.rows();
  const auto cols = s.cols();
  auto adjoint = [&](const ComplexImage& k, const ComplexImage& v) {
    return to_stack(convolution_matrix(k, rows, cols).adjoint() * to_vector(v), 1, rows, cols).maps[0];
  };
  ComplexImage r = naive_convolve_sum(bank, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= s[i];
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t m = 0; m < 3; ++m) {
    const ComplexImage dr = adjoint(bank[m], r);
    const ComplexImage g0 = adjoint(row_gradient_kernel(g), naive_convolve(row_gradient_kernel(g), x.maps[m]));
    const ComplexImage g1 = adjoint(col_gradient_kernel(g), naive_convolve(col_gradient_kernel(g), x.maps[m]));
    for (std::size_t i = 0; i < dr.size(); ++i) {
      const Complex grad = dr[i] + mu * (g0[i] + g1[i]) + rho * (x.maps[m][i] - y.maps[m][i] + u.maps[m][i]);
      worst = std::max(worst, std::abs(grad));
      scale = std::max(scale, std::abs(rho * x.maps[m][i]));
    }
  }
  EXPECT_LE(worst, 1e-10 * scale);
}

TEST(Encode, DeterministicAcrossRuns) {
  Rng rng(10);
  const FilterBank bank = random_bank(4, 5, rng);
  const ComplexImage s = random_image(20, 20, rng);
  const EncodeResult a = encode(s, bank, config(2.5, 5.0, 25.0));
  const EncodeResult b = encode(s, bank, config(2.5, 5.0, 25.0));
  EXPECT_EQ(a.coefficients.maps, b.coefficients.maps);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    EXPECT_EQ(a.trace.records[i].objective, b.trace.records[i].objective);
  }
}

TEST(Encode, TraceStopsOnTolerance) {
  Rng rng(11);
  const FilterBank bank = random_bank(4, 5, rng);
  const ComplexImage s = smooth_phase_image(32, 2);
  const EncodeResult r = encode(s, bank, config(0.05, 5.0, 0.5, 500, 1e-3));
  ASSERT_TRUE(r.trace.converged);
  const AdmmRecord& last = r.trace.records.back();
  EXPECT_LT(std::max(last.primal_residual, last.dual_residual), 1e-3);
  for (std::size_t i = 0; i + 1 < r.trace.records.size(); ++i) {
    const AdmmRecord& rec = r.trace.records[i];
    EXPECT_GE(std::max(rec.primal_residual, rec.dual_residual), 1e-3);
    EXPECT_EQ(rec.iteration, static_cast<int>(i) + 1);
  }
}

TEST(Encode, AllZeroSolutionRunsToIterationCap) {
  // Every coefficient is thresholded away, so y stays 0 while x shrinks
  // geometrically: the relative primal residual is pinned at 1.
  Rng rng(11);
  const FilterBank bank = random_bank(4, 5, rng);
  const ComplexImage s = smooth_phase_image(32, 2);
  const EncodeResult r = encode(s, bank, config(2.5, 5.0, 25.0, 60, 1e-3));
  EXPECT_FALSE(r.trace.converged);
  EXPECT_EQ(r.trace.iterations(), 60);
  EXPECT_EQ(r.coefficients.l1_norm(), 0.0);
  EXPECT_DOUBLE_EQ(r.trace.records.back().primal_residual, 1.0);
}

TEST(Encode, RejectsBadInputs) {
  Rng rng(12);
  const FilterBank bank = random_bank(2, 8, rng);
  EXPECT_THROW(encode(random_image(6, 6, rng), bank, SolverConfig{}), DimensionError);
  SolverConfig c;
  c.rho = 0.0;
  EXPECT_THROW(encode(random_image(16, 16, rng), bank, c), ConfigError);
  c = SolverConfig{};
  c.lambda = -1.0;
  EXPECT_THROW(encode(random_image(16, 16, rng), bank, c), ConfigError);
  ComplexImage bad = random_image(16, 16, rng);
  bad(3, 3) = std::nan("");
  EXPECT_THROW(encode(bad, bank, SolverConfig{}), ConfigError);
  GradientFilters one_tap{{1.0}, {1.0}};
  EXPECT_THROW(encode_gr(random_image(16, 16, rng), bank, SolverConfig{}, one_tap), ConfigError);
}

TEST(SolverConfig, DefaultRhoScalesWithLambda) {
  EXPECT_DOUBLE_EQ(SolverConfig::default_rho(2.5), 25.0);
  EXPECT_DOUBLE_EQ(SolverConfig::default_rho(0.0), 1.0);
}
