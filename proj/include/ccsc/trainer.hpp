#pragma once

// Complex convolutional dictionary learning by alternating minimization.
//
// Each outer iteration performs one ADMM triple of the multi-image coding
// problem (x solve, soft-threshold, dual update) followed by one ADMM triple
// of the dictionary problem (d solve by iterated Sherman-Morrison, projection
// onto unit-norm filters of the requested support, dual update). Both blocks
// warm-start from the previous outer iteration. The coding block codes
// against the feasible (projected) dictionary, and the dictionary block fits
// the thresholded coefficients.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccsc/convolution.hpp"
#include "ccsc/error.hpp"
#include "ccsc/fft.hpp"
#include "ccsc/image.hpp"
#include "ccsc/parallel.hpp"
#include "ccsc/prox.hpp"
#include "ccsc/sherman_morrison.hpp"
#include "ccsc/solver.hpp"

namespace ccsc {

struct TrainConfig {
  double lambda = 0.2;
  double rho = 2.5;    ///< coding penalty
  double sigma = 32.0;  ///< dictionary penalty
  std::size_t num_filters = 16;
  std::size_t filter_size = 8;
  int outer_iters = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be > 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be > 0");
    if (num_filters < 1) throw ConfigError("need at least one filter");
    if (filter_size < 2) throw ConfigError("filter size must be >= 2");
    if (outer_iters < 1) throw ConfigError("outer_iters must be >= 1");
  }
};

struct TrainingBatch {
  std::vector<ComplexImage> images;

  std::size_t size() const noexcept { return images.size(); }
  std::size_t rows() const { return images.at(0).rows(); }
  std::size_t cols() const { return images.at(0).cols(); }

  void validate() const {
    if (images.empty()) throw ConfigError("training batch is empty");
    for (const auto& img : images) {
      require_same_shape(img, images.front(), "training batch");
      if (!all_finite(img.span())) throw ConfigError("training image has non-finite samples");
    }
    if (images.front().empty()) throw DimensionError("training images are empty");
  }
};

/// Coding-block iterates, one CodingState per training image.
struct SparseState {
  std::vector<CodingState> images;

  static SparseState zeros(const TrainingBatch& batch, std::size_t num_maps) {
    SparseState s;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      s.images.push_back(CodingState::zeros(num_maps, batch.rows(), batch.cols()));
    }
    return s;
  }

  std::vector<CoefficientStack> coefficients() const {
    std::vector<CoefficientStack> out;
    out.reserve(images.size());
    for (const auto& st : images) out.push_back(st.y);
    return out;
  }
};

/// Dictionary-block iterates on zero-padded, image-sized filters. `y` is the
/// feasible dictionary.
struct DictionaryState {
  std::vector<ComplexImage> d, y, u;
  std::size_t filter_size = 0;
  bool degenerate_projection = false;  ///< a projection hit a zero-norm block

  FilterBank bank() const {
    std::vector<ComplexImage> filters;
    filters.reserve(y.size());
    for (const auto& f : y) filters.push_back(crop_filter(f, filter_size));
    return FilterBank(std::move(filters));
  }

  /// Complex Gaussian entries on the support, projected onto unit norm.
  static DictionaryState random(std::size_t rows, std::size_t cols, std::size_t num_filters,
                                std::size_t filter_size, std::uint64_t seed) {
    if (filter_size > rows || filter_size > cols) {
      throw DimensionError("filter size " + std::to_string(filter_size) +
                           " exceeds image " + shape_string(rows, cols));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    DictionaryState s;
    s.filter_size = filter_size;
    for (std::size_t m = 0; m < num_filters; ++m) {
      ComplexImage f(rows, cols);
      for (std::size_t r = 0; r < filter_size; ++r) {
        for (std::size_t c = 0; c < filter_size; ++c) {
          const double re = normal(rng);
          const double im = normal(rng);
          f(r, c) = {re, im};
        }
      }
      Projection p = project_to_constraint_set(f, filter_size);
      s.degenerate_projection |= p.degenerate;
      s.d.push_back(p.value);
      s.y.push_back(std::move(p.value));
      s.u.emplace_back(rows, cols);
    }
    return s;
  }
};

struct StepResiduals {
  double primal = 0.0;
  double dual = 0.0;
};

namespace detail {

inline std::vector<ComplexImage> image_spectra(const TrainingBatch& batch) {
  std::vector<ComplexImage> out;
  out.reserve(batch.size());
  for (const auto& img : batch.images) out.push_back(fft::forward(img));
  return out;
}

inline double norm_sum(std::span<const ComplexImage> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += squared_norm(x.span());
  return acc;
}

}  // namespace detail

/// One coding ADMM triple for every image of the batch against `bank`.
inline StepResiduals sparse_step(const TrainingBatch& batch, const FilterBank& bank,
                                 SparseState& state, const TrainConfig& config) {
  batch.validate();
  if (state.images.size() != batch.size()) throw DimensionError("sparse state size != batch");
  const detail::CodingOperator op(bank, batch.rows(), batch.cols(), config.rho, 0.0, nullptr);
  std::vector<detail::Residuals> res(batch.size());
  parallel_for(batch.size(), config.threads, [&](std::size_t k) {
    const FrequencyGrid dt = op.data_term(fft::forward(batch.images[k]));
    FrequencyGrid work(op.rows(), op.cols(), op.num_maps());
    detail::x_update(op, dt, state.images[k], work);
    res[k] = detail::yu_update(op, config.lambda, state.images[k], work);
  });
  StepResiduals out;
  for (const auto& r : res) {
    out.primal = std::max(out.primal, r.primal);
    out.dual = std::max(out.dual, r.dual);
  }
  return out;
}

/// One dictionary ADMM triple with the coefficient maps held fixed.
inline StepResiduals dict_step(const TrainingBatch& batch,
                               std::span<const CoefficientStack> coeffs,
                               DictionaryState& state, const TrainConfig& config) {
  batch.validate();
  if (coeffs.size() != batch.size()) throw DimensionError("one coefficient stack per image");
  const std::size_t rows = batch.rows();
  const std::size_t cols = batch.cols();
  const std::size_t num_filters = state.y.size();
  for (const auto& c : coeffs) {
    if (c.num_maps() != num_filters || c.rows() != rows || c.cols() != cols) {
      throw DimensionError("coefficient stack does not match dictionary/batch shape");
    }
  }
  const std::vector<ComplexImage> shat = detail::image_spectra(batch);

  // Rank-1 terms: conj of each image's coefficient spectra.
  std::vector<FrequencyGrid> terms(batch.size());
  parallel_for(batch.size(), config.threads, [&](std::size_t k) {
    terms[k] = stack_spectrum(coeffs[k]);
    for (auto& z : terms[k].span()) z = std::conj(z);
  });

  FrequencyGrid rhs(rows, cols, num_filters);
  for (std::size_t m = 0; m < num_filters; ++m) {
    auto plane = rhs.plane(m);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = state.y[m][i] - state.u[m][i];
    fft::forward_inplace(plane, rows, cols);
    for (auto& z : plane) z *= config.sigma;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      auto a = terms[k].plane(m);
      for (std::size_t i = 0; i < plane.size(); ++i) plane[i] += a[i] * shat[k][i];
    }
  }
  solve_iterated_sherman_morrison_inplace(terms, config.sigma, rhs);

  double dd = 0.0, yy = 0.0, dy = 0.0, ydiff = 0.0, uu = 0.0;
  for (std::size_t m = 0; m < num_filters; ++m) {
    ComplexImage& d = state.d[m];
    auto plane = rhs.plane(m);
    std::copy(plane.begin(), plane.end(), d.span().begin());
    fft::inverse_inplace(d.span(), rows, cols);
    ComplexImage v = d;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += state.u[m][i];
    Projection p = project_to_constraint_set(v, state.filter_size);
    state.degenerate_projection |= p.degenerate;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Complex ynew = p.value[i];
      ydiff += std::norm(ynew - state.y[m][i]);
      const Complex r = d[i] - ynew;
      state.u[m][i] += r;
      dd += std::norm(d[i]);
      yy += std::norm(ynew);
      dy += std::norm(r);
      uu += std::norm(state.u[m][i]);
    }
    state.y[m] = std::move(p.value);
  }
  return {detail::relative(std::sqrt(dy), std::sqrt(std::max(dd, yy))),
          detail::relative(std::sqrt(ydiff), std::sqrt(uu))};
}

/// 1/2 sum_k ||sum_m d_m * x_{m,k} - s_k||^2 + lambda sum_{m,k} ||x_{m,k}||_1
inline double ccdl_objective(const TrainingBatch& batch, const FilterBank& bank,
                             std::span<const CoefficientStack> coeffs, double lambda) {
  if (coeffs.size() != batch.size()) throw DimensionError("one coefficient stack per image");
  SolverConfig c;
  c.lambda = lambda;
  c.mu = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    total += objective(batch.images[k], bank, coeffs[k], c);
  }
  return total;
}

struct TrainResult {
  FilterBank bank;
  /// Record 0 is the initialization (random filters, zero coefficients);
  /// record t holds the objective after outer iteration t and the
  /// dictionary-block relative residuals.
  AdmmTrace trace;
  bool degenerate_projection = false;
};

inline TrainResult ccdl_train(const TrainingBatch& batch, const TrainConfig& config) {
  config.validate();
  batch.validate();
  const std::size_t rows = batch.rows();
  const std::size_t cols = batch.cols();
  DictionaryState dict =
      DictionaryState::random(rows, cols, config.num_filters, config.filter_size, config.seed);
  SparseState coding = SparseState::zeros(batch, config.num_filters);
  const std::vector<ComplexImage> shat = detail::image_spectra(batch);

  AdmmTrace trace;
  trace.records.push_back({0, 0.5 * detail::norm_sum(batch.images), 0.0, 0.0});
  for (int t = 1; t <= config.outer_iters; ++t) {
    sparse_step(batch, dict.bank(), coding, config);
    const std::vector<CoefficientStack> coeffs = coding.coefficients();
    const StepResiduals r = dict_step(batch, coeffs, dict, config);

    const FilterBank bank = dict.bank();
    const detail::CodingOperator op(bank, rows, cols, 1.0, 0.0, nullptr);
    double obj = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      obj += detail::objective_from_spectrum(op, shat[k], coding.images[k].yhat,
                                             coeffs[k].l1_norm(), config.lambda);
    }
    trace.records.push_back({t, obj, r.primal, r.dual});
    if (!std::isfinite(obj) || std::isnan(r.primal) || std::isnan(r.dual)) {
      throw DivergedError("dictionary learning diverged at outer iteration " + std::to_string(t),
                          std::move(trace));
    }
  }
  return {dict.bank(), std::move(trace), dict.degenerate_projection};
}

}  // namespace ccsc
