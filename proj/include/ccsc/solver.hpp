#pragma once

// ADMM convolutional sparse coding of a complex image against a fixed filter
// bank, with an optional squared-gradient penalty on the coefficient maps:
//
//   min_x  1/2 ||sum_m d_m * x_m - s||^2 + lambda sum_m ||x_m||_1
//          + mu/2 sum_m (||g0 * x_m||^2 + ||g1 * x_m||^2)
//
// Splitting x = y gives three updates per iteration: a per-bin rank-1 plus
// diagonal solve for x, complex soft-thresholding for y, and the scaled dual
// ascent u += x - y. The x system is
//
//   (conj(D) D^T + (mu (|G0|^2 + |G1|^2) + rho) I) x = conj(D) S + rho (Y - U)
//
// per frequency bin, so the gradient penalty only shifts the diagonal.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ccsc/convolution.hpp"
#include "ccsc/error.hpp"
#include "ccsc/fft.hpp"
#include "ccsc/image.hpp"
#include "ccsc/prox.hpp"
#include "ccsc/sherman_morrison.hpp"

namespace ccsc {

struct SolverConfig {
  double lambda = 2.5;  ///< l1 weight
  double mu = 5.0;      ///< gradient weight; 0 selects plain ComCSC
  double rho = 25.0;    ///< ADMM penalty, fixed for the whole run
  int max_iters = 200;
  double tol = 1e-3;    ///< threshold on max(relative primal, relative dual) residual

  /// Penalty used when none is given: ten times the l1 weight.
  static double default_rho(double lambda) { return lambda > 0.0 ? 10.0 * lambda : 1.0; }

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be >= 0");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be > 0");
    if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  }
};

/// 1-D kernels computing the gradient along image rows (g0, taps run across
/// columns) and along image columns (g1, taps run down rows). Applied
/// circularly with the first tap at offset 0.
struct GradientFilters {
  std::vector<Complex> g0;
  std::vector<Complex> g1;

  static GradientFilters forward_difference() { return {{-1.0, 1.0}, {-1.0, 1.0}}; }
  static GradientFilters zero() { return {{0.0, 0.0}, {0.0, 0.0}}; }

  void validate(std::size_t rows, std::size_t cols) const {
    if (g0.size() < 2 || g1.size() < 2) throw ConfigError("gradient kernels need >= 2 taps");
    if (g0.size() > cols || g1.size() > rows) {
      throw DimensionError("gradient kernel longer than image side");
    }
  }

  ComplexImage row_kernel(std::size_t rows, std::size_t cols) const {
    ComplexImage k(rows, cols);
    for (std::size_t t = 0; t < g0.size(); ++t) k(0, t) = g0[t];
    return k;
  }
  ComplexImage col_kernel(std::size_t rows, std::size_t cols) const {
    ComplexImage k(rows, cols);
    for (std::size_t t = 0; t < g1.size(); ++t) k(t, 0) = g1[t];
    return k;
  }

  /// |fft(g0)|^2 + |fft(g1)|^2 at every bin.
  std::vector<double> power_spectrum(std::size_t rows, std::size_t cols) const {
    validate(rows, cols);
    const ComplexImage h0 = fft::forward(row_kernel(rows, cols));
    const ComplexImage h1 = fft::forward(col_kernel(rows, cols));
    std::vector<double> p(rows * cols);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(h0[i]) + std::norm(h1[i]);
    return p;
  }
};

struct AdmmRecord {
  int iteration = 0;
  double objective = 0.0;
  double primal_residual = 0.0;  ///< ||x - y|| / max(||x||, ||y||)
  double dual_residual = 0.0;    ///< ||y - y_prev|| / ||u||
};

struct AdmmTrace {
  std::vector<AdmmRecord> records;
  bool converged = false;

  int iterations() const { return records.empty() ? 0 : records.back().iteration; }
};

/// Raised when an iterate stops being finite; carries the trace so far.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& what, AdmmTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const AdmmTrace& trace() const noexcept { return trace_; }

 private:
  AdmmTrace trace_;
};

/// ADMM iterates for one image. yhat/uhat mirror fft(y)/fft(u).
struct CodingState {
  CoefficientStack x, y, u;
  FrequencyGrid yhat, uhat;

  static CodingState zeros(std::size_t num_maps, std::size_t rows, std::size_t cols) {
    return {CoefficientStack(num_maps, rows, cols), CoefficientStack(num_maps, rows, cols),
            CoefficientStack(num_maps, rows, cols), FrequencyGrid(rows, cols, num_maps),
            FrequencyGrid(rows, cols, num_maps)};
  }
};

struct EncodeResult {
  CoefficientStack coefficients;
  AdmmTrace trace;
};

namespace detail {

/// Everything about the x-update that does not change across iterations.
struct CodingOperator {
  FrequencyGrid dhat;            ///< fft of padded filters
  FrequencyGrid dconj;           ///< conj(dhat): the rank-1 vector of each bin system
  std::vector<double> grad_power;  ///< |G0|^2 + |G1|^2, empty without gradient term
  std::vector<double> diag;      ///< rho + mu * grad_power
  double mu = 0.0;
  double rho = 1.0;

  CodingOperator(const FilterBank& bank, std::size_t rows, std::size_t cols, double rho_,
                 double mu_, const GradientFilters* grads)
      : dhat(bank_spectrum(bank, rows, cols)), mu(mu_), rho(rho_) {
    dconj = dhat;
    for (auto& z : dconj.span()) z = std::conj(z);
    diag.assign(rows * cols, rho);
    if (grads != nullptr) {
      grad_power = grads->power_spectrum(rows, cols);
      for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = rho + mu * grad_power[i];
    }
  }

  std::size_t rows() const { return dhat.rows(); }
  std::size_t cols() const { return dhat.cols(); }
  std::size_t num_maps() const { return dhat.depth(); }

  /// conj(dhat) * shat, the constant part of every x right-hand side.
  FrequencyGrid data_term(const ComplexImage& shat) const {
    FrequencyGrid out(rows(), cols(), num_maps());
    for (std::size_t m = 0; m < num_maps(); ++m) {
      auto o = out.plane(m);
      auto d = dconj.plane(m);
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = d[i] * shat[i];
    }
    return out;
  }
};

/// Objective evaluated from the spectrum of the coefficients (Parseval) plus
/// the spatial l1 norm.
inline double objective_from_spectrum(const CodingOperator& op, const ComplexImage& shat,
                                      const FrequencyGrid& xhat, double l1, double lambda) {
  const double inv_n = 1.0 / static_cast<double>(op.rows() * op.cols());
  double fit = 0.0;
  const std::size_t bins = op.rows() * op.cols();
  std::vector<Complex> recon(bins);
  for (std::size_t m = 0; m < op.num_maps(); ++m) {
    auto d = op.dhat.plane(m);
    auto x = xhat.plane(m);
    for (std::size_t i = 0; i < bins; ++i) recon[i] += d[i] * x[i];
  }
  for (std::size_t i = 0; i < bins; ++i) fit += std::norm(recon[i] - shat[i]);
  double grad = 0.0;
  if (!op.grad_power.empty() && op.mu != 0.0) {
    for (std::size_t m = 0; m < op.num_maps(); ++m) {
      auto x = xhat.plane(m);
      for (std::size_t i = 0; i < bins; ++i) grad += op.grad_power[i] * std::norm(x[i]);
    }
  }
  return 0.5 * fit * inv_n + lambda * l1 + 0.5 * op.mu * grad * inv_n;
}

/// x <- argmin of the quadratic part; leaves xhat in `work`.
inline void x_update(const CodingOperator& op, const FrequencyGrid& data_term, CodingState& st,
                     FrequencyGrid& work) {
  const double rho = op.rho;
  auto w = work.span();
  auto dt = data_term.span();
  auto yh = st.yhat.span();
  auto uh = st.uhat.span();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = dt[i] + rho * (yh[i] - uh[i]);
  solve_rank1_diag_inplace(op.dconj, op.diag, work);
  for (std::size_t m = 0; m < op.num_maps(); ++m) {
    auto plane = work.plane(m);
    auto& xm = st.x.maps[m];
    std::copy(plane.begin(), plane.end(), xm.span().begin());
    fft::inverse_inplace(xm.span(), op.rows(), op.cols());
  }
}

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double l1 = 0.0;
};

inline double relative(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

/// y <- CS_{lambda/rho}(x + u), u <- u + x - y, refresh yhat/uhat.
/// `xhat` is the spectrum of the current x.
inline Residuals yu_update(const CodingOperator& op, double lambda, CodingState& st,
                           const FrequencyGrid& xhat) {
  const double gamma = lambda / op.rho;
  double xx = 0.0, yy = 0.0, xy = 0.0, dy = 0.0, uu = 0.0, l1 = 0.0;
  for (std::size_t m = 0; m < op.num_maps(); ++m) {
    auto x = st.x.maps[m].span();
    auto y = st.y.maps[m].span();
    auto u = st.u.maps[m].span();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Complex ynew = complex_soft_threshold(x[i] + u[i], gamma);
      dy += std::norm(ynew - y[i]);
      y[i] = ynew;
      const Complex r = x[i] - ynew;
      u[i] += r;
      xx += std::norm(x[i]);
      yy += std::norm(ynew);
      xy += std::norm(r);
      uu += std::norm(u[i]);
      l1 += std::abs(ynew);
    }
    auto yh = st.yhat.plane(m);
    std::copy(y.begin(), y.end(), yh.begin());
    fft::forward_inplace(yh, op.rows(), op.cols());
    auto uh = st.uhat.plane(m);
    auto xh = xhat.plane(m);
    for (std::size_t i = 0; i < uh.size(); ++i) uh[i] += xh[i] - yh[i];
  }
  return {relative(std::sqrt(xy), std::sqrt(std::max(xx, yy))),
          relative(std::sqrt(dy), std::sqrt(uu)), l1};
}

inline void check_inputs(const ComplexImage& image, const FilterBank& bank) {
  if (image.empty()) throw DimensionError("encode: empty image");
  if (bank.filter_size() > image.rows() || bank.filter_size() > image.cols()) {
    throw DimensionError("filter size " + std::to_string(bank.filter_size()) +
                         " exceeds image " + shape_string(image.rows(), image.cols()));
  }
  if (!all_finite(image.span())) throw ConfigError("encode: image contains non-finite samples");
}

inline EncodeResult run_admm(const ComplexImage& image, const CodingOperator& op,
                             const SolverConfig& config) {
  const ComplexImage shat = fft::forward(image);
  const FrequencyGrid dt = op.data_term(shat);
  CodingState st = CodingState::zeros(op.num_maps(), image.rows(), image.cols());
  FrequencyGrid work(op.rows(), op.cols(), op.num_maps());
  AdmmTrace trace;
  for (int it = 1; it <= config.max_iters; ++it) {
    x_update(op, dt, st, work);
    const Residuals res = yu_update(op, config.lambda, st, work);
    const double obj = objective_from_spectrum(op, shat, st.yhat, res.l1, config.lambda);
    trace.records.push_back({it, obj, res.primal, res.dual});
    if (!std::isfinite(obj) || std::isnan(res.primal) || std::isnan(res.dual)) {
      throw DivergedError("sparse coding diverged at iteration " + std::to_string(it),
                          std::move(trace));
    }
    if (std::max(res.primal, res.dual) < config.tol) {
      trace.converged = true;
      break;
    }
  }
  return {std::move(st.y), std::move(trace)};
}

}  // namespace detail

/// Plain complex convolutional sparse coding: no gradient term (mu ignored).
inline EncodeResult encode_comcsc(const ComplexImage& image, const FilterBank& bank,
                                  const SolverConfig& config) {
  config.validate();
  detail::check_inputs(image, bank);
  const detail::CodingOperator op(bank, image.rows(), image.cols(), config.rho, 0.0, nullptr);
  SolverConfig c = config;
  c.mu = 0.0;
  return detail::run_admm(image, op, c);
}

/// Gradient-regularized coding; always takes the gradient path, even at mu = 0.
inline EncodeResult encode_gr(const ComplexImage& image, const FilterBank& bank,
                              const SolverConfig& config, const GradientFilters& grads) {
  config.validate();
  detail::check_inputs(image, bank);
  const detail::CodingOperator op(bank, image.rows(), image.cols(), config.rho, config.mu,
                                  &grads);
  return detail::run_admm(image, op, config);
}

/// Dispatches to the plain path when mu == 0, else the gradient path.
inline EncodeResult encode(const ComplexImage& image, const FilterBank& bank,
                           const SolverConfig& config,
                           const GradientFilters& grads = GradientFilters::forward_difference()) {
  if (config.mu == 0.0) return encode_comcsc(image, bank, config);
  return encode_gr(image, bank, config, grads);
}

/// Restored image sum_m d_m * x_m from the coded coefficients.
inline ComplexImage denoise(const ComplexImage& image, const FilterBank& bank,
                            const SolverConfig& config,
                            const GradientFilters& grads = GradientFilters::forward_difference()) {
  return convolve_sum(bank, encode(image, bank, config, grads).coefficients);
}

/// 1/2 ||sum d_m * x_m - s||^2 + lambda sum ||x_m||_1
///   + mu/2 sum (||g0 * x_m||^2 + ||g1 * x_m||^2)
inline double objective(const ComplexImage& image, const FilterBank& bank,
                        const CoefficientStack& stack, const SolverConfig& config,
                        const GradientFilters& grads = GradientFilters::forward_difference()) {
  if (stack.num_maps() != bank.num_filters()) {
    throw DimensionError("objective: map count does not match filter count");
  }
  require_same_shape(stack.maps.front(), image, "objective");
  const detail::CodingOperator op(bank, image.rows(), image.cols(), 1.0, config.mu,
                                  config.mu != 0.0 ? &grads : nullptr);
  return detail::objective_from_spectrum(op, fft::forward(image), stack_spectrum(stack),
                                         stack.l1_norm(), config.lambda);
}

/// One x-update from given auxiliary/dual iterates: the exact minimizer of
/// the quadratic part of the augmented Lagrangian. Exposed for verification.
inline CoefficientStack coefficient_update(const ComplexImage& image, const FilterBank& bank,
                                           const SolverConfig& config,
                                           const GradientFilters& grads,
                                           const CoefficientStack& y, const CoefficientStack& u) {
  config.validate();
  detail::check_inputs(image, bank);
  const detail::CodingOperator op(bank, image.rows(), image.cols(), config.rho, config.mu,
                                  &grads);
  CodingState st = CodingState::zeros(op.num_maps(), image.rows(), image.cols());
  st.y = y;
  st.u = u;
  st.yhat = stack_spectrum(y);
  st.uhat = stack_spectrum(u);
  FrequencyGrid work(op.rows(), op.cols(), op.num_maps());
  detail::x_update(op, op.data_term(fft::forward(image)), st, work);
  return st.x;
}

}  // namespace ccsc
