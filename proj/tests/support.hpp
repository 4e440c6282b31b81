#pragma once

// Test-only reference implementations. Everything here is written in the
// spatial domain with plain loops (or dense Eigen algebra) so it shares no
// code path with the FFT-based library routines it checks.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <vector>

#include "ccsc/ccsc.hpp"

namespace ccsc::test {

using Rng = std::mt19937_64;

inline Complex random_complex(Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline ComplexImage random_image(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  ComplexImage img(rows, cols);
  for (auto& z : img.span()) z = random_complex(rng, scale);
  return img;
}

inline FilterBank random_bank(std::size_t m, std::size_t l, Rng& rng) {
  std::vector<ComplexImage> filters;
  for (std::size_t k = 0; k < m; ++k) {
    ComplexImage f = random_image(l, l, rng);
    const double n = l2_norm(f.span());
    for (auto& z : f.span()) z /= n;
    filters.push_back(std::move(f));
  }
  return FilterBank(std::move(filters));
}

inline CoefficientStack random_stack(std::size_t m, std::size_t rows, std::size_t cols, Rng& rng,
                                     double scale = 1.0) {
  CoefficientStack s(m, rows, cols);
  for (auto& map : s.maps) map = random_image(rows, cols, rng, scale);
  return s;
}

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

/// (k * x)(r, c) = sum_{a,b} k(a, b) x(r - a, c - b), indices modulo the
/// image size; k may be smaller than x (top-left anchored).
inline ComplexImage naive_convolve(const ComplexImage& k, const ComplexImage& x) {
  ComplexImage out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      Complex acc{0.0, 0.0};
      for (std::size_t a = 0; a < k.rows(); ++a) {
        for (std::size_t b = 0; b < k.cols(); ++b) {
          acc += k(a, b) * x(wrap(static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(a), x.rows()),
                             wrap(static_cast<std::ptrdiff_t>(c) - static_cast<std::ptrdiff_t>(b), x.cols()));
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

inline ComplexImage naive_convolve_sum(const FilterBank& bank, const CoefficientStack& x) {
  ComplexImage out(x.rows(), x.cols());
  for (std::size_t m = 0; m < bank.num_filters(); ++m) {
    const ComplexImage t = naive_convolve(bank[m], x.maps[m]);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  }
  return out;
}

/// Gradient kernels as small images, matching the documented placement.
inline ComplexImage row_gradient_kernel(const GradientFilters& g) {
  ComplexImage k(1, g.g0.size());
  for (std::size_t t = 0; t < g.g0.size(); ++t) k(0, t) = g.g0[t];
  return k;
}

inline ComplexImage col_gradient_kernel(const GradientFilters& g) {
  ComplexImage k(g.g1.size(), 1);
  for (std::size_t t = 0; t < g.g1.size(); ++t) k(t, 0) = g.g1[t];
  return k;
}

/// Full coding objective evaluated with spatial convolutions.
inline double spatial_objective(const ComplexImage& s, const FilterBank& bank,
                                const CoefficientStack& x, double lambda, double mu,
                                const GradientFilters& g) {
  const ComplexImage fit = naive_convolve_sum(bank, x);
  double data = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) data += std::norm(fit[i] - s[i]);
  double l1 = 0.0;
  double grad = 0.0;
  const ComplexImage k0 = row_gradient_kernel(g);
  const ComplexImage k1 = col_gradient_kernel(g);
  for (const auto& map : x.maps) {
    for (const auto& z : map.span()) l1 += std::abs(z);
    if (mu != 0.0) {
      grad += squared_norm(naive_convolve(k0, map).span());
      grad += squared_norm(naive_convolve(k1, map).span());
    }
  }
  return 0.5 * data + lambda * l1 + 0.5 * mu * grad;
}

using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

/// Matrix of x -> k * x on rows x cols images (row-major vectorization).
inline DenseMatrix convolution_matrix(const ComplexImage& k, std::size_t rows, std::size_t cols) {
  const std::size_t n = rows * cols;
  DenseMatrix a = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t ka = 0; ka < k.rows(); ++ka) {
        for (std::size_t kb = 0; kb < k.cols(); ++kb) {
          const std::size_t sr = wrap(static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(ka), rows);
          const std::size_t sc = wrap(static_cast<std::ptrdiff_t>(c) - static_cast<std::ptrdiff_t>(kb), cols);
          a(static_cast<Eigen::Index>(r * cols + c), static_cast<Eigen::Index>(sr * cols + sc)) +=
              k(ka, kb);
        }
      }
    }
  }
  return a;
}

inline DenseVector to_vector(const ComplexImage& img) {
  DenseVector v(static_cast<Eigen::Index>(img.size()));
  for (std::size_t i = 0; i < img.size(); ++i) v(static_cast<Eigen::Index>(i)) = img[i];
  return v;
}

inline DenseVector to_vector(const CoefficientStack& s) {
  const std::size_t n = s.rows() * s.cols();
  DenseVector v(static_cast<Eigen::Index>(n * s.num_maps()));
  for (std::size_t m = 0; m < s.num_maps(); ++m) {
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(m * n + i)) = s.maps[m][i];
  }
  return v;
}

inline CoefficientStack to_stack(const DenseVector& v, std::size_t m, std::size_t rows, std::size_t cols) {
  CoefficientStack s(m, rows, cols);
  const std::size_t n = rows * cols;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i) s.maps[k][i] = v(static_cast<Eigen::Index>(k * n + i));
  }
  return s;
}

/// Exact minimizer of
///   1/2 ||D x - s||^2 + mu/2 sum_m (||G0 x_m||^2 + ||G1 x_m||^2) + rho/2 ||x - (y - u)||^2
/// from the dense normal equations.
inline CoefficientStack dense_coefficient_update(const ComplexImage& s, const FilterBank& bank,
                                                 double rho, double mu, const GradientFilters& g,
                                                 const CoefficientStack& y, const CoefficientStack& u) {
  const std::size_t rows = s.rows();
  const std::size_t cols = s.cols();
  const auto n = static_cast<Eigen::Index>(rows * cols);
  const auto m = static_cast<Eigen::Index>(bank.num_filters());
  DenseMatrix d(n, n * m);
  for (Eigen::Index k = 0; k < m; ++k) {
    d.middleCols(k * n, n) = convolution_matrix(bank[static_cast<std::size_t>(k)], rows, cols);
  }
  const DenseMatrix g0 = convolution_matrix(row_gradient_kernel(g), rows, cols);
  const DenseMatrix g1 = convolution_matrix(col_gradient_kernel(g), rows, cols);
  const DenseMatrix gtg = g0.adjoint() * g0 + g1.adjoint() * g1;
  DenseMatrix a = d.adjoint() * d;
  for (Eigen::Index k = 0; k < m; ++k) a.block(k * n, k * n, n, n) += mu * gtg;
  a += rho * DenseMatrix::Identity(n * m, n * m);
  const DenseVector rhs = d.adjoint() * to_vector(s) + rho * (to_vector(y) - to_vector(u));
  return to_stack(a.partialPivLu().solve(rhs), bank.num_filters(), rows, cols);
}

/// The eight 64 x 64 clean interferograms used by the training tests.
inline TrainingBatch training_batch(std::size_t size = 64, std::size_t count = 8,
                                    std::uint64_t seed = 1) {
  return TrainingBatch{make_training_set(size, size, count, seed)};
}

}  // namespace ccsc::test
