#pragma once

// Per-frequency-bin solvers for rank-1 (or rank-K) plus diagonal systems.
//
// Circular convolution operators are diagonalized by the DFT, so the normal
// equations of the coding and dictionary subproblems decouple into one small
// system per bin. Those systems have the form (sum_k a_k a_k^H + c I) x = b,
// which the Sherman-Morrison identity solves without factorization.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ccsc/error.hpp"
#include "ccsc/image.hpp"

namespace ccsc {

/// A length-`depth` complex vector at each of rows x cols frequency bins,
/// stored plane-major: plane(m) holds component m for every bin.
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  FrequencyGrid(std::size_t rows, std::size_t cols, std::size_t depth)
      : rows_(rows), cols_(cols), depth_(depth), data_(rows * cols * depth) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t bins() const noexcept { return rows_ * cols_; }

  std::span<Complex> plane(std::size_t m) noexcept {
    return std::span<Complex>(data_).subspan(m * bins(), bins());
  }
  std::span<const Complex> plane(std::size_t m) const noexcept {
    return std::span<const Complex>(data_).subspan(m * bins(), bins());
  }
  Complex& at(std::size_t bin, std::size_t m) noexcept { return data_[m * bins() + bin]; }
  const Complex& at(std::size_t bin, std::size_t m) const noexcept {
    return data_[m * bins() + bin];
  }

  std::span<Complex> span() noexcept { return data_; }
  std::span<const Complex> span() const noexcept { return data_; }

  bool same_shape(const FrequencyGrid& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_ && depth_ == o.depth_;
  }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t depth_ = 0;
  std::vector<Complex> data_;
};

/// In place: rhs <- (d d^H + diag I)^{-1} rhs, independently per bin.
inline void solve_rank1_diag_inplace(const FrequencyGrid& d, std::span<const double> diag,
                                     FrequencyGrid& rhs) {
  if (!d.same_shape(rhs)) throw DimensionError("rank-1 solve: d and rhs shapes differ");
  if (diag.size() != d.bins()) throw DimensionError("rank-1 solve: diag length != bin count");
  const std::size_t depth = d.depth();
  const std::size_t bins = d.bins();
  for (std::size_t bin = 0; bin < bins; ++bin) {
    if (!(diag[bin] > 0.0)) {
      throw ConfigError("rank-1 solve: diagonal offset must be positive at every bin");
    }
  }
  for (std::size_t bin = 0; bin < bins; ++bin) {
    Complex dh_b{0.0, 0.0};
    double dh_d = 0.0;
    for (std::size_t m = 0; m < depth; ++m) {
      const Complex dm = d.at(bin, m);
      dh_b += std::conj(dm) * rhs.at(bin, m);
      dh_d += std::norm(dm);
    }
    const double c = diag[bin];
    const Complex coef = dh_b / (c + dh_d);
    const double inv_c = 1.0 / c;
    for (std::size_t m = 0; m < depth; ++m) {
      Complex& x = rhs.at(bin, m);
      x = (x - d.at(bin, m) * coef) * inv_c;
    }
  }
}

inline FrequencyGrid solve_rank1_diag_systems(const FrequencyGrid& d,
                                              std::span<const double> diag,
                                              const FrequencyGrid& rhs) {
  FrequencyGrid x = rhs;
  solve_rank1_diag_inplace(d, diag, x);
  return x;
}

/// In place: rhs <- (sum_k a_k a_k^H + sigma I)^{-1} rhs per bin, applying one
/// Sherman-Morrison update per rank-1 term. O(K^2 M) work per bin.
inline void solve_iterated_sherman_morrison_inplace(std::span<const FrequencyGrid> terms,
                                                    double sigma, FrequencyGrid& rhs) {
  if (!(sigma > 0.0)) throw ConfigError("iterated Sherman-Morrison requires sigma > 0");
  if (terms.empty()) throw ConfigError("iterated Sherman-Morrison requires at least one term");
  for (const auto& a : terms) {
    if (!a.same_shape(rhs)) throw DimensionError("iterated Sherman-Morrison: shape mismatch");
  }
  const std::size_t num_terms = terms.size();
  const std::size_t depth = rhs.depth();
  const std::size_t bins = rhs.bins();
  const double inv_sigma = 1.0 / sigma;

  // beta[l] = A_{l-1}^{-1} a_l / (1 + a_l^H A_{l-1}^{-1} a_l), with A_0 = sigma I.
  std::vector<Complex> beta(num_terms * depth);
  std::vector<Complex> a(num_terms * depth);
  std::vector<Complex> x(depth);
  for (std::size_t bin = 0; bin < bins; ++bin) {
    for (std::size_t k = 0; k < num_terms; ++k) {
      for (std::size_t m = 0; m < depth; ++m) a[k * depth + m] = terms[k].at(bin, m);
    }
    // v <- A_l^{-1} v given A_0^{-1} v, using the betas computed so far.
    auto apply_updates = [&](Complex* v, std::size_t upto) {
      for (std::size_t j = 0; j < upto; ++j) {
        const Complex* aj = &a[j * depth];
        const Complex* bj = &beta[j * depth];
        Complex proj{0.0, 0.0};
        for (std::size_t m = 0; m < depth; ++m) proj += std::conj(aj[m]) * v[m];
        for (std::size_t m = 0; m < depth; ++m) v[m] -= bj[m] * proj;
      }
    };
    for (std::size_t l = 0; l < num_terms; ++l) {
      Complex* bl = &beta[l * depth];
      const Complex* al = &a[l * depth];
      for (std::size_t m = 0; m < depth; ++m) bl[m] = al[m] * inv_sigma;
      apply_updates(bl, l);
      Complex denom{1.0, 0.0};
      for (std::size_t m = 0; m < depth; ++m) denom += std::conj(al[m]) * bl[m];
      for (std::size_t m = 0; m < depth; ++m) bl[m] /= denom;
    }
    for (std::size_t m = 0; m < depth; ++m) x[m] = rhs.at(bin, m) * inv_sigma;
    apply_updates(x.data(), num_terms);
    for (std::size_t m = 0; m < depth; ++m) rhs.at(bin, m) = x[m];
  }
}

inline FrequencyGrid solve_iterated_sherman_morrison(std::span<const FrequencyGrid> terms,
                                                     double sigma, const FrequencyGrid& rhs) {
  FrequencyGrid x = rhs;
  solve_iterated_sherman_morrison_inplace(terms, sigma, x);
  return x;
}

}  // namespace ccsc
