#pragma once

// Dense linear algebra, activations, initialization, dropout and SGD
// utilities shared by every layer. Everything is 64-bit floating point.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sekira {

using Vector = std::vector<double>;

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void fill(double v);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// SplitMix64 (Steele, Lea & Flood 2014). The full generator is defined by
// its arithmetic, so a seed yields the same stream on every platform;
// no <random> distributions are involved anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n); n must be > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates, driven by below().
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// --- activations ---------------------------------------------------------

double sigmoid(double x);
Vector sigmoid(std::span<const double> x);
Vector tanh_act(std::span<const double> x);

// max(x) + ln sum exp(x - max(x)). Throws UsageError on empty input.
double log_sum_exp(std::span<const double> x);

// --- linear algebra helpers ---------------------------------------------

// out += W x
void matvec_add(const Matrix& w, std::span<const double> x, std::span<double> out);
// out += W^T v
void matvec_transposed_add(const Matrix& w, std::span<const double> v,
                           std::span<double> out);
// W += a b^T
void outer_add(Matrix& w, std::span<const double> a, std::span<const double> b);

Vector concat(std::span<const double> a, std::span<const double> b);

// --- initialization ------------------------------------------------------

// Uniform in +-sqrt(6 / (rows + cols)).
Matrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng);
Matrix uniform_init(std::size_t rows, std::size_t cols, double bound, Rng& rng);

// Inverted dropout: entries are 0 with probability `rate`, else 1/(1-rate).
// Outside training the mask is all ones.
Vector dropout_mask(std::size_t len, double rate, Rng& rng, bool training);

// --- optimization --------------------------------------------------------

struct ParamSlot {
  std::span<double> value;
  std::span<double> grad;
};

// value <- value - lr * grad
void sgd_step(std::span<double> value, std::span<const double> grad, double lr);
void sgd_step(std::span<const ParamSlot> params, double lr);

double global_norm(std::span<const std::span<double>> grads);

// Rescales all gradients by max_norm / norm when their joint L2 norm exceeds
// max_norm. Returns the norm before clipping.
double clip_gradients(std::span<const std::span<double>> grads, double max_norm);

// Central differences of `loss` with respect to every entry of `params`,
// which are perturbed in place and restored. Returns
//   max_i |num_i - ana_i| / max(1e-8, |num_i| + |ana_i|).
double finite_diff_check(const std::function<double()>& loss, std::span<double> params,
                         std::span<const double> analytic, double h = 1e-5);

}  // namespace sekira
