#include "sekira/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sekira/errors.hpp"

namespace sekira {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw UsageError("Rng::below: n must be positive");
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> x) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return sigmoid(v); });
  return out;
}

Vector tanh_act(std::span<const double> x) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return std::tanh(v); });
  return out;
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) throw UsageError("log_sum_exp: empty input");
  const double m = *std::max_element(x.begin(), x.end());
  if (std::isinf(m)) return m;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - m);
  return m + std::log(sum);
}

void matvec_add(const Matrix& w, std::span<const double> x, std::span<double> out) {
  if (x.size() != w.cols() || out.size() != w.rows()) {
    throw UsageError("matvec: shape mismatch (" + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + " times " + std::to_string(x.size()) + ")");
  }
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
}

void matvec_transposed_add(const Matrix& w, std::span<const double> v,
                           std::span<double> out) {
  if (v.size() != w.rows() || out.size() != w.cols()) {
    throw UsageError("matvec_transposed: shape mismatch");
  }
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double s = v[r];
    if (s == 0.0) continue;
    const auto row = w.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * s;
  }
}

void outer_add(Matrix& w, std::span<const double> a, std::span<const double> b) {
  if (a.size() != w.rows() || b.size() != w.cols()) {
    throw UsageError("outer_add: shape mismatch");
  }
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double s = a[r];
    if (s == 0.0) continue;
    auto row = w.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += s * b[c];
  }
}

Vector concat(std::span<const double> a, std::span<const double> b) {
  Vector out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Matrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw UsageError("glorot_init: dimensions must be >= 1");
  return uniform_init(rows, cols, std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
}

Matrix uniform_init(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
  return m;
}

Vector dropout_mask(std::size_t len, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw UsageError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  Vector mask(len, 1.0);
  if (!training || rate == 0.0) return mask;
  const double keep = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep;
  return mask;
}

void sgd_step(std::span<double> value, std::span<const double> grad, double lr) {
  if (value.size() != grad.size()) {
    throw UsageError("sgd_step: parameter has " + std::to_string(value.size()) +
                     " entries but gradient has " + std::to_string(grad.size()));
  }
  for (std::size_t i = 0; i < value.size(); ++i) value[i] -= lr * grad[i];
}

void sgd_step(std::span<const ParamSlot> params, double lr) {
  for (const auto& p : params) sgd_step(p.value, p.grad, lr);
}

double global_norm(std::span<const std::span<double>> grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g) sq += v * v;
  }
  return std::sqrt(sq);
}

double clip_gradients(std::span<const std::span<double>> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw UsageError("clip_gradients: max_norm must be positive");
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& g : grads) {
      for (double& v : g) v *= scale;
    }
  }
  return norm;
}

double finite_diff_check(const std::function<double()>& loss, std::span<double> params,
                         std::span<const double> analytic, double h) {
  if (!(h > 0.0)) throw UsageError("finite_diff_check: step must be positive");
  if (params.size() != analytic.size()) {
    throw UsageError("finite_diff_check: gradient size mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss();
    params[i] = saved - h;
    const double down = loss();
    params[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw UsageError("finite_diff_check: loss is not finite at coordinate " +
                       std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max(1e-8, std::abs(numeric) + std::abs(analytic[i]));
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace sekira
