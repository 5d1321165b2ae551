#pragma once

// Reference implementations used only by tests. They enumerate or unroll
// everything explicitly and share no code with the library beyond the
// plain Matrix container.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sekira/numerics.hpp"

namespace oracle {

using sekira::Matrix;
using Path = std::vector<std::size_t>;

// Visits every path in K^T in odometer order (last position fastest).
template <class Fn>
void for_each_path(std::size_t len, std::size_t k, Fn&& fn) {
  Path path(len, 0);
  while (true) {
    fn(path);
    std::size_t pos = len;
    while (pos > 0) {
      --pos;
      if (++path[pos] < k) break;
      path[pos] = 0;
      if (pos == 0) return;
    }
    if (len == 0) return;
  }
}

// Transitions are (K+2) x (K+2) with begin = K and end = K+1. Summed in the
// order: begin edge, inner edges left to right, end edge, then emissions.
inline double path_score(const Matrix& trans, const Matrix& emit, const Path& y) {
  const std::size_t k = emit.cols();
  double s = trans(k, y.front());
  for (std::size_t i = 0; i + 1 < y.size(); ++i) s += trans(y[i], y[i + 1]);
  s += trans(y.back(), k + 1);
  for (std::size_t i = 0; i < y.size(); ++i) s += emit(i, y[i]);
  return s;
}

inline double log_partition(const Matrix& trans, const Matrix& emit) {
  std::vector<double> scores;
  for_each_path(emit.rows(), emit.cols(),
                [&](const Path& y) { scores.push_back(path_score(trans, emit, y)); });
  const double m = *std::max_element(scores.begin(), scores.end());
  long double sum = 0.0L;
  for (double s : scores) sum += std::exp(static_cast<long double>(s - m));
  return m + static_cast<double>(std::log(sum));
}

// Among equal-scoring paths, the one smallest when compared from the last
// position backwards.
inline bool reverse_lex_less(const Path& a, const Path& b) {
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

struct Best {
  Path path;
  double score;
};

inline Best best_path(const Matrix& trans, const Matrix& emit) {
  Best best{{}, -INFINITY};
  for_each_path(emit.rows(), emit.cols(), [&](const Path& y) {
    const double s = path_score(trans, emit, y);
    if (best.path.empty() || s > best.score ||
        (s == best.score && reverse_lex_less(y, best.path))) {
      best = {y, s};
    }
  });
  return best;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace oracle
