#pragma once

// Linear-chain CRF over K tags with explicit boundary states. The transition
// table is (K+2) x (K+2): index K is the begin-of-sentence state and K+1 the
// end-of-sentence state. A path y_1..y_T scores
//
//   A[BOS, y_1] + sum_i A[y_i, y_{i+1}] + A[y_T, EOS] + sum_i P[i, y_i]
//
// where P is the emission matrix produced by the encoder.

#include <cstddef>
#include <string>
#include <vector>

#include "sekira/numerics.hpp"

namespace sekira {

// Stand-in for minus infinity; keeps log_sum_exp arithmetic finite.
inline constexpr double kForbidden = -1e30;

using TagSequence = std::vector<std::size_t>;

struct CrfParams {
  std::size_t num_tags = 0;
  Matrix transitions;  // (K+2) x (K+2)
  Matrix fixed;        // 1.0 where the entry is pinned and never trained

  std::size_t bos() const noexcept { return num_tags; }
  std::size_t eos() const noexcept { return num_tags + 1; }

  // Zero transitions; entries into BOS and out of EOS pinned at kForbidden.
  static CrfParams zeros(std::size_t num_tags);

  // Zeroes the gradient of every pinned entry.
  void mask_gradient(Matrix& grad) const;
};

double sequence_score(const CrfParams& crf, const Matrix& emissions, const TagSequence& tags);

// ln of the sum of exp(score) over all K^T paths (forward algorithm).
double log_partition(const CrfParams& crf, const Matrix& emissions);

struct NllResult {
  double loss = 0.0;          // log_partition - score(gold), >= 0
  Matrix d_emissions;         // T x K: posterior marginals - gold one-hot
  Matrix d_transitions;       // expected - gold transition counts, pinned entries zeroed
};

NllResult nll_loss(const CrfParams& crf, const Matrix& emissions, const TagSequence& gold);

struct Decoded {
  TagSequence tags;
  double score = 0.0;
};

// Highest-scoring path. Ties go to the lowest tag index at each step of the
// backtrace, starting from the last position.
Decoded viterbi_decode(const CrfParams& crf, const Matrix& emissions);

// IOB2 transition mask over the given tag names ("O", "B-X", "I-X"):
// O -> I-X, BOS -> I-X and B-X/I-X -> I-Y (X != Y) are pinned at kForbidden.
// Throws DataError for names outside that pattern.
CrfParams constrained_transitions(const std::vector<std::string>& tag_names);

}  // namespace sekira
