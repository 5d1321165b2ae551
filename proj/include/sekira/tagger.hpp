#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sekira/corpus.hpp"
#include "sekira/crf.hpp"
#include "sekira/encoder.hpp"

namespace sekira {

// How emission scores become tags: a CRF over the whole sentence, or an
// independent softmax per token (the plain Bi-LSTM tagger).
enum class OutputLayer { kCrf, kSoftmax };

struct TaggerModel {
  std::vector<std::string> tagset;
  EncoderParams encoder;
  CrfParams crf;
  OutputLayer output = OutputLayer::kCrf;

  // Throws DataError for tags outside the tagset.
  std::size_t tag_index(const std::string& tag) const;
  TagSequence tag_indices(const std::vector<std::string>& tags) const;

  // Encoder tensors followed by "crf.transitions".
  std::vector<TensorRef> tensors();
};

struct ModelGrads {
  EncoderGrads encoder;
  Matrix transitions;

  static ModelGrads zeros_like(const TaggerModel& model);
  void set_zero();
  // Every gradient buffer, including touched embedding rows.
  std::vector<std::span<double>> buffers();
};

struct SoftmaxResult {
  double loss = 0.0;
  Matrix d_emissions;
};

// Sum over tokens of -log softmax(emissions[t])[gold[t]].
SoftmaxResult token_softmax_loss(const Matrix& emissions, const TagSequence& gold);

// Per-row argmax, lowest index on ties.
TagSequence argmax_decode(const Matrix& emissions);

// Forward + loss (+ backward when `grads` is non-null, accumulating).
double sentence_loss(const TaggerModel& model, const LabeledSentence& sentence, bool training,
                     Rng& rng, ModelGrads* grads);

std::vector<std::string> predict(const TaggerModel& model, const std::vector<std::string>& tokens);

std::vector<LabeledSentence> predict_all(const TaggerModel& model,
                                         const std::vector<std::vector<std::string>>& sentences);

// Clips the joint gradient norm to `clip_norm` (skipped when <= 0), then
// takes one SGD step. Pinned CRF transitions and frozen tables stay put.
// Returns the pre-clip norm.
double apply_sgd(TaggerModel& model, ModelGrads& grads, double lr, double clip_norm);

}  // namespace sekira
