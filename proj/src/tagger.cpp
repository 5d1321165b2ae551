#include "sekira/tagger.hpp"

#include <algorithm>
#include <cmath>

#include "sekira/errors.hpp"

namespace sekira {

std::size_t TaggerModel::tag_index(const std::string& tag) const {
  auto it = std::find(tagset.begin(), tagset.end(), tag);
  if (it == tagset.end()) throw DataError("tag '" + tag + "' is not in the model's tagset");
  return static_cast<std::size_t>(it - tagset.begin());
}

TagSequence TaggerModel::tag_indices(const std::vector<std::string>& tags) const {
  TagSequence out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(tag_index(t));
  return out;
}

std::vector<TensorRef> TaggerModel::tensors() {
  auto out = encoder.tensors();
  out.push_back({"crf.transitions", crf.transitions.data(), crf.transitions.rows(),
                 crf.transitions.cols()});
  return out;
}

ModelGrads ModelGrads::zeros_like(const TaggerModel& model) {
  return {EncoderGrads::zeros_like(model.encoder),
          Matrix(model.crf.transitions.rows(), model.crf.transitions.cols())};
}

void ModelGrads::set_zero() {
  encoder.set_zero();
  transitions.fill(0.0);
}

std::vector<std::span<double>> ModelGrads::buffers() {
  std::vector<std::span<double>> out;
  for (auto& t : encoder.weights.tensors()) out.push_back(t.data);
  for (auto& [id, row] : encoder.char_rows) out.push_back(row);
  for (auto& [id, row] : encoder.word_rows) out.push_back(row);
  out.push_back(transitions.data());
  return out;
}

SoftmaxResult token_softmax_loss(const Matrix& emissions, const TagSequence& gold) {
  if (gold.size() != emissions.rows()) throw UsageError("softmax loss: length mismatch");
  SoftmaxResult r;
  r.d_emissions = Matrix(emissions.rows(), emissions.cols());
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    const auto row = emissions.row(t);
    const double lse = log_sum_exp(row);
    r.loss += lse - row[gold[t]];
    auto d = r.d_emissions.row(t);
    for (std::size_t j = 0; j < row.size(); ++j) d[j] = std::exp(row[j] - lse);
    d[gold[t]] -= 1.0;
  }
  return r;
}

TagSequence argmax_decode(const Matrix& emissions) {
  TagSequence out(emissions.rows());
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    const auto row = emissions.row(t);
    out[t] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double sentence_loss(const TaggerModel& model, const LabeledSentence& sentence, bool training,
                     Rng& rng, ModelGrads* grads) {
  const TagSequence gold = model.tag_indices(sentence.tags);
  EncoderCache cache;
  const Matrix emissions =
      encode_sentence(model.encoder, sentence.tokens, training, rng, grads ? &cache : nullptr);
  if (model.output == OutputLayer::kSoftmax) {
    auto r = token_softmax_loss(emissions, gold);
    if (grads) encoder_backward(model.encoder, cache, r.d_emissions, grads->encoder);
    return r.loss;
  }
  auto r = nll_loss(model.crf, emissions, gold);
  if (grads) {
    encoder_backward(model.encoder, cache, r.d_emissions, grads->encoder);
    auto dst = grads->transitions.data();
    auto src = r.d_transitions.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return r.loss;
}

std::vector<std::string> predict(const TaggerModel& model, const std::vector<std::string>& tokens) {
  Rng unused(0);
  const Matrix emissions = encode_sentence(model.encoder, tokens, false, unused);
  const TagSequence ids = model.output == OutputLayer::kCrf
                              ? viterbi_decode(model.crf, emissions).tags
                              : argmax_decode(emissions);
  std::vector<std::string> tags;
  tags.reserve(ids.size());
  for (auto id : ids) tags.push_back(model.tagset[id]);
  return tags;
}

std::vector<LabeledSentence> predict_all(const TaggerModel& model,
                                         const std::vector<std::vector<std::string>>& sentences) {
  std::vector<LabeledSentence> out;
  out.reserve(sentences.size());
  for (const auto& tokens : sentences) out.push_back({tokens, predict(model, tokens)});
  return out;
}

double apply_sgd(TaggerModel& model, ModelGrads& grads, double lr, double clip_norm) {
  model.crf.mask_gradient(grads.transitions);
  auto buffers = grads.buffers();
  const double norm = clip_norm > 0.0 ? clip_gradients(buffers, clip_norm) : global_norm(buffers);

  auto params = model.encoder.weights.tensors();
  auto pgrads = grads.encoder.weights.tensors();
  for (std::size_t i = 0; i < params.size(); ++i) sgd_step(params[i].data, pgrads[i].data, lr);
  if (model.encoder.chars.trainable) {
    for (auto& [id, row] : grads.encoder.char_rows) {
      sgd_step(model.encoder.chars.weights.row(id), row, lr);
    }
  }
  if (model.encoder.words.trainable) {
    for (auto& [id, row] : grads.encoder.word_rows) {
      sgd_step(model.encoder.words.weights.row(id), row, lr);
    }
  }
  if (model.output == OutputLayer::kCrf) {
    sgd_step(model.crf.transitions.data(), grads.transitions.data(), lr);
  }
  return norm;
}

}  // namespace sekira
