#include "sekira/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "sekira/errors.hpp"
#include "sekira/metrics.hpp"

namespace sekira {
namespace {

// Separates the shuffling/dropout stream from the initialization stream.
constexpr std::uint64_t kTrainStream = 0x5eb1a7e0d15ea5e5ULL;

double valid_f1(const TaggerModel& model, const Dataset& valid) {
  const auto pred = predict_all(model, valid.token_lists());
  return evaluate(valid.sentences, pred).overall.f1;
}

}  // namespace

EncoderConfig TrainConfig::encoder_config() const {
  EncoderConfig c;
  c.char_dim = char_dim;
  c.word_dim = word_dim;
  c.char_hidden = char_hidden;
  c.word_hidden = word_hidden;
  c.use_char_highway = char_highway;
  c.use_word_highway = word_highway;
  c.dropout_rate = dropout;
  return c;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw UsageError("learning rate must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("dropout must lie in [0, 1)");
  if (clip_norm < 0.0) throw UsageError("clip norm must be >= 0 (0 disables clipping)");
  if (lr_decay < 0.0) throw UsageError("learning-rate decay must be >= 0");
  encoder_config().validate();
}

TaggerModel initial_model(const TrainConfig& config, const Dataset& train_set, Rng& rng,
                          std::ostream* log) {
  config.validate();
  if (train_set.sentences.empty()) throw DataError("training set is empty");
  const auto tokens = train_set.token_lists();
  Vocabulary words = build_vocab(tokens, 1);
  Vocabulary chars = build_char_vocab(tokens);

  std::optional<EmbeddingTable> pretrained;
  if (!config.embeddings_path.empty()) {
    std::ifstream in(config.embeddings_path);
    if (!in) throw DataError("cannot open embeddings file " + config.embeddings_path);
    PretrainedOptions opts;
    opts.lowercase_fallback = config.lowercase_fallback;
    opts.trainable = !config.freeze_embeddings;
    auto loaded = load_pretrained(in, words, config.word_dim, rng, opts);
    if (log) {
      for (const auto& w : loaded.warnings) *log << "warning: " << w << '\n';
      char buf[128];
      std::snprintf(buf, sizeof buf, "pretrained vectors cover %zu of %zu words (%.2f%%)\n",
                    loaded.report.matched, loaded.report.total_unique, loaded.report.coverage);
      *log << buf;
    }
    pretrained = std::move(loaded.table);
  }

  TaggerModel model;
  model.tagset = train_set.tagset;
  model.output = config.use_crf ? OutputLayer::kCrf : OutputLayer::kSoftmax;
  model.encoder = init_encoder(config.encoder_config(), std::move(words), std::move(chars),
                               model.tagset.size(), rng, std::move(pretrained));
  model.encoder.words.lowercase_fallback = config.lowercase_fallback;
  if (config.freeze_embeddings) model.encoder.words.trainable = false;
  model.crf = config.constrain_transitions ? constrained_transitions(model.tagset)
                                           : CrfParams::zeros(model.tagset.size());
  return model;
}

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& valid_set,
                  std::ostream* log) {
  Rng init_rng(config.seed);
  TrainResult result;
  result.model = initial_model(config, train_set, init_rng, log);
  TaggerModel& best = result.model;
  for (const auto& s : valid_set.sentences) {
    for (const auto& tag : s.tags) {
      if (std::find(best.tagset.begin(), best.tagset.end(), tag) == best.tagset.end()) {
        throw DataError("validation tag '" + tag + "' does not occur in the training set");
      }
    }
  }
  if (config.constrain_transitions && log) {
    std::size_t bad = 0;
    for (const auto& s : train_set.sentences) bad += validate_iob(s.tags).empty() ? 0 : 1;
    if (bad > 0) {
      *log << "warning: " << bad
           << " training sentences violate IOB2 and are unreachable under constrained transitions\n";
    }
  }

  auto score = [&](const TaggerModel& m) {
    return valid_set.sentences.empty() ? 0.0 : valid_f1(m, valid_set);
  };

  TaggerModel model = best;
  result.best_valid_f1 = score(model);
  result.best_epoch = 0;
  result.history.push_back({0, 0.0, result.best_valid_f1});

  Rng rng(config.seed ^ kTrainStream);
  ModelGrads grads = ModelGrads::zeros_like(model);
  std::vector<std::size_t> order(train_set.sentences.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = config.lr / (1.0 + config.lr_decay * static_cast<double>(epoch - 1));
    rng.shuffle(order);
    double total = 0.0;
    for (auto idx : order) {
      grads.set_zero();
      total += sentence_loss(model, train_set.sentences[idx], true, rng, &grads);
      apply_sgd(model, grads, lr, config.clip_norm);
    }
    const double f1 = score(model);
    result.history.push_back({epoch, total, f1});
    if (f1 >= result.best_valid_f1) {
      result.best_valid_f1 = f1;
      result.best_epoch = epoch;
      best = model;
    }
    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "epoch %zu  loss %.4f  valid F1 %.2f%s\n", epoch, total, f1,
                    result.best_epoch == epoch ? "  *" : "");
      *log << buf << std::flush;
    }
  }
  return result;
}

}  // namespace sekira
