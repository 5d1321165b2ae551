#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "sekira/corpus.hpp"
#include "sekira/tagger.hpp"

namespace sekira {

struct TrainConfig {
  double lr = 0.005;
  double dropout = 0.5;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  // lr / (1 + lr_decay * epoch); 0 keeps the rate constant.
  double lr_decay = 0.0;

  std::size_t char_dim = 25;
  std::size_t word_dim = 100;
  std::size_t char_hidden = 25;
  std::size_t word_hidden = 100;
  bool char_highway = false;
  bool word_highway = false;

  std::string embeddings_path;
  bool freeze_embeddings = false;
  bool lowercase_fallback = true;

  bool constrain_transitions = false;
  bool use_crf = true;

  EncoderConfig encoder_config() const;
  // Throws UsageError on out-of-range values.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;  // summed over training sentences
  double valid_f1 = 0.0;
};

struct TrainResult {
  TaggerModel model;  // parameters of the best validation epoch
  double best_valid_f1 = 0.0;
  std::size_t best_epoch = 0;
  std::vector<EpochLog> history;  // epoch 0 is the untrained model
};

// Builds vocabularies and tagset from `train`, initializes from
// config.seed, and runs per-sentence SGD for config.epochs epochs,
// keeping the parameters with the highest overall validation F1 (later
// epochs win ties). Progress goes to `log` when given.
TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& valid_set,
                  std::ostream* log = nullptr);

// Fresh model for the given data, before any update.
TaggerModel initial_model(const TrainConfig& config, const Dataset& train_set, Rng& rng,
                          std::ostream* log = nullptr);

}  // namespace sekira
