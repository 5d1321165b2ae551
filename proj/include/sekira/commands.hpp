#pragma once

#include <istream>
#include <ostream>
#include <vector>

#include "sekira/corpus.hpp"
#include "sekira/metrics.hpp"
#include "sekira/tagger.hpp"

namespace sekira {

struct EvalOutput {
  EvalReport report;
  ConfusionMatrix matrix;
  std::vector<LabeledSentence> predictions;
};

// Decodes every sentence and scores it. Throws DataError for an empty
// dataset or tags the model was not trained with.
EvalOutput evaluate_cmd(const TaggerModel& model, const Dataset& data);

// Reads untagged token-per-line input and writes "token tag" lines with a
// blank line after each sentence.
void tag_cmd(const TaggerModel& model, std::istream& input, std::ostream& output);

}  // namespace sekira
