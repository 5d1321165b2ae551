#include "sekira/commands.hpp"

#include "sekira/errors.hpp"

namespace sekira {

EvalOutput evaluate_cmd(const TaggerModel& model, const Dataset& data) {
  if (data.sentences.empty()) throw DataError("evaluation dataset is empty");
  for (const auto& tag : data.tagset) model.tag_index(tag);
  EvalOutput out;
  out.predictions = predict_all(model, data.token_lists());
  out.report = evaluate(data.sentences, out.predictions);
  out.matrix = confusion(data.sentences, out.predictions, model.tagset);
  return out;
}

void tag_cmd(const TaggerModel& model, std::istream& input, std::ostream& output) {
  const auto sentences = parse_token_file(input);
  write_column_file(output, predict_all(model, sentences));
}

}  // namespace sekira
