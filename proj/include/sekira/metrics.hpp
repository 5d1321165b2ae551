#pragma once

// Entity-level scoring with conlleval semantics and token-level confusion
// matrices.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "sekira/corpus.hpp"

namespace sekira {

struct EntitySpan {
  std::string type;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  auto operator<=>(const EntitySpan&) const = default;
};

// B-X opens a span; I-X continues a span of type X and otherwise opens one
// (conlleval leniency); O closes.
std::vector<EntitySpan> extract_spans(const std::vector<std::string>& tags);

struct SpanScores {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::map<std::string, SpanScores> per_type;
  SpanScores overall;
  std::size_t tokens = 0;
};

// Exact (type, start, end) matching, micro-averaged overall.
// Throws UsageError when sentences or their lengths do not line up.
EvalReport evaluate(const std::vector<LabeledSentence>& gold,
                    const std::vector<LabeledSentence>& pred);

// "Overall: precision: PP.PP%; recall: RR.RR%; F1: FF.FF%" followed by one
// such line per type.
std::string format_report(const EvalReport& report);

// Flat JSON object: "overall.precision", "PER.f1", "overall.gold", ...
std::string report_to_json(const EvalReport& report);

struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;  // [gold][predicted]

  std::size_t total(std::size_t gold_row) const;
  // 100 * diagonal / row total; 0 for an empty row.
  double percent(std::size_t gold_row) const;
  std::size_t index_of(const std::string& label) const;
};

// Labels default to first occurrence across gold, then predicted tags.
ConfusionMatrix confusion(const std::vector<LabeledSentence>& gold,
                          const std::vector<LabeledSentence>& pred,
                          std::vector<std::string> labels = {});

// Table layout: "Named Entity", "Total", one column per predicted label,
// "Percent" with three decimals.
std::string format_confusion(const ConfusionMatrix& matrix);

}  // namespace sekira
