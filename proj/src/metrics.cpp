#include "sekira/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_set>

#include "sekira/errors.hpp"

namespace sekira {
namespace {

void check_aligned(const std::vector<LabeledSentence>& gold,
                   const std::vector<LabeledSentence>& pred) {
  if (gold.size() != pred.size()) {
    throw UsageError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                     std::to_string(pred.size()));
  }
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].tags.size() != pred[s].tags.size()) {
      throw UsageError("sentence " + std::to_string(s) + " has " +
                       std::to_string(gold[s].tags.size()) + " gold tags but " +
                       std::to_string(pred[s].tags.size()) + " predicted");
    }
  }
}

void finish(SpanScores& s) {
  s.precision = s.predicted == 0 ? 0.0 : 100.0 * static_cast<double>(s.correct) / static_cast<double>(s.predicted);
  s.recall = s.gold == 0 ? 0.0 : 100.0 * static_cast<double>(s.correct) / static_cast<double>(s.gold);
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
}

std::string score_line(const std::string& label, const SpanScores& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: precision: %.2f%%; recall: %.2f%%; F1: %.2f%%", label.c_str(),
                s.precision, s.recall, s.f1);
  return buf;
}

}  // namespace

std::vector<EntitySpan> extract_spans(const std::vector<std::string>& tags) {
  std::vector<EntitySpan> spans;
  bool open = false;
  EntitySpan cur;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& tag = tags[i];
    const bool begin = tag.starts_with("B-");
    const bool inside = tag.starts_with("I-");
    const std::string type = (begin || inside) ? tag.substr(2) : std::string();
    if (open && (!inside || type != cur.type)) {
      cur.end = i;
      spans.push_back(cur);
      open = false;
    }
    if ((begin || inside) && !open) {
      cur = {type, i, i};
      open = true;
    }
  }
  if (open) {
    cur.end = tags.size();
    spans.push_back(cur);
  }
  return spans;
}

EvalReport evaluate(const std::vector<LabeledSentence>& gold,
                    const std::vector<LabeledSentence>& pred) {
  check_aligned(gold, pred);
  EvalReport report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    report.tokens += gold[s].tags.size();
    const auto g = extract_spans(gold[s].tags);
    const auto p = extract_spans(pred[s].tags);
    const std::set<EntitySpan> gold_set(g.begin(), g.end());
    for (const auto& span : g) ++report.per_type[span.type].gold;
    for (const auto& span : p) {
      auto& scores = report.per_type[span.type];
      ++scores.predicted;
      if (gold_set.contains(span)) ++scores.correct;
    }
  }
  for (auto& [type, scores] : report.per_type) {
    finish(scores);
    report.overall.gold += scores.gold;
    report.overall.predicted += scores.predicted;
    report.overall.correct += scores.correct;
  }
  finish(report.overall);
  return report;
}

std::string format_report(const EvalReport& report) {
  std::string out = score_line("Overall", report.overall) + "\n";
  for (const auto& [type, scores] : report.per_type) out += score_line(type, scores) + "\n";
  return out;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  auto put = [&j](const std::string& prefix, const SpanScores& s) {
    j[prefix + ".precision"] = s.precision;
    j[prefix + ".recall"] = s.recall;
    j[prefix + ".f1"] = s.f1;
    j[prefix + ".gold"] = s.gold;
    j[prefix + ".predicted"] = s.predicted;
    j[prefix + ".correct"] = s.correct;
  };
  j["tokens"] = report.tokens;
  put("overall", report.overall);
  for (const auto& [type, scores] : report.per_type) put(type, scores);
  return j.dump(2);
}

std::size_t ConfusionMatrix::total(std::size_t gold_row) const {
  std::size_t sum = 0;
  for (auto c : counts.at(gold_row)) sum += c;
  return sum;
}

double ConfusionMatrix::percent(std::size_t gold_row) const {
  const std::size_t t = total(gold_row);
  return t == 0 ? 0.0 : 100.0 * static_cast<double>(counts[gold_row][gold_row]) / static_cast<double>(t);
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw UsageError("confusion matrix has no label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

ConfusionMatrix confusion(const std::vector<LabeledSentence>& gold,
                          const std::vector<LabeledSentence>& pred,
                          std::vector<std::string> labels) {
  check_aligned(gold, pred);
  std::unordered_set<std::string> known(labels.begin(), labels.end());
  for (const auto* side : {&gold, &pred}) {
    for (const auto& s : *side) {
      for (const auto& tag : s.tags) {
        if (known.insert(tag).second) labels.push_back(tag);
      }
    }
  }
  ConfusionMatrix m;
  m.labels = std::move(labels);
  m.counts.assign(m.labels.size(), std::vector<std::size_t>(m.labels.size(), 0));
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t i = 0; i < gold[s].tags.size(); ++i) {
      ++m.counts[m.index_of(gold[s].tags[i])][m.index_of(pred[s].tags[i])];
    }
  }
  return m;
}

std::string format_confusion(const ConfusionMatrix& m) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"Named Entity", "Total"};
  header.insert(header.end(), m.labels.begin(), m.labels.end());
  header.push_back("Percent");
  cells.push_back(std::move(header));
  for (std::size_t r = 0; r < m.labels.size(); ++r) {
    std::vector<std::string> row = {m.labels[r], std::to_string(m.total(r))};
    for (auto c : m.counts[r]) row.push_back(std::to_string(c));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", m.percent(r));
    row.emplace_back(buf);
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace sekira
