#include "sekira/corpus.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include "sekira/errors.hpp"
#include "sekira/numerics.hpp"
#include "sekira/text.hpp"

namespace sekira {

std::vector<std::vector<std::string>> Dataset::token_lists() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.tokens);
  return out;
}

bool is_valid_tag(const std::string& tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

Dataset make_dataset(std::vector<LabeledSentence> sentences) {
  Dataset d;
  std::unordered_set<std::string> seen;
  for (const auto& s : sentences) {
    for (const auto& tag : s.tags) {
      if (seen.insert(tag).second) d.tagset.push_back(tag);
    }
  }
  d.sentences = std::move(sentences);
  return d;
}

Dataset parse_column_file(std::istream& source) {
  std::vector<LabeledSentence> sentences;
  LabeledSentence current;
  auto flush = [&] {
    if (!current.tokens.empty()) sentences.push_back(std::move(current));
    current = {};
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    const auto fields = text::split_fields(line);
    if (fields.empty()) {
      flush();
      continue;
    }
    if (fields[0].starts_with("-DOCSTART-")) {
      flush();
      continue;
    }
    if (fields.size() < 2) {
      throw DataError("expected a token and a tag, found a single field", line_no);
    }
    std::string tag(fields.back());
    if (!is_valid_tag(tag)) {
      throw DataError("tag '" + tag + "' is not O, B-TYPE or I-TYPE", line_no);
    }
    current.tokens.emplace_back(fields.front());
    current.tags.push_back(std::move(tag));
  }
  flush();
  return make_dataset(std::move(sentences));
}

std::vector<std::vector<std::string>> parse_token_file(std::istream& source) {
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!text::is_valid_utf8(line)) throw DataError("invalid UTF-8", line_no);
    const auto fields = text::split_fields(line);
    if (fields.empty()) {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
      continue;
    }
    current.emplace_back(fields.front());
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

void write_column_file(std::ostream& out, const std::vector<LabeledSentence>& sentences) {
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) out << s.tokens[i] << ' ' << s.tags[i] << '\n';
    out << '\n';
  }
}

std::vector<IobViolation> validate_iob(const std::vector<std::string>& tags) {
  std::vector<IobViolation> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& tag = tags[i];
    if (!tag.starts_with("I-")) continue;
    const std::string type = tag.substr(2);
    const bool continues = i > 0 && (tags[i - 1] == "B-" + type || tags[i - 1] == "I-" + type);
    if (!continues) out.push_back({i, tag});
  }
  return out;
}

std::vector<std::string> iob1_to_iob2(const std::vector<std::string>& tags) {
  std::vector<std::string> out = tags;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!tags[i].starts_with("I-")) continue;
    const std::string type = tags[i].substr(2);
    const bool continues = i > 0 && tags[i - 1].size() > 2 && tags[i - 1].substr(2) == type;
    if (!continues) out[i] = "B-" + type;
  }
  return out;
}

Split split_dataset(const Dataset& data, const std::array<double, 3>& ratios, std::uint64_t seed) {
  if (data.sentences.empty()) throw UsageError("split_dataset: empty dataset");
  for (double r : ratios) {
    if (r < 0.0) throw UsageError("split_dataset: negative ratio");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw UsageError("split_dataset: ratios must sum to 1");
  }
  const std::size_t n = data.sentences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  const auto count = [n](double r) {
    return static_cast<std::size_t>(std::llround(r * static_cast<double>(n)));
  };
  const std::size_t n_train = std::min(n, count(ratios[0]));
  const std::size_t n_valid = std::min(n - n_train, count(ratios[1]));

  std::vector<LabeledSentence> parts[3];
  for (std::size_t k = 0; k < n; ++k) {
    const int part = k < n_train ? 0 : (k < n_train + n_valid ? 1 : 2);
    parts[part].push_back(data.sentences[order[k]]);
  }
  return {make_dataset(std::move(parts[0])), make_dataset(std::move(parts[1])),
          make_dataset(std::move(parts[2]))};
}

DatasetStats compute_stats(const Dataset& data) {
  DatasetStats stats;
  for (const auto& s : data.sentences) {
    stats.tokens += s.tokens.size();
    for (const auto& token : s.tokens) {
      if (text::has_letter_or_digit(token)) ++stats.words_and_numbers;
    }
    for (const auto& tag : s.tags) {
      if (tag.starts_with("B-")) ++stats.entities[tag.substr(2)];
    }
  }
  return stats;
}

}  // namespace sekira
