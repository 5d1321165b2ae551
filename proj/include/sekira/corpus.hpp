#pragma once

// Token-per-line annotated corpora (CoNLL style): one token per line, tag in
// the last column, blank lines between sentences.

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace sekira {

struct LabeledSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;

  bool operator==(const LabeledSentence&) const = default;
};

struct Dataset {
  std::vector<LabeledSentence> sentences;
  std::vector<std::string> tagset;  // first-occurrence order

  std::vector<std::vector<std::string>> token_lists() const;
};

// True for "O", "B-TYPE" and "I-TYPE" with a non-empty TYPE.
bool is_valid_tag(const std::string& tag);

// Throws DataError (with the 1-based line number) for a line with a single
// field or a tag outside the O / B-TYPE / I-TYPE pattern. Lines starting
// with -DOCSTART- are skipped.
Dataset parse_column_file(std::istream& source);

// Untagged input for tagging: first field of each line is the token, blank
// lines separate sentences. Throws DataError on invalid UTF-8.
std::vector<std::vector<std::string>> parse_token_file(std::istream& source);

// "token tag" per line, blank line after every sentence.
void write_column_file(std::ostream& out, const std::vector<LabeledSentence>& sentences);

// Rebuilds the tagset from the sentences in first-occurrence order.
Dataset make_dataset(std::vector<LabeledSentence> sentences);

struct IobViolation {
  std::size_t position;
  std::string tag;

  bool operator==(const IobViolation&) const = default;
};

// IOB2: every I-X must follow B-X or I-X.
std::vector<IobViolation> validate_iob(const std::vector<std::string>& tags);

// IOB1 (I- opens an entity unless it continues the same type; B- only
// separates adjacent same-type entities) to IOB2.
std::vector<std::string> iob1_to_iob2(const std::vector<std::string>& tags);

struct Split {
  Dataset train, valid, test;
};

// Seeded shuffle, then contiguous blocks of round(r0*n) and round(r1*n)
// sentences; the remainder goes to test.
Split split_dataset(const Dataset& data, const std::array<double, 3>& ratios, std::uint64_t seed);

struct DatasetStats {
  std::size_t tokens = 0;
  std::size_t words_and_numbers = 0;  // tokens containing a letter or digit
  std::map<std::string, std::size_t> entities;  // B-TYPE count per type
};

DatasetStats compute_stats(const Dataset& data);

}  // namespace sekira
