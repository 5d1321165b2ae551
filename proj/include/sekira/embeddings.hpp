#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sekira/numerics.hpp"

namespace sekira {

// Dense string <-> index mapping. Index 0 is always UNK and index 1 PAD.
class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kPad = 1;
  static constexpr std::string_view kUnkToken = "<unk>";
  static constexpr std::string_view kPadToken = "<pad>";

  Vocabulary();

  // Appends `item` unless present; returns its index either way.
  std::size_t add(std::string_view item);

  std::optional<std::size_t> find(std::string_view item) const;
  // Index of `item`, or kUnk.
  std::size_t lookup(std::string_view item) const;
  const std::string& item_of(std::size_t index) const { return items_.at(index); }

  std::size_t size() const noexcept { return items_.size(); }
  const std::vector<std::string>& items() const noexcept { return items_; }

  // Length-prefixed UTF-8 list: "<count>\n" then "<bytes> <item>\n" per entry.
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  bool operator==(const Vocabulary& other) const { return items_ == other.items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Tokens with frequency >= min_count, in first-occurrence order.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences,
                       std::size_t min_count = 1);

// Every code point of every token; no frequency threshold.
Vocabulary build_char_vocab(const std::vector<std::vector<std::string>>& sentences);

struct EmbeddingTable {
  Vocabulary vocab;
  std::size_t dim = 0;
  Matrix weights;  // vocab.size() x dim
  bool trainable = true;
  // Try the lowercased token before falling back to UNK.
  bool lowercase_fallback = true;

  std::size_t row_index(std::string_view token) const;
};

// Rows uniform in +-sqrt(3 / dim), i.e. unit variance per entry.
EmbeddingTable random_embeddings(Vocabulary vocab, std::size_t dim, Rng& rng);

// Row for the token, or the UNK row.
Vector lookup(const EmbeddingTable& table, std::string_view token);

struct CoverageReport {
  std::size_t matched = 0;
  std::size_t total_unique = 0;  // vocabulary entries excluding UNK and PAD
  double coverage = 0.0;         // percent
};

struct PretrainedLoad {
  EmbeddingTable table;
  CoverageReport report;
  std::vector<std::string> warnings;
};

struct PretrainedOptions {
  bool lowercase_fallback = true;
  bool trainable = true;
};

// Reads the word-vector text format: optional "<count> <dim>" header line,
// then "<token> <f1> ... <fdim>" per line. Matched vocabulary rows are
// copied, all others are uniform in +-0.5/dim. When the same token occurs
// twice the last vector wins and one warning is recorded for it.
PretrainedLoad load_pretrained(std::istream& source, const Vocabulary& vocab,
                               std::size_t dim_expected, Rng& rng,
                               const PretrainedOptions& options = {});

}  // namespace sekira
