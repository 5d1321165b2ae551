#include "sekira/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <unordered_set>

#include "sekira/errors.hpp"
#include "sekira/text.hpp"

namespace sekira {

Vocabulary::Vocabulary() {
  add(kUnkToken);
  add(kPadToken);
}

std::size_t Vocabulary::add(std::string_view item) {
  std::string key(item);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const std::size_t idx = items_.size();
  items_.push_back(key);
  index_.emplace(std::move(key), idx);
  return idx;
}

std::optional<std::size_t> Vocabulary::find(std::string_view item) const {
  if (auto it = index_.find(std::string(item)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t Vocabulary::lookup(std::string_view item) const {
  return find(item).value_or(kUnk);
}

void Vocabulary::save(std::ostream& out) const {
  out << items_.size() << '\n';
  for (const auto& item : items_) out << item.size() << ' ' << item << '\n';
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::size_t count = 0;
  if (!(in >> count)) throw DataError("vocabulary: missing entry count");
  in.get();
  std::vector<std::string> items;
  items.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t len = 0;
    if (!(in >> len) || in.get() != ' ') {
      throw DataError("vocabulary: bad length prefix for entry " + std::to_string(i));
    }
    std::string item(len, '\0');
    if (!in.read(item.data(), static_cast<std::streamsize>(len)) || in.get() != '\n') {
      throw DataError("vocabulary: truncated entry " + std::to_string(i));
    }
    items.push_back(std::move(item));
  }
  if (items.size() < 2 || items[kUnk] != kUnkToken || items[kPad] != kPadToken) {
    throw DataError("vocabulary: reserved entries missing");
  }
  Vocabulary v;
  for (std::size_t i = 2; i < items.size(); ++i) {
    if (v.add(items[i]) != i) throw DataError("vocabulary: duplicate entry '" + items[i] + "'");
  }
  return v;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences,
                       std::size_t min_count) {
  if (min_count < 1) throw UsageError("build_vocab: min_count must be >= 1");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence) {
      auto [it, inserted] = counts.try_emplace(token, 0);
      if (inserted) order.push_back(token);
      ++it->second;
    }
  }
  Vocabulary vocab;
  for (const auto& token : order) {
    if (counts[token] >= min_count) vocab.add(token);
  }
  return vocab;
}

Vocabulary build_char_vocab(const std::vector<std::vector<std::string>>& sentences) {
  Vocabulary vocab;
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence) {
      for (const auto& ch : text::utf8_chars(token)) vocab.add(ch);
    }
  }
  return vocab;
}

std::size_t EmbeddingTable::row_index(std::string_view token) const {
  if (auto idx = vocab.find(token)) return *idx;
  if (lowercase_fallback) {
    if (auto idx = vocab.find(text::to_lower(token))) return *idx;
  }
  return Vocabulary::kUnk;
}

EmbeddingTable random_embeddings(Vocabulary vocab, std::size_t dim, Rng& rng) {
  if (dim == 0) throw UsageError("embedding dimension must be >= 1");
  EmbeddingTable table;
  table.dim = dim;
  table.weights = uniform_init(vocab.size(), dim, std::sqrt(3.0 / static_cast<double>(dim)), rng);
  table.vocab = std::move(vocab);
  return table;
}

Vector lookup(const EmbeddingTable& table, std::string_view token) {
  const auto row = table.weights.row(table.row_index(token));
  return Vector(row.begin(), row.end());
}

namespace {

bool is_count(std::string_view field) {
  if (field.empty()) return false;
  for (char c : field) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::size_t parse_count(std::string_view field) {
  std::size_t v = 0;
  std::from_chars(field.data(), field.data() + field.size(), v);
  return v;
}

}  // namespace

PretrainedLoad load_pretrained(std::istream& source, const Vocabulary& vocab,
                               std::size_t dim_expected, Rng& rng,
                               const PretrainedOptions& options) {
  if (dim_expected == 0) throw UsageError("load_pretrained: dimension must be >= 1");

  std::unordered_set<std::string> wanted;
  for (std::size_t i = 2; i < vocab.size(); ++i) {
    wanted.insert(vocab.item_of(i));
    if (options.lowercase_fallback) wanted.insert(text::to_lower(vocab.item_of(i)));
  }

  PretrainedLoad result;
  std::unordered_map<std::string, Vector> vectors;
  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> warned;

  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(source, line)) {
    ++line_no;
    const auto fields = text::split_fields(line);
    if (fields.empty()) continue;
    if (first_content) {
      first_content = false;
      if (fields.size() == 2 && is_count(fields[0]) && is_count(fields[1])) {
        const std::size_t header_dim = parse_count(fields[1]);
        if (header_dim != dim_expected) {
          throw DataError("embedding header declares dimension " + std::to_string(header_dim) +
                              " but " + std::to_string(dim_expected) + " was expected",
                          line_no);
        }
        continue;
      }
    }
    if (fields.size() != dim_expected + 1) {
      throw DataError("expected a token and " + std::to_string(dim_expected) +
                          " values, found " + std::to_string(fields.size()) + " fields",
                      line_no);
    }
    Vector values(dim_expected);
    for (std::size_t k = 0; k < dim_expected; ++k) {
      const auto f = fields[k + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), values[k]);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(values[k])) {
        throw DataError("unparseable value '" + std::string(f) + "'", line_no);
      }
    }
    std::string token(fields[0]);
    if (!seen.insert(token).second && warned.insert(token).second) {
      result.warnings.push_back("duplicate vector for '" + token + "' at line " +
                                std::to_string(line_no) + "; last occurrence wins");
    }
    if (wanted.contains(token)) vectors[token] = std::move(values);
  }

  EmbeddingTable& table = result.table;
  table.vocab = vocab;
  table.dim = dim_expected;
  table.trainable = options.trainable;
  table.lowercase_fallback = options.lowercase_fallback;
  table.weights = uniform_init(vocab.size(), dim_expected,
                               0.5 / static_cast<double>(dim_expected), rng);

  std::size_t matched = 0;
  for (std::size_t i = 2; i < vocab.size(); ++i) {
    const auto& word = vocab.item_of(i);
    auto it = vectors.find(word);
    if (it == vectors.end() && options.lowercase_fallback) it = vectors.find(text::to_lower(word));
    if (it == vectors.end()) continue;
    std::copy(it->second.begin(), it->second.end(), table.weights.row(i).begin());
    ++matched;
  }
  result.report.matched = matched;
  result.report.total_unique = vocab.size() - 2;
  result.report.coverage = result.report.total_unique == 0
                               ? 0.0
                               : 100.0 * static_cast<double>(matched) /
                                     static_cast<double>(result.report.total_unique);
  return result;
}

}  // namespace sekira
