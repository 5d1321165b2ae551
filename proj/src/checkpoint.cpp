#include "sekira/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "sekira/errors.hpp"
#include "sekira/text.hpp"

namespace sekira {
namespace {

constexpr std::size_t kConfigEntries = 17;

class Cursor {
 public:
  explicit Cursor(std::string_view data) : data_(data) {}

  std::string_view line() {
    if (pos_ >= data_.size()) throw CorruptCheckpoint("checkpoint is truncated");
    const auto nl = data_.find('\n', pos_);
    if (nl == std::string_view::npos) throw CorruptCheckpoint("checkpoint is truncated");
    auto out = data_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return out;
  }

  std::string_view bytes(std::size_t n) {
    if (pos_ + n > data_.size()) throw CorruptCheckpoint("checkpoint is truncated");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  void expect(char c) {
    if (pos_ >= data_.size() || data_[pos_] != c) throw CorruptCheckpoint("checkpoint is malformed");
    ++pos_;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw CorruptCheckpoint("expected an unsigned integer, found '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw CorruptCheckpoint("expected an unsigned integer, found '" + std::string(s) + "'");
  }
  return v;
}

// "<keyword> <value>"
std::string_view keyed(Cursor& cur, std::string_view keyword) {
  const auto l = cur.line();
  if (!l.starts_with(keyword) || l.size() <= keyword.size() || l[keyword.size()] != ' ') {
    throw CorruptCheckpoint("expected '" + std::string(keyword) + "' section");
  }
  return l.substr(keyword.size() + 1);
}

void write_list(std::ostream& out, const std::vector<std::string>& items) {
  out << items.size() << '\n';
  for (const auto& item : items) out << item.size() << ' ' << item << '\n';
}

std::vector<std::string> read_list(Cursor& cur, std::string_view keyword) {
  const std::size_t count = parse_size(keyed(cur, keyword));
  std::vector<std::string> items;
  for (std::size_t i = 0; i < count; ++i) {
    // Length prefix runs up to the first space.
    std::string digits;
    for (;;) {
      const auto c = cur.bytes(1)[0];
      if (c == ' ') break;
      digits.push_back(c);
      if (digits.size() > 20) throw CorruptCheckpoint("bad list length prefix");
    }
    const std::size_t len = parse_size(digits);
    items.emplace_back(cur.bytes(len));
    cur.expect('\n');
  }
  return items;
}

Vocabulary vocab_from(const std::vector<std::string>& items) {
  if (items.size() < 2 || items[Vocabulary::kUnk] != Vocabulary::kUnkToken ||
      items[Vocabulary::kPad] != Vocabulary::kPadToken) {
    throw CorruptCheckpoint("vocabulary lacks its reserved entries");
  }
  Vocabulary v;
  for (std::size_t i = 2; i < items.size(); ++i) {
    if (v.add(items[i]) != i) throw CorruptCheckpoint("vocabulary repeats '" + items[i] + "'");
  }
  return v;
}

std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& c) {
  auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
  return {
      {"lr", hex_double(c.lr)},
      {"dropout", hex_double(c.dropout)},
      {"epochs", std::to_string(c.epochs)},
      {"seed", std::to_string(c.seed)},
      {"clip_norm", hex_double(c.clip_norm)},
      {"lr_decay", hex_double(c.lr_decay)},
      {"char_dim", std::to_string(c.char_dim)},
      {"word_dim", std::to_string(c.word_dim)},
      {"char_hidden", std::to_string(c.char_hidden)},
      {"word_hidden", std::to_string(c.word_hidden)},
      {"char_highway", flag(c.char_highway)},
      {"word_highway", flag(c.word_highway)},
      {"freeze_embeddings", flag(c.freeze_embeddings)},
      {"lowercase_fallback", flag(c.lowercase_fallback)},
      {"constrain_transitions", flag(c.constrain_transitions)},
      {"use_crf", flag(c.use_crf)},
      {"embeddings_path", std::to_string(c.embeddings_path.size()) + " " + c.embeddings_path},
  };
}

TrainConfig read_config(Cursor& cur) {
  if (parse_size(keyed(cur, "config")) != kConfigEntries) {
    throw CorruptCheckpoint("unexpected number of config entries");
  }
  std::map<std::string, std::string, std::less<>> kv;
  for (std::size_t i = 0; i < kConfigEntries; ++i) {
    const auto l = cur.line();
    const auto sp = l.find(' ');
    if (sp == std::string_view::npos) throw CorruptCheckpoint("malformed config line");
    kv.emplace(std::string(l.substr(0, sp)), std::string(l.substr(sp + 1)));
  }
  auto get = [&](std::string_view key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw CorruptCheckpoint("config entry '" + std::string(key) + "' missing");
    return it->second;
  };
  auto flag = [&](std::string_view key) {
    const auto& v = get(key);
    if (v != "0" && v != "1") throw CorruptCheckpoint("config flag '" + std::string(key) + "' is not 0/1");
    return v == "1";
  };
  TrainConfig c;
  c.lr = parse_hex_double(get("lr"));
  c.dropout = parse_hex_double(get("dropout"));
  c.epochs = parse_size(get("epochs"));
  c.seed = parse_u64(get("seed"));
  c.clip_norm = parse_hex_double(get("clip_norm"));
  c.lr_decay = parse_hex_double(get("lr_decay"));
  c.char_dim = parse_size(get("char_dim"));
  c.word_dim = parse_size(get("word_dim"));
  c.char_hidden = parse_size(get("char_hidden"));
  c.word_hidden = parse_size(get("word_hidden"));
  c.char_highway = flag("char_highway");
  c.word_highway = flag("word_highway");
  c.freeze_embeddings = flag("freeze_embeddings");
  c.lowercase_fallback = flag("lowercase_fallback");
  c.constrain_transitions = flag("constrain_transitions");
  c.use_crf = flag("use_crf");
  const auto& path = get("embeddings_path");
  const auto sp = path.find(' ');
  if (sp == std::string::npos || parse_size(std::string_view(path).substr(0, sp)) != path.size() - sp - 1) {
    throw CorruptCheckpoint("malformed embeddings_path entry");
  }
  c.embeddings_path = path.substr(sp + 1);
  return c;
}

}  // namespace

std::string hex_double(double v) {
  char buf[64];
  std::string out;
  if (std::signbit(v)) {
    out.push_back('-');
    v = -v;
  }
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  out += "0x";
  out.append(buf, ptr);
  return out;
}

double parse_hex_double(std::string_view s) {
  bool negative = false;
  if (s.starts_with('-')) {
    negative = true;
    s.remove_prefix(1);
  }
  if (!s.starts_with("0x")) throw CorruptCheckpoint("bad float literal '" + std::string(s) + "'");
  s.remove_prefix(2);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || s.front() == '-') {
    throw CorruptCheckpoint("bad float literal '0x" + std::string(s) + "'");
  }
  return negative ? -v : v;
}

void save_checkpoint(const Checkpoint& checkpoint, std::ostream& out) {
  TaggerModel model = checkpoint.model;
  out << kCheckpointMagic << " v" << kCheckpointVersion << '\n';
  const auto entries = config_entries(checkpoint.config);
  out << "config " << entries.size() << '\n';
  for (const auto& [k, v] : entries) out << k << ' ' << v << '\n';
  out << "best_valid_f1 " << hex_double(checkpoint.best_valid_f1) << '\n';
  out << "tagset ";
  write_list(out, model.tagset);
  out << "words ";
  write_list(out, model.encoder.words.vocab.items());
  out << "chars ";
  write_list(out, model.encoder.chars.vocab.items());
  const auto tensors = model.tensors();
  out << "tensors " << tensors.size() << '\n';
  for (const auto& t : tensors) {
    out << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      if (i > 0) out << ' ';
      out << hex_double(t.data[i]);
    }
    out << '\n';
  }
  out << "end\n";
}

Checkpoint load_checkpoint(std::istream& source) {
  const std::string data{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
  Cursor cur(data);

  const std::string header(cur.line());
  const std::string magic = std::string(kCheckpointMagic) + " v";
  if (!header.starts_with(magic)) throw CorruptCheckpoint("not a sekira checkpoint");
  std::size_t version = 0;
  try {
    version = parse_size(std::string_view(header).substr(magic.size()));
  } catch (const CorruptCheckpoint&) {
    throw CorruptCheckpoint("unreadable checkpoint version '" + header + "'");
  }
  if (version != static_cast<std::size_t>(kCheckpointVersion)) {
    throw VersionMismatch("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }

  Checkpoint ck;
  ck.config = read_config(cur);
  ck.best_valid_f1 = parse_hex_double(keyed(cur, "best_valid_f1"));
  auto tagset = read_list(cur, "tagset");
  auto words = vocab_from(read_list(cur, "words"));
  auto chars = vocab_from(read_list(cur, "chars"));
  if (tagset.empty()) throw CorruptCheckpoint("empty tagset");

  // Build a skeleton with the right shapes, then overwrite every tensor.
  TaggerModel& model = ck.model;
  model.tagset = std::move(tagset);
  model.output = ck.config.use_crf ? OutputLayer::kCrf : OutputLayer::kSoftmax;
  Rng scratch(0);
  try {
    model.encoder = init_encoder(ck.config.encoder_config(), std::move(words), std::move(chars),
                                 model.tagset.size(), scratch);
  } catch (const UsageError& e) {
    throw CorruptCheckpoint(std::string("inconsistent configuration: ") + e.what());
  }
  model.encoder.words.trainable = !ck.config.freeze_embeddings;
  model.encoder.words.lowercase_fallback = ck.config.lowercase_fallback;
  try {
    model.crf = ck.config.constrain_transitions ? constrained_transitions(model.tagset)
                                                : CrfParams::zeros(model.tagset.size());
  } catch (const DataError& e) {
    throw CorruptCheckpoint(std::string("bad tagset: ") + e.what());
  }

  auto expected = model.tensors();
  std::map<std::string, TensorRef*, std::less<>> by_name;
  for (auto& t : expected) by_name[t.name] = &t;

  const std::size_t count = parse_size(keyed(cur, "tensors"));
  std::map<std::string, bool, std::less<>> seen;
  for (std::size_t n = 0; n < count; ++n) {
    const auto fields = text::split_fields(cur.line());
    if (fields.size() != 3) throw CorruptCheckpoint("malformed tensor header");
    const std::string name(fields[0]);
    auto it = by_name.find(name);
    if (it == by_name.end()) throw CorruptCheckpoint("unknown tensor '" + name + "'");
    if (!seen.emplace(name, true).second) throw CorruptCheckpoint("tensor '" + name + "' repeated");
    TensorRef& t = *it->second;
    const std::size_t rows = parse_size(fields[1]);
    const std::size_t cols = parse_size(fields[2]);
    if (rows != t.rows || cols != t.cols) {
      throw ShapeMismatch("tensor '" + name + "' is " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " in the file but the model expects " + std::to_string(t.rows) + "x" +
                          std::to_string(t.cols));
    }
    const auto values = text::split_fields(cur.line());
    if (values.size() != t.data.size()) {
      throw CorruptCheckpoint("tensor '" + name + "' has " + std::to_string(values.size()) +
                              " values, expected " + std::to_string(t.data.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) t.data[i] = parse_hex_double(values[i]);
  }
  if (seen.size() != expected.size()) throw CorruptCheckpoint("checkpoint is missing tensors");
  if (cur.line() != "end" || !cur.at_end()) throw CorruptCheckpoint("trailing data after tensors");
  return ck;
}

void save_checkpoint_file(const Checkpoint& checkpoint, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  save_checkpoint(checkpoint, out);
  if (!out) throw DataError("failed writing " + path);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path);
  return load_checkpoint(in);
}

}  // namespace sekira
