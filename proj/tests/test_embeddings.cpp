#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sekira/embeddings.hpp"
#include "sekira/errors.hpp"

using namespace sekira;

namespace {

using Sentences = std::vector<std::vector<std::string>>;

Vocabulary vocab_of(const std::vector<std::string>& words) {
  Vocabulary v;
  for (const auto& w : words) v.add(w);
  return v;
}

}  // namespace

TEST_CASE("vocabulary building") {
  const Sentences two{{"a", "b", "a"}, {"b", "c"}};
  CHECK(build_vocab(two, 2).items() == std::vector<std::string>{"<unk>", "<pad>", "a", "b"});
  CHECK(build_vocab({}, 1).size() == 2);
  CHECK(build_vocab({{"x"}}, 1).items() == std::vector<std::string>{"<unk>", "<pad>", "x"});
  CHECK_THROWS_AS(build_vocab(two, 0), UsageError);
}

TEST_CASE("vocabulary indices are dense and invertible") {
  const auto v = build_vocab({{"Москва", "the", "x"}, {"y", "the"}});
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.lookup(v.item_of(i)) == i);
  CHECK(v.lookup("never-seen") == Vocabulary::kUnk);
  CHECK(v.lookup("<pad>") == Vocabulary::kPad);
}

TEST_CASE("vocabulary round trip, including awkward items") {
  auto v = vocab_of({"plain", "with space", "", "multi\nline", "Ёж", "7 8"});
  std::stringstream ss;
  v.save(ss);
  const auto back = Vocabulary::load(ss);
  CHECK(back == v);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(back.lookup(v.item_of(i)) == i);
}

TEST_CASE("vocabulary load rejects damage") {
  std::istringstream truncated("4\n5 <unk>\n5 <pad>\n3 ab");
  CHECK_THROWS_AS(Vocabulary::load(truncated), DataError);
  std::istringstream no_reserved("1\n1 a\n");
  CHECK_THROWS_AS(Vocabulary::load(no_reserved), DataError);
}

TEST_CASE("char vocabulary holds code points") {
  const auto v = build_char_vocab({{"ab", "Юя"}});
  CHECK(v.items() == std::vector<std::string>{"<unk>", "<pad>", "a", "b", "Ю", "я"});
}

TEST_CASE("lookup falls back to lowercase, then UNK") {
  Rng rng(1);
  auto table = random_embeddings(vocab_of({"moscow", "Paris"}), 4, rng);
  CHECK(lookup(table, "moscow") == Vector(table.weights.row(2).begin(), table.weights.row(2).end()));
  CHECK(table.row_index("Moscow") == 2);
  CHECK(table.row_index("paris") == Vocabulary::kUnk);
  CHECK(lookup(table, "qq") == lookup(table, "zz"));
  table.lowercase_fallback = false;
  CHECK(table.row_index("Moscow") == Vocabulary::kUnk);
}

TEST_CASE("random embedding scale") {
  Rng rng(2);
  const auto t = random_embeddings(vocab_of({"a", "b", "c"}), 50, rng);
  CHECK(t.weights.rows() == 5);
  const double bound = std::sqrt(3.0 / 50.0);
  for (double x : t.weights.data()) CHECK(std::abs(x) <= bound);
}

TEST_CASE("pretrained: header, matches, unmatched range") {
  const auto vocab = vocab_of({"cat", "Dog", "emu"});
  std::istringstream file(
      "3 2\n"
      "cat 1.5 -2\r\n"
      "dog 0.25 0.5\n"
      "zebra 9 9\n");
  Rng rng(3);
  const auto r = load_pretrained(file, vocab, 2, rng);
  CHECK(r.table.vocab == vocab);
  CHECK(r.table.weights(2, 0) == 1.5);
  CHECK(r.table.weights(2, 1) == -2.0);
  CHECK(r.table.weights(3, 0) == 0.25);  // via lowercase
  for (std::size_t row : {0, 1, 4}) {
    for (double x : r.table.weights.row(row)) CHECK(std::abs(x) <= 0.25);
  }
  CHECK(r.report.matched == 2);
  CHECK(r.report.total_unique == 3);
  CHECK(r.report.coverage == doctest::Approx(200.0 / 3.0));
  CHECK(r.warnings.empty());

  std::istringstream again("cat 1.5 -2\ndog 0.25 0.5\n");
  Rng rng2(3);
  PretrainedOptions exact;
  exact.lowercase_fallback = false;
  CHECK(load_pretrained(again, vocab, 2, rng2, exact).report.matched == 1);
}

TEST_CASE("pretrained: coverage figure of the reference corpus") {
  Vocabulary vocab;
  std::ostringstream file;
  for (int i = 0; i < 7876; ++i) {
    vocab.add("w" + std::to_string(i));
    if (i < 7208) file << "w" << i << " 0.1\n";
  }
  std::istringstream in(file.str());
  Rng rng(4);
  const auto r = load_pretrained(in, vocab, 1, rng);
  CHECK(r.report.matched == 7208);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", r.report.coverage);
  CHECK(std::string(buf) == "91.52");
}

TEST_CASE("pretrained: empty file with header") {
  const auto vocab = vocab_of({"a", "b"});
  std::istringstream in("0 100\n");
  Rng rng(5);
  const auto r = load_pretrained(in, vocab, 100, rng);
  CHECK(r.report.matched == 0);
  CHECK(r.report.coverage == 0.0);
  CHECK(r.table.weights.rows() == 4);
  CHECK(r.table.weights.cols() == 100);
}

TEST_CASE("pretrained: duplicates keep the last vector and warn once") {
  const auto vocab = vocab_of({"x"});
  std::istringstream in("x 1\nx 2\nx 3\ny 0\ny 0\n");
  Rng rng(6);
  const auto r = load_pretrained(in, vocab, 1, rng);
  CHECK(r.table.weights(2, 0) == 3.0);
  CHECK(r.warnings.size() == 2);  // one for x, one for y
}

TEST_CASE("pretrained: malformed input reports the line") {
  const auto vocab = vocab_of({"x"});
  Rng rng(7);
  auto line_of = [&](const std::string& text, std::size_t dim) -> std::size_t {
    std::istringstream in(text);
    try {
      load_pretrained(in, vocab, dim, rng);
    } catch (const DataError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("x 1 2\ny 1\n", 2) == 2);
  CHECK(line_of("x 1 2\n\ny 1 abc\n", 2) == 3);
  CHECK(line_of("x 1 nan\n", 2) == 1);
  CHECK(line_of("5 3\nx 1 2 3\n", 2) == 1);  // header dimension mismatch
  CHECK(line_of("x 1 2\n", 2) == 0);
}

TEST_CASE("pretrained loading keeps vocabulary membership") {
  const auto vocab = vocab_of({"a", "b", "c"});
  std::istringstream in("d 1\ne 2\na 3\n");
  Rng rng(8);
  const auto r = load_pretrained(in, vocab, 1, rng);
  CHECK(r.table.vocab == vocab);
  CHECK_FALSE(r.table.vocab.find("d").has_value());
}
