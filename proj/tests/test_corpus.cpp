#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "sekira/corpus.hpp"
#include "sekira/errors.hpp"

using namespace sekira;

namespace {

using Tags = std::vector<std::string>;

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_column_file(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.line();
  }
  return 0;
}

Dataset numbered(std::size_t n) {
  std::vector<LabeledSentence> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back({{"w" + std::to_string(i)}, {"O"}});
  return make_dataset(std::move(s));
}

}  // namespace

TEST_CASE("column parsing") {
  const auto d = parse("Ivan B-PER\n. O\n\nOK O\n");
  REQUIRE(d.sentences.size() == 2);
  CHECK(d.sentences[0].tokens == std::vector<std::string>{"Ivan", "."});
  CHECK(d.sentences[0].tags == Tags{"B-PER", "O"});
  CHECK(d.sentences[1].tokens.size() == 1);
  CHECK(d.tagset == Tags{"B-PER", "O"});

  CHECK(parse("").sentences.empty());
  CHECK(parse("\n\n\n").sentences.empty());
}

TEST_CASE("column parsing: multi-column, DOCSTART, CRLF, trailing sentence") {
  const auto d = parse(
      "-DOCSTART- -X- O O\n\n"
      "Путин NNP I-NP B-PER\r\n"
      "said VBD I-VP O\r\n"
      "\r\n"
      "Moscow NNP I-NP B-LOC");
  REQUIRE(d.sentences.size() == 2);
  CHECK(d.sentences[0].tokens[0] == "Путин");
  CHECK(d.sentences[0].tags == Tags{"B-PER", "O"});
  CHECK(d.sentences[1].tags == Tags{"B-LOC"});
}

TEST_CASE("column parsing errors carry line numbers") {
  CHECK(error_line("word\n") == 1);
  CHECK(error_line("a O\nb O\n\nword\n") == 4);
  CHECK(error_line("a O\nb PER\n") == 2);
  CHECK(error_line("a B-\n") == 1);
  CHECK(error_line("a X-PER\n") == 1);
  CHECK(error_line("a O\n") == 0);
}

TEST_CASE("tag syntax") {
  CHECK(is_valid_tag("O"));
  CHECK(is_valid_tag("B-PER"));
  CHECK(is_valid_tag("I-MISC"));
  CHECK_FALSE(is_valid_tag("B-"));
  CHECK_FALSE(is_valid_tag("E-PER"));
  CHECK_FALSE(is_valid_tag("o"));
  CHECK_FALSE(is_valid_tag(""));
}

TEST_CASE("parse, write, parse is the identity") {
  const auto d = parse("a B-PER\nb I-PER\nc O\n\nd B-LOC\n\ne O\nf O\n");
  std::ostringstream out;
  write_column_file(out, d.sentences);
  CHECK(out.str() == "a B-PER\nb I-PER\nc O\n\nd B-LOC\n\ne O\nf O\n\n");
  CHECK(parse(out.str()).sentences == d.sentences);
}

TEST_CASE("token files") {
  std::istringstream in("Ivan\nlives\n\n\nMoscow extra\n");
  const auto s = parse_token_file(in);
  REQUIRE(s.size() == 2);
  CHECK(s[0] == std::vector<std::string>{"Ivan", "lives"});
  CHECK(s[1] == std::vector<std::string>{"Moscow"});
  std::istringstream empty("");
  CHECK(parse_token_file(empty).empty());
  std::istringstream bad("ok\n\xFF\n");
  try {
    parse_token_file(bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("IOB2 validation") {
  CHECK(validate_iob({"O", "I-PER", "B-PER", "O"}) == std::vector<IobViolation>{{1, "I-PER"}});
  CHECK(validate_iob({"I-PER", "O"}) == std::vector<IobViolation>{{0, "I-PER"}});
  CHECK(validate_iob({"B-PER", "I-PER", "O"}).empty());
  CHECK(validate_iob({"B-PER", "I-LOC"}) == std::vector<IobViolation>{{1, "I-LOC"}});
  CHECK(validate_iob({"B-PER", "I-PER", "I-PER", "B-LOC", "I-LOC"}).empty());
  CHECK(validate_iob({}).empty());
}

TEST_CASE("IOB1 to IOB2") {
  CHECK(iob1_to_iob2({"I-PER", "I-PER", "O", "I-LOC"}) == Tags{"B-PER", "I-PER", "O", "B-LOC"});
  CHECK(iob1_to_iob2({"I-PER", "B-PER", "I-PER"}) == Tags{"B-PER", "B-PER", "I-PER"});
  CHECK(iob1_to_iob2({"I-PER", "I-LOC"}) == Tags{"B-PER", "B-LOC"});
  const Tags already{"B-PER", "I-PER", "O", "B-LOC"};
  CHECK(iob1_to_iob2(already) == already);
  for (const auto& tags : {Tags{"I-A", "I-A", "I-B", "O", "I-B"}, Tags{"O", "I-X"}}) {
    CHECK(validate_iob(iob1_to_iob2(tags)).empty());
  }
}

TEST_CASE("split sizes") {
  const auto s = split_dataset(numbered(2136), {0.6, 0.2, 0.2}, 7);
  CHECK(s.train.sentences.size() == 1282);
  CHECK(s.valid.sentences.size() == 427);
  CHECK(s.test.sentences.size() == 427);

  const auto all = split_dataset(numbered(10), {1.0, 0.0, 0.0}, 1);
  CHECK(all.train.sentences.size() == 10);
  CHECK(all.valid.sentences.empty());
  CHECK(all.test.sentences.empty());
}

TEST_CASE("split is a seeded partition") {
  const auto d = numbered(101);
  const auto a = split_dataset(d, {0.5, 0.3, 0.2}, 3);
  const auto b = split_dataset(d, {0.5, 0.3, 0.2}, 3);
  CHECK(a.train.sentences == b.train.sentences);
  CHECK(a.test.sentences == b.test.sentences);
  CHECK(split_dataset(d, {0.5, 0.3, 0.2}, 4).train.sentences != a.train.sentences);

  std::vector<std::string> seen;
  for (const auto* part : {&a.train, &a.valid, &a.test}) {
    for (const auto& s : part->sentences) seen.push_back(s.tokens[0]);
  }
  std::vector<std::string> original;
  for (const auto& s : d.sentences) original.push_back(s.tokens[0]);
  std::sort(seen.begin(), seen.end());
  std::sort(original.begin(), original.end());
  CHECK(seen == original);

  CHECK_THROWS_AS(split_dataset(Dataset{}, {0.6, 0.2, 0.2}, 1), UsageError);
  CHECK_THROWS_AS(split_dataset(d, {0.6, 0.2, 0.3}, 1), UsageError);
}

TEST_CASE("dataset statistics") {
  const auto d = make_dataset({{{"Ivan", ",", "2016"}, {"B-PER", "O", "O"}}});
  const auto st = compute_stats(d);
  CHECK(st.tokens == 3);
  CHECK(st.words_and_numbers == 2);
  CHECK(st.entities.at("PER") == 1);

  const auto span = compute_stats(make_dataset({{{"Anna", "Karenina"}, {"B-PER", "I-PER"}}}));
  CHECK(span.entities.at("PER") == 1);

  const auto empty = compute_stats(Dataset{});
  CHECK(empty.tokens == 0);
  CHECK(empty.words_and_numbers == 0);
  CHECK(empty.entities.empty());
}
