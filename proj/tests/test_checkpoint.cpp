#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "sekira/checkpoint.hpp"
#include "sekira/errors.hpp"

using namespace sekira;

namespace {

Dataset tiny_corpus() {
  return make_dataset({
      {{"Ivan", "lives", "in", "Moscow"}, {"B-PER", "O", "O", "B-LOC"}},
      {{"Gazprom", "Neft", "hired", "Anna"}, {"B-ORG", "I-ORG", "O", "B-PER"}},
      {{"with space?", "Ёж"}, {"O", "B-PER"}},
  });
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.epochs = 2;
  c.char_dim = 3;
  c.char_hidden = 2;
  c.word_dim = 4;
  c.word_hidden = 5;
  c.lr = 0.05;
  return c;
}

Checkpoint trained(const TrainConfig& c) {
  const auto d = tiny_corpus();
  auto r = train(c, d, d);
  return {c, std::move(r.model), r.best_valid_f1};
}

std::string save_to_string(const Checkpoint& ck) {
  std::ostringstream out;
  save_checkpoint(ck, out);
  return out.str();
}

Checkpoint load_from_string(const std::string& s) {
  std::istringstream in(s);
  return load_checkpoint(in);
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("hex float literals round trip exactly") {
  for (double v : {0.0, -0.0, 1.0, -3.0, 0.1, 1e-300, -1e30, 6.02214076e23,
                   std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max()}) {
    const double back = parse_hex_double(hex_double(v));
    CHECK(back == v);
    CHECK(std::signbit(back) == std::signbit(v));
  }
  CHECK(hex_double(-3.0) == "-0x1.8p+1");
  CHECK_THROWS_AS(parse_hex_double("1.5"), CorruptCheckpoint);
  CHECK_THROWS_AS(parse_hex_double("0x1.8p+1junk"), CorruptCheckpoint);
  CHECK_THROWS_AS(parse_hex_double("--0x1p+0"), CorruptCheckpoint);
}

TEST_CASE("save, load, save is byte-identical and decodes identically") {
  for (bool highway : {false, true}) {
    auto c = tiny_config();
    c.constrain_transitions = highway;
    c.char_highway = highway;
    c.word_highway = highway;
    if (highway) c.word_hidden = c.encoder_config().token_dim();
    const auto ck = trained(c);
    const auto text = save_to_string(ck);
    CHECK(text.starts_with("SEKIRA-CKPT v1\n"));
    const auto back = load_from_string(text);
    CHECK(save_to_string(back) == text);
    CHECK(back.config == ck.config);
    CHECK(back.best_valid_f1 == ck.best_valid_f1);
    CHECK(back.model.tagset == ck.model.tagset);
    for (const auto& s : tiny_corpus().sentences) {
      CHECK(predict(back.model, s.tokens) == predict(ck.model, s.tokens));
      Rng a(0), b(0);
      CHECK(encode_sentence(back.model.encoder, s.tokens, false, a) ==
            encode_sentence(ck.model.encoder, s.tokens, false, b));
    }
  }
}

TEST_CASE("truncation anywhere is reported as corruption") {
  const auto text = save_to_string(trained(tiny_config()));
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, text.size() / 3, text.size() / 2,
                          text.size() - 5, text.size() - 1}) {
    INFO("cut at " << cut);
    CHECK_THROWS_AS(load_from_string(text.substr(0, cut)), CorruptCheckpoint);
  }
  CHECK_THROWS_AS(load_from_string(text + "extra\n"), CorruptCheckpoint);
}

TEST_CASE("version, shape and content errors are distinct") {
  const auto text = save_to_string(trained(tiny_config()));
  CHECK_THROWS_AS(load_from_string(replace_once(text, "SEKIRA-CKPT v1", "SEKIRA-CKPT v2")),
                  VersionMismatch);
  CHECK_THROWS_AS(load_from_string(replace_once(text, "SEKIRA-CKPT", "OTHER-CKPT")),
                  CorruptCheckpoint);
  CHECK_THROWS_AS(load_from_string(replace_once(text, "proj.b 5 1", "proj.b 6 1")), ShapeMismatch);
  CHECK_THROWS_AS(load_from_string(replace_once(text, "proj.b 5 1", "proj.q 5 1")),
                  CorruptCheckpoint);
  CHECK_THROWS_AS(load_from_string(replace_once(text, "word_hidden 5", "word_hidden 6")),
                  ShapeMismatch);
  CHECK_THROWS_AS(load_from_string(replace_once(text, " 0x", " 1x")), CorruptCheckpoint);
  CHECK_THROWS_AS(load_from_string(replace_once(text, "use_crf 1", "use_crf 2")),
                  CorruptCheckpoint);
}

TEST_CASE("file helpers") {
  const auto ck = trained(tiny_config());
  const std::string path = "test_checkpoint_roundtrip.ckpt";
  save_checkpoint_file(ck, path);
  CHECK(save_to_string(load_checkpoint_file(path)) == save_to_string(ck));
  CHECK_THROWS_AS(load_checkpoint_file("does/not/exist.ckpt"), DataError);
  std::remove(path.c_str());
}
