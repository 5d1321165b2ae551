#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "sekira/errors.hpp"
#include "sekira/tagger.hpp"

using namespace sekira;

TEST_CASE("softmax loss and gradient") {
  Matrix e(2, 3);
  e(0, 1) = 1.0;
  e(1, 2) = -2.0;
  const TagSequence gold{1, 0};
  const auto r = token_softmax_loss(e, gold);
  const double want = -(1.0 - std::log(std::exp(0.0) + std::exp(1.0) + 1.0)) -
                      (0.0 - std::log(1.0 + 1.0 + std::exp(-2.0)));
  CHECK(r.loss == doctest::Approx(want).epsilon(1e-14));
  auto loss = [&] { return token_softmax_loss(e, gold).loss; };
  CHECK(finite_diff_check(loss, e.data(), r.d_emissions.data()) < 1e-7);
  CHECK_THROWS_AS(token_softmax_loss(e, {0}), UsageError);
}

TEST_CASE("argmax decoding takes the lowest index on ties") {
  Matrix e(3, 3);
  e(0, 2) = 1.0;
  e(1, 1) = 4.0;
  e(1, 2) = 4.0;
  CHECK(argmax_decode(e) == TagSequence{2, 1, 0});
}

TEST_CASE("tag lookup") {
  TaggerModel m;
  m.tagset = {"O", "B-PER"};
  CHECK(m.tag_index("B-PER") == 1);
  CHECK(m.tag_indices({"O", "B-PER", "O"}) == TagSequence{0, 1, 0});
  CHECK_THROWS_AS(m.tag_index("B-LOC"), DataError);
}

TEST_CASE("one small SGD step lowers the sentence loss") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto sentence = gradcheck::random_sentence(seed);
    auto model = gradcheck::random_model(seed, seed % 2 == 0, {sentence}, 0.0);
    Rng r(0);
    const double before = sentence_loss(model, sentence, false, r, nullptr);
    auto grads = ModelGrads::zeros_like(model);
    sentence_loss(model, sentence, false, r, &grads);
    apply_sgd(model, grads, 1e-4, 0.0);
    const double after = sentence_loss(model, sentence, false, r, nullptr);
    INFO("seed " << seed);
    CHECK(after < before);
  }
}

TEST_CASE("SGD leaves pinned transitions and frozen tables alone") {
  const auto sentence = gradcheck::random_sentence(3);
  auto model = gradcheck::random_model(3, false, {sentence}, 0.0);
  model.crf = constrained_transitions(model.tagset);
  model.encoder.words.trainable = false;
  const auto words = model.encoder.words.weights;
  const auto chars = model.encoder.chars.weights;
  const auto crf = model.crf;

  Rng r(0);
  auto grads = ModelGrads::zeros_like(model);
  sentence_loss(model, sentence, true, r, &grads);
  apply_sgd(model, grads, 0.5, 5.0);
  CHECK(model.encoder.words.weights == words);
  CHECK(model.encoder.chars.weights != chars);
  for (std::size_t i = 0; i < crf.transitions.size(); ++i) {
    if (crf.fixed.data()[i] != 0.0) {
      CHECK(model.crf.transitions.data()[i] == crf.transitions.data()[i]);
    }
  }
  CHECK(model.crf.transitions != crf.transitions);
}

TEST_CASE("softmax output ignores transitions") {
  const auto sentence = gradcheck::random_sentence(4);
  auto model = gradcheck::random_model(4, false, {sentence}, 0.0);
  model.output = OutputLayer::kSoftmax;
  const auto before = model.crf.transitions;
  Rng r(0);
  auto grads = ModelGrads::zeros_like(model);
  sentence_loss(model, sentence, false, r, &grads);
  apply_sgd(model, grads, 0.1, 0.0);
  CHECK(model.crf.transitions == before);
  CHECK(predict(model, sentence.tokens).size() == sentence.tokens.size());
}

TEST_CASE("gradient clipping bounds the step") {
  const auto sentence = gradcheck::random_sentence(5);
  auto model = gradcheck::random_model(5, false, {sentence}, 0.0);
  Rng r(0);
  auto grads = ModelGrads::zeros_like(model);
  sentence_loss(model, sentence, false, r, &grads);
  const double norm = apply_sgd(model, grads, 0.0 + 1e-12, 1e-3);
  CHECK(norm > 1e-3);
  CHECK(global_norm(grads.buffers()) == doctest::Approx(1e-3));
}

TEST_CASE("prediction is deterministic and uses the tagset") {
  const auto sentence = gradcheck::random_sentence(6);
  auto model = gradcheck::random_model(6, true, {sentence}, 0.5);
  const auto a = predict(model, sentence.tokens);
  CHECK(a == predict(model, sentence.tokens));
  for (const auto& t : a) CHECK(model.tag_index(t) < 3);
  const auto all = predict_all(model, {sentence.tokens, {"unseen", "words"}});
  CHECK(all.size() == 2);
  CHECK(all[0].tags == a);
  CHECK(all[1].tokens == std::vector<std::string>{"unseen", "words"});
}
