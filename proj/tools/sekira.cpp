#include <cstdio>
// sekira: train, evaluate and run a Bi-LSTM-CRF sequence tagger.
//
// Exit codes: 0 success, 1 usage error, 2 data or model error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sekira/checkpoint.hpp"
#include "sekira/commands.hpp"
#include "sekira/corpus.hpp"
#include "sekira/errors.hpp"
#include "sekira/metrics.hpp"
#include "sekira/trainer.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;

sekira::Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sekira::DataError("cannot open " + path);
  try {
    return sekira::parse_column_file(in);
  } catch (const sekira::DataError& e) {
    throw sekira::DataError(path + ": " + e.what());
  }
}

void print_eval(const sekira::EvalOutput& out, bool with_confusion, bool as_json) {
  if (as_json) {
    std::cout << sekira::report_to_json(out.report) << '\n';
  } else {
    std::cout << sekira::format_report(out.report);
  }
  if (with_confusion) std::cout << '\n' << sekira::format_confusion(out.matrix);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-LSTM-CRF named entity tagger"};
  app.require_subcommand(1);

  sekira::TrainConfig cfg;
  std::string train_path, valid_path, test_path, out_path;
  bool no_crf = false;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--train", train_path, "training corpus (token ... tag per line)")->required();
  train->add_option("--valid", valid_path, "validation corpus used for model selection")->required();
  train->add_option("--test", test_path, "optional test corpus scored with the selected model");
  train->add_option("--out", out_path, "checkpoint to write")->required();
  train->add_option("--embeddings", cfg.embeddings_path, "pretrained word vectors (text format)");
  train->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  train->add_option("--lr", cfg.lr, "SGD learning rate")->capture_default_str();
  train->add_option("--lr-decay", cfg.lr_decay, "lr / (1 + decay * epoch)")->capture_default_str();
  train->add_option("--dropout", cfg.dropout, "dropout rate on token inputs")->capture_default_str();
  train->add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
  train->add_option("--char-dim", cfg.char_dim, "character embedding size")->capture_default_str();
  train->add_option("--char-hidden", cfg.char_hidden, "character LSTM size per direction")
      ->capture_default_str();
  train->add_option("--word-dim", cfg.word_dim, "word embedding size")->capture_default_str();
  train->add_option("--hidden", cfg.word_hidden, "word LSTM size per direction")->capture_default_str();
  train->add_flag("--char-highway", cfg.char_highway, "highway layer on character features");
  train->add_flag("--word-highway", cfg.word_highway, "highway (carry-gated) word Bi-LSTM");
  train->add_flag("--constrain-transitions", cfg.constrain_transitions,
                  "forbid IOB2-invalid tag transitions");
  train->add_flag("--freeze-embeddings", cfg.freeze_embeddings, "do not update word embeddings");
  bool no_lowercase = false;
  train->add_flag("--no-lowercase-fallback", no_lowercase,
                  "match words exactly, without trying the lowercased form");
  train->add_flag("--no-crf", no_crf, "per-token softmax output instead of a CRF");
  train->add_option("--clip", cfg.clip_norm, "gradient norm clip (0 disables)")->capture_default_str();

  std::string model_path, data_path, input_path;
  bool with_confusion = false, as_json = false;
  auto* eval = app.add_subcommand("eval", "score a model on an annotated corpus");
  eval->add_option("--model", model_path, "checkpoint")->required();
  eval->add_option("--data", data_path, "annotated corpus")->required();
  eval->add_flag("--confusion", with_confusion, "also print the token confusion matrix");
  eval->add_flag("--json", as_json, "machine-readable report");

  auto* tag = app.add_subcommand("tag", "tag one-token-per-line input");
  tag->add_option("--model", model_path, "checkpoint")->required();
  tag->add_option("--input", input_path, "token-per-line input (default: stdin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*train) {
      cfg.use_crf = !no_crf;
      cfg.lowercase_fallback = !no_lowercase;
      const auto train_set = read_dataset(train_path);
      const auto valid_set = read_dataset(valid_path);
      std::optional<sekira::Dataset> test_set;
      if (!test_path.empty()) test_set = read_dataset(test_path);

      auto result = sekira::train(cfg, train_set, valid_set, &std::cerr);
      sekira::Checkpoint ck{cfg, std::move(result.model), result.best_valid_f1};
      sekira::save_checkpoint_file(ck, out_path);
      std::printf("best validation F1: %.2f (epoch %zu)\n", result.best_valid_f1, result.best_epoch);
      if (test_set) {
        std::cout << "test set:\n";
        print_eval(sekira::evaluate_cmd(ck.model, *test_set), false, false);
      }
    } else if (*eval) {
      const auto ck = sekira::load_checkpoint_file(model_path);
      print_eval(sekira::evaluate_cmd(ck.model, read_dataset(data_path)), with_confusion, as_json);
    } else if (*tag) {
      const auto ck = sekira::load_checkpoint_file(model_path);
      if (input_path.empty() || input_path == "-") {
        sekira::tag_cmd(ck.model, std::cin, std::cout);
      } else {
        std::ifstream in(input_path);
        if (!in) throw sekira::DataError("cannot open " + input_path);
        sekira::tag_cmd(ck.model, in, std::cout);
      }
    }
  } catch (const sekira::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sekira::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const sekira::ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
