#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const std::string kCli = SEKIRA_CLI;
const std::string kData = SEKIRA_DATA_DIR;

// Runs the CLI with stdout and stderr captured to files; returns the exit code.
int run(const std::string& args, const std::string& stdin_path = "") {
  std::string cmd = kCli + " " + args + " > cli_out.txt 2> cli_err.txt";
  if (!stdin_path.empty()) cmd += " < " + stdin_path;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const std::string kSmall =
    " --char-dim 4 --char-hidden 3 --word-dim 5 --hidden 6 --epochs 3 --lr 0.05";

}  // namespace

TEST_CASE("train, eval, tag end to end") {
  const std::string corpus = kData + "/overfit.conll";
  REQUIRE(run("train --train " + corpus + " --valid " + corpus + " --test " + corpus +
              " --out cli_model.ckpt --constrain-transitions" + kSmall) == 0);
  CHECK(slurp("cli_out.txt").find("best validation F1") != std::string::npos);
  CHECK(slurp("cli_out.txt").find("Overall: precision:") != std::string::npos);
  CHECK(slurp("cli_err.txt").find("epoch 3") != std::string::npos);

  REQUIRE(run("eval --model cli_model.ckpt --data " + corpus + " --confusion") == 0);
  const auto report = slurp("cli_out.txt");
  CHECK(report.starts_with("Overall: precision: "));
  CHECK(report.find("Named Entity") != std::string::npos);
  CHECK(report.find("Percent") != std::string::npos);

  REQUIRE(run("eval --model cli_model.ckpt --data " + corpus + " --json") == 0);
  CHECK(slurp("cli_out.txt").find("\"overall.f1\"") != std::string::npos);

  write("cli_tokens.txt", "Ivan\nvisited\nMoscow\n\nAnna\n");
  REQUIRE(run("tag --model cli_model.ckpt --input cli_tokens.txt") == 0);
  const auto tagged = slurp("cli_out.txt");
  CHECK(tagged.starts_with("Ivan "));
  CHECK(tagged.find("\n\nAnna ") != std::string::npos);

  REQUIRE(run("tag --model cli_model.ckpt", "cli_tokens.txt") == 0);
  CHECK(slurp("cli_out.txt") == tagged);
}

TEST_CASE("identical runs write identical checkpoints") {
  const std::string corpus = kData + "/overfit.conll";
  REQUIRE(run("train --train " + corpus + " --valid " + corpus + " --out cli_a.ckpt --seed 9" +
              kSmall) == 0);
  REQUIRE(run("train --train " + corpus + " --valid " + corpus + " --out cli_b.ckpt --seed 9" +
              kSmall) == 0);
  CHECK(slurp("cli_a.ckpt") == slurp("cli_b.ckpt"));
}

TEST_CASE("pretrained vectors are loaded and reported") {
  const std::string corpus = kData + "/overfit.conll";
  write("cli_vectors.txt", "2 5\nmoscow 1 2 3 4 5\nivan 0 0 0 0 1\n");
  REQUIRE(run("train --train " + corpus + " --valid " + corpus +
              " --out cli_vec.ckpt --embeddings cli_vectors.txt --freeze-embeddings" + kSmall) == 0);
  CHECK(slurp("cli_err.txt").find("cover 2 of") != std::string::npos);

  write("cli_bad_vectors.txt", "moscow 1 2 3\n");
  CHECK(run("train --train " + corpus + " --valid " + corpus +
            " --out cli_vec.ckpt --embeddings cli_bad_vectors.txt" + kSmall) == 2);
  CHECK(slurp("cli_err.txt").find("line 1") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("train --train x") == 1);
  CHECK(run("eval --model nothing.ckpt --data nothing.conll") == 2);

  write("cli_bad.conll", "Ivan B-PER\nlonely\n");
  const std::string corpus = kData + "/overfit.conll";
  CHECK(run("train --train cli_bad.conll --valid " + corpus + " --out x.ckpt") == 2);
  CHECK(slurp("cli_err.txt").find("line 2") != std::string::npos);

  CHECK(run("train --train " + corpus + " --valid " + corpus +
            " --out x.ckpt --dropout 1.5") == 1);
  CHECK(run("train --train " + corpus + " --valid " + corpus +
            " --out x.ckpt --word-highway") == 1);

  write("cli_garbage.ckpt", "SEKIRA-CKPT v7\n");
  CHECK(run("eval --model cli_garbage.ckpt --data " + corpus) == 2);
  CHECK(slurp("cli_err.txt").find("version") != std::string::npos);
  CHECK(run("--help") == 0);
}
