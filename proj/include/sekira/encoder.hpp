#pragma once

// Character- and word-level Bi-LSTM feature extractor with optional highway
// layers, producing per-token tag scores. Gradients are derived by hand
// (BPTT) and accumulate into structures shaped like the parameters.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sekira/embeddings.hpp"
#include "sekira/numerics.hpp"

namespace sekira {

// A named view of one parameter tensor. Vectors are reported as rows x 1.
struct TensorRef {
  std::string name;
  std::span<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct GateWeights {
  Matrix from_input;   // hidden x input
  Matrix from_hidden;  // hidden x hidden
  Vector bias;         // hidden
};

struct LstmCellParams {
  GateWeights input_gate;
  GateWeights forget_gate;
  GateWeights candidate;  // tanh-squashed cell input
  GateWeights output_gate;

  std::size_t input_dim() const { return input_gate.from_input.cols(); }
  std::size_t hidden_dim() const { return input_gate.bias.size(); }

  static LstmCellParams zeros(std::size_t input_dim, std::size_t hidden_dim);
  static LstmCellParams glorot(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

  void append_tensors(const std::string& prefix, std::vector<TensorRef>& out);
};

struct LstmState {
  Vector h;
  Vector c;

  static LstmState zeros(std::size_t hidden) { return {Vector(hidden), Vector(hidden)}; }
};

// y = tanh(transform_w x + transform_b) * g + x * (1 - g),
// g = sigmoid(gate_w x + gate_b)
struct HighwayParams {
  Matrix transform_w;
  Vector transform_b;
  Matrix gate_w;
  Vector gate_b;

  std::size_t dim() const { return transform_b.size(); }

  static HighwayParams zeros(std::size_t dim);
  static HighwayParams glorot(std::size_t dim, Rng& rng);

  void append_tensors(const std::string& prefix, std::vector<TensorRef>& out);
};

// Carry gate of a highway Bi-LSTM direction, conditioned on the cell input.
struct CarryGateParams {
  Matrix w;  // hidden x input (square)
  Vector b;

  static CarryGateParams zeros(std::size_t dim);
  static CarryGateParams glorot(std::size_t dim, Rng& rng);

  void append_tensors(const std::string& prefix, std::vector<TensorRef>& out);
};

struct EncoderConfig {
  std::size_t char_dim = 25;
  std::size_t word_dim = 100;
  std::size_t char_hidden = 25;
  std::size_t word_hidden = 100;
  bool use_char_highway = false;
  bool use_word_highway = false;
  double dropout_rate = 0.5;

  std::size_t token_dim() const { return 2 * char_hidden + word_dim; }
  // Throws UsageError on zero dimensions, a bad dropout rate, or a word
  // highway whose input and hidden sizes differ.
  void validate() const;
};

// T x K scores, row t holding the score of every tag for token t.
using EmissionMatrix = Matrix;

// --- single-layer building blocks ---------------------------------------

LstmState lstm_step(const LstmCellParams& params, std::span<const double> x,
                    const LstmState& prev);

std::vector<LstmState> lstm_forward(const LstmCellParams& params,
                                    const std::vector<Vector>& inputs, const LstmState& init);

// output_t = concat(forward h_t, backward h_t); the backward cell reads the
// sequence right to left.
std::vector<Vector> bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                   const std::vector<Vector>& inputs);

// concat(final forward state, final backward state) over the word's
// character embeddings. An empty word reads as a single PAD character.
Vector char_encode(const EmbeddingTable& chars, const LstmCellParams& fwd,
                   const LstmCellParams& bwd, std::string_view word);

Vector highway_forward(const HighwayParams& params, std::span<const double> x);

// Per direction: out_t = g * h_t + (1 - g) * x_t with g = sigmoid(W x_t + b).
std::vector<Vector> highway_bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                           const CarryGateParams& gate_fwd,
                                           const CarryGateParams& gate_bwd,
                                           const std::vector<Vector>& inputs);

// --- traces and backward passes -----------------------------------------

struct LstmStepTrace {
  Vector x, h_prev, c_prev;
  Vector i, f, o, cand;
  Vector c, tanh_c, h;
};

std::vector<LstmStepTrace> lstm_trace(const LstmCellParams& params,
                                      const std::vector<Vector>& inputs, const LstmState& init);

// `dh[t]` is the loss gradient with respect to trace[t].h. Parameter
// gradients accumulate into `grads`; returns the gradient for every input.
std::vector<Vector> lstm_backward(const LstmCellParams& params,
                                  const std::vector<LstmStepTrace>& trace,
                                  const std::vector<Vector>& dh, LstmCellParams& grads);

struct HighwayTrace {
  Vector transform;  // tanh branch
  Vector gate;
};

Vector highway_forward(const HighwayParams& params, std::span<const double> x,
                       HighwayTrace& trace);

Vector highway_backward(const HighwayParams& params, std::span<const double> x,
                        const HighwayTrace& trace, std::span<const double> dy,
                        HighwayParams& grads);

// --- full encoder --------------------------------------------------------

// Dense weights updated by SGD. Embedding tables live beside them because
// their gradients are sparse.
struct EncoderWeights {
  LstmCellParams char_fwd, char_bwd;
  std::optional<HighwayParams> char_highway;
  LstmCellParams word_fwd, word_bwd;
  std::optional<CarryGateParams> word_gate_fwd, word_gate_bwd;
  Matrix proj_w;  // K x 2*word_hidden
  Vector proj_b;  // K

  std::vector<TensorRef> tensors();
  void set_zero();
};

struct EncoderParams {
  EncoderConfig config;
  std::size_t num_tags = 0;
  EmbeddingTable chars;
  EmbeddingTable words;
  EncoderWeights weights;

  // Dense weights followed by the two embedding tables.
  std::vector<TensorRef> tensors();
};

// Random initialization. `pretrained_words`, when given, supplies the word
// table (its dim must match config.word_dim); otherwise rows are random.
EncoderParams init_encoder(const EncoderConfig& config, Vocabulary words, Vocabulary chars,
                           std::size_t num_tags, Rng& rng,
                           std::optional<EmbeddingTable> pretrained_words = std::nullopt);

struct EncoderGrads {
  EncoderWeights weights;
  std::map<std::size_t, Vector> char_rows;
  std::map<std::size_t, Vector> word_rows;

  static EncoderGrads zeros_like(const EncoderParams& params);
  void set_zero();
};

// Forward activations kept for encoder_backward.
struct EncoderCache {
  struct Token {
    std::size_t word_id = 0;
    std::vector<std::size_t> char_ids;
    std::vector<LstmStepTrace> char_fwd, char_bwd;
    Vector char_raw;  // before the char highway
    HighwayTrace highway;
  };
  std::vector<Token> tokens;
  std::vector<Vector> token_input;  // concat(char vector, word row), pre-dropout
  std::vector<Vector> masks;
  std::vector<Vector> lstm_input;   // after dropout
  std::vector<LstmStepTrace> word_fwd, word_bwd;  // word_bwd in right-to-left order
  std::vector<Vector> gate_fwd, gate_bwd;         // by token position
  std::vector<Vector> features;                   // projection input
  bool ready = false;
};

EmissionMatrix encode_sentence(const EncoderParams& model, const std::vector<std::string>& tokens,
                               bool training, Rng& rng, EncoderCache* cache = nullptr);

// Accumulates gradients for `upstream` (dLoss/dEmissions) into `grads`.
// Throws UsageError when the cache holds no forward pass.
void encoder_backward(const EncoderParams& model, const EncoderCache& cache,
                      const Matrix& upstream, EncoderGrads& grads);

}  // namespace sekira
