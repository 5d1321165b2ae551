#include "sekira/encoder.hpp"

#include <array>
#include <cmath>
#include <string>

#include "sekira/errors.hpp"
#include "sekira/text.hpp"

namespace sekira {
namespace {

GateWeights zero_gate(std::size_t input_dim, std::size_t hidden) {
  return {Matrix(hidden, input_dim), Matrix(hidden, hidden), Vector(hidden)};
}

GateWeights glorot_gate(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  return {glorot_init(hidden, input_dim, rng), glorot_init(hidden, hidden, rng), Vector(hidden)};
}

void append_matrix(std::vector<TensorRef>& out, std::string name, Matrix& m) {
  out.push_back({std::move(name), m.data(), m.rows(), m.cols()});
}

void append_vector(std::vector<TensorRef>& out, std::string name, Vector& v) {
  out.push_back({std::move(name), v, v.size(), 1});
}

std::array<const GateWeights*, 4> gates_of(const LstmCellParams& p) {
  return {&p.input_gate, &p.forget_gate, &p.candidate, &p.output_gate};
}

std::array<GateWeights*, 4> gates_of(LstmCellParams& p) {
  return {&p.input_gate, &p.forget_gate, &p.candidate, &p.output_gate};
}

// W_x x + W_h h + b
Vector preactivation(const GateWeights& g, std::span<const double> x, std::span<const double> h) {
  Vector a = g.bias;
  matvec_add(g.from_input, x, a);
  matvec_add(g.from_hidden, h, a);
  return a;
}

void add_into(std::span<double> acc, std::span<const double> v) {
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += v[k];
}

void check_step_dims(const LstmCellParams& p, std::span<const double> x, const LstmState& prev) {
  if (x.size() != p.input_dim()) {
    throw UsageError("lstm_step: input has " + std::to_string(x.size()) +
                     " entries, cell expects " + std::to_string(p.input_dim()));
  }
  if (prev.h.size() != p.hidden_dim() || prev.c.size() != p.hidden_dim()) {
    throw UsageError("lstm_step: state size does not match hidden size " +
                     std::to_string(p.hidden_dim()));
  }
}

LstmStepTrace step_traced(const LstmCellParams& p, std::span<const double> x, const LstmState& prev) {
  check_step_dims(p, x, prev);
  LstmStepTrace t;
  t.x.assign(x.begin(), x.end());
  t.h_prev = prev.h;
  t.c_prev = prev.c;
  t.i = sigmoid(preactivation(p.input_gate, x, prev.h));
  t.f = sigmoid(preactivation(p.forget_gate, x, prev.h));
  t.cand = tanh_act(preactivation(p.candidate, x, prev.h));
  t.o = sigmoid(preactivation(p.output_gate, x, prev.h));
  const std::size_t n = p.hidden_dim();
  t.c.resize(n);
  for (std::size_t k = 0; k < n; ++k) t.c[k] = t.f[k] * prev.c[k] + t.i[k] * t.cand[k];
  t.tanh_c = tanh_act(t.c);
  t.h.resize(n);
  for (std::size_t k = 0; k < n; ++k) t.h[k] = t.o[k] * t.tanh_c[k];
  return t;
}

std::vector<Vector> reversed(const std::vector<Vector>& v) { return {v.rbegin(), v.rend()}; }

std::vector<std::size_t> char_ids_of(const EmbeddingTable& chars, std::string_view word) {
  std::vector<std::size_t> ids;
  if (word.empty()) {
    ids.push_back(Vocabulary::kPad);
    return ids;
  }
  for (const auto& ch : text::utf8_chars(word)) ids.push_back(chars.vocab.lookup(ch));
  return ids;
}

std::vector<Vector> rows_of(const EmbeddingTable& table, const std::vector<std::size_t>& ids) {
  std::vector<Vector> rows;
  rows.reserve(ids.size());
  for (auto id : ids) {
    const auto r = table.weights.row(id);
    rows.emplace_back(r.begin(), r.end());
  }
  return rows;
}

void check_carry_gate(const CarryGateParams& g, const LstmCellParams& cell) {
  if (g.w.rows() != cell.hidden_dim() || g.w.cols() != cell.input_dim() ||
      cell.input_dim() != cell.hidden_dim()) {
    throw UsageError("highway Bi-LSTM needs input dim == hidden dim (got input " +
                     std::to_string(cell.input_dim()) + ", hidden " +
                     std::to_string(cell.hidden_dim()) + ")");
  }
}

Vector carry_gate(const CarryGateParams& g, std::span<const double> x) {
  Vector a = g.b;
  matvec_add(g.w, x, a);
  return sigmoid(a);
}

}  // namespace

// --- parameter containers -----------------------------------------------

LstmCellParams LstmCellParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  return {zero_gate(input_dim, hidden_dim), zero_gate(input_dim, hidden_dim),
          zero_gate(input_dim, hidden_dim), zero_gate(input_dim, hidden_dim)};
}

LstmCellParams LstmCellParams::glorot(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  LstmCellParams p;
  p.input_gate = glorot_gate(input_dim, hidden_dim, rng);
  p.forget_gate = glorot_gate(input_dim, hidden_dim, rng);
  p.candidate = glorot_gate(input_dim, hidden_dim, rng);
  p.output_gate = glorot_gate(input_dim, hidden_dim, rng);
  return p;
}

void LstmCellParams::append_tensors(const std::string& prefix, std::vector<TensorRef>& out) {
  static constexpr std::array<const char*, 4> kNames = {"input_gate", "forget_gate", "candidate",
                                                        "output_gate"};
  auto gates = gates_of(*this);
  for (std::size_t g = 0; g < 4; ++g) {
    const std::string base = prefix + "." + kNames[g];
    append_matrix(out, base + ".from_input", gates[g]->from_input);
    append_matrix(out, base + ".from_hidden", gates[g]->from_hidden);
    append_vector(out, base + ".bias", gates[g]->bias);
  }
}

HighwayParams HighwayParams::zeros(std::size_t dim) {
  return {Matrix(dim, dim), Vector(dim), Matrix(dim, dim), Vector(dim)};
}

HighwayParams HighwayParams::glorot(std::size_t dim, Rng& rng) {
  HighwayParams p = zeros(dim);
  p.transform_w = glorot_init(dim, dim, rng);
  p.gate_w = glorot_init(dim, dim, rng);
  return p;
}

void HighwayParams::append_tensors(const std::string& prefix, std::vector<TensorRef>& out) {
  append_matrix(out, prefix + ".transform_w", transform_w);
  append_vector(out, prefix + ".transform_b", transform_b);
  append_matrix(out, prefix + ".gate_w", gate_w);
  append_vector(out, prefix + ".gate_b", gate_b);
}

CarryGateParams CarryGateParams::zeros(std::size_t dim) { return {Matrix(dim, dim), Vector(dim)}; }

CarryGateParams CarryGateParams::glorot(std::size_t dim, Rng& rng) {
  return {glorot_init(dim, dim, rng), Vector(dim)};
}

void CarryGateParams::append_tensors(const std::string& prefix, std::vector<TensorRef>& out) {
  append_matrix(out, prefix + ".w", w);
  append_vector(out, prefix + ".b", b);
}

void EncoderConfig::validate() const {
  if (char_dim == 0 || word_dim == 0 || char_hidden == 0 || word_hidden == 0) {
    throw UsageError("encoder dimensions must all be >= 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw UsageError("dropout rate must lie in [0, 1)");
  }
  if (use_word_highway && token_dim() != word_hidden) {
    throw UsageError("word-level highway Bi-LSTM requires 2*char_hidden + word_dim (" +
                     std::to_string(token_dim()) + ") to equal the word hidden size (" +
                     std::to_string(word_hidden) + ")");
  }
}

std::vector<TensorRef> EncoderWeights::tensors() {
  std::vector<TensorRef> out;
  char_fwd.append_tensors("char.fwd", out);
  char_bwd.append_tensors("char.bwd", out);
  if (char_highway) char_highway->append_tensors("char.highway", out);
  word_fwd.append_tensors("word.fwd", out);
  word_bwd.append_tensors("word.bwd", out);
  if (word_gate_fwd) word_gate_fwd->append_tensors("word.carry_fwd", out);
  if (word_gate_bwd) word_gate_bwd->append_tensors("word.carry_bwd", out);
  append_matrix(out, "proj.w", proj_w);
  append_vector(out, "proj.b", proj_b);
  return out;
}

void EncoderWeights::set_zero() {
  for (auto& t : tensors()) std::fill(t.data.begin(), t.data.end(), 0.0);
}

std::vector<TensorRef> EncoderParams::tensors() {
  auto out = weights.tensors();
  append_matrix(out, "embed.chars", chars.weights);
  append_matrix(out, "embed.words", words.weights);
  return out;
}

EncoderParams init_encoder(const EncoderConfig& config, Vocabulary words, Vocabulary chars,
                           std::size_t num_tags, Rng& rng,
                           std::optional<EmbeddingTable> pretrained_words) {
  config.validate();
  if (num_tags == 0) throw UsageError("encoder needs at least one tag");
  EncoderParams m;
  m.config = config;
  m.num_tags = num_tags;
  m.chars = random_embeddings(std::move(chars), config.char_dim, rng);
  m.chars.lowercase_fallback = false;
  if (pretrained_words) {
    if (pretrained_words->dim != config.word_dim) {
      throw UsageError("pretrained embeddings have dimension " +
                       std::to_string(pretrained_words->dim) + ", model expects " +
                       std::to_string(config.word_dim));
    }
    if (!(pretrained_words->vocab == words)) {
      throw UsageError("pretrained table was built for a different vocabulary");
    }
    m.words = std::move(*pretrained_words);
  } else {
    m.words = random_embeddings(std::move(words), config.word_dim, rng);
  }

  auto& w = m.weights;
  w.char_fwd = LstmCellParams::glorot(config.char_dim, config.char_hidden, rng);
  w.char_bwd = LstmCellParams::glorot(config.char_dim, config.char_hidden, rng);
  if (config.use_char_highway) w.char_highway = HighwayParams::glorot(2 * config.char_hidden, rng);
  w.word_fwd = LstmCellParams::glorot(config.token_dim(), config.word_hidden, rng);
  w.word_bwd = LstmCellParams::glorot(config.token_dim(), config.word_hidden, rng);
  if (config.use_word_highway) {
    w.word_gate_fwd = CarryGateParams::glorot(config.word_hidden, rng);
    w.word_gate_bwd = CarryGateParams::glorot(config.word_hidden, rng);
  }
  w.proj_w = glorot_init(num_tags, 2 * config.word_hidden, rng);
  w.proj_b = Vector(num_tags);
  return m;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& params) {
  EncoderGrads g;
  g.weights = params.weights;
  g.weights.set_zero();
  return g;
}

void EncoderGrads::set_zero() {
  weights.set_zero();
  char_rows.clear();
  word_rows.clear();
}

// --- layers ---------------------------------------------------------------

LstmState lstm_step(const LstmCellParams& params, std::span<const double> x,
                    const LstmState& prev) {
  auto t = step_traced(params, x, prev);
  return {std::move(t.h), std::move(t.c)};
}

std::vector<LstmState> lstm_forward(const LstmCellParams& params,
                                    const std::vector<Vector>& inputs, const LstmState& init) {
  std::vector<LstmState> states;
  states.reserve(inputs.size());
  const LstmState* prev = &init;
  for (const auto& x : inputs) {
    states.push_back(lstm_step(params, x, *prev));
    prev = &states.back();
  }
  return states;
}

std::vector<LstmStepTrace> lstm_trace(const LstmCellParams& params,
                                      const std::vector<Vector>& inputs, const LstmState& init) {
  std::vector<LstmStepTrace> trace;
  trace.reserve(inputs.size());
  LstmState state = init;
  for (const auto& x : inputs) {
    trace.push_back(step_traced(params, x, state));
    state.h = trace.back().h;
    state.c = trace.back().c;
  }
  return trace;
}

std::vector<Vector> lstm_backward(const LstmCellParams& params,
                                  const std::vector<LstmStepTrace>& trace,
                                  const std::vector<Vector>& dh, LstmCellParams& grads) {
  const std::size_t n = params.hidden_dim();
  const std::size_t steps = trace.size();
  std::vector<Vector> dx(steps, Vector(params.input_dim()));
  Vector dh_next(n), dc_next(n);
  const auto p_gates = gates_of(params);
  auto g_gates = gates_of(grads);
  std::array<Vector, 4> da;
  for (auto& v : da) v.resize(n);

  for (std::size_t step = steps; step-- > 0;) {
    const auto& t = trace[step];
    for (std::size_t k = 0; k < n; ++k) {
      const double dh_k = dh[step][k] + dh_next[k];
      const double dc = dc_next[k] + dh_k * t.o[k] * (1.0 - t.tanh_c[k] * t.tanh_c[k]);
      da[0][k] = dc * t.cand[k] * t.i[k] * (1.0 - t.i[k]);
      da[1][k] = dc * t.c_prev[k] * t.f[k] * (1.0 - t.f[k]);
      da[2][k] = dc * t.i[k] * (1.0 - t.cand[k] * t.cand[k]);
      da[3][k] = dh_k * t.tanh_c[k] * t.o[k] * (1.0 - t.o[k]);
      dc_next[k] = dc * t.f[k];
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t g = 0; g < 4; ++g) {
      outer_add(g_gates[g]->from_input, da[g], t.x);
      outer_add(g_gates[g]->from_hidden, da[g], t.h_prev);
      add_into(g_gates[g]->bias, da[g]);
      matvec_transposed_add(p_gates[g]->from_input, da[g], dx[step]);
      matvec_transposed_add(p_gates[g]->from_hidden, da[g], dh_next);
    }
  }
  return dx;
}

std::vector<Vector> bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                   const std::vector<Vector>& inputs) {
  const auto f = lstm_forward(fwd, inputs, LstmState::zeros(fwd.hidden_dim()));
  const auto b = lstm_forward(bwd, reversed(inputs), LstmState::zeros(bwd.hidden_dim()));
  const std::size_t n = inputs.size();
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) out.push_back(concat(f[t].h, b[n - 1 - t].h));
  return out;
}

Vector char_encode(const EmbeddingTable& chars, const LstmCellParams& fwd,
                   const LstmCellParams& bwd, std::string_view word) {
  const auto rows = rows_of(chars, char_ids_of(chars, word));
  const auto f = lstm_forward(fwd, rows, LstmState::zeros(fwd.hidden_dim()));
  const auto b = lstm_forward(bwd, reversed(rows), LstmState::zeros(bwd.hidden_dim()));
  return concat(f.back().h, b.back().h);
}

Vector highway_forward(const HighwayParams& params, std::span<const double> x,
                       HighwayTrace& trace) {
  if (x.size() != params.dim()) {
    throw UsageError("highway: input has " + std::to_string(x.size()) + " entries, layer is " +
                     std::to_string(params.dim()));
  }
  Vector zt = params.transform_b;
  matvec_add(params.transform_w, x, zt);
  Vector zg = params.gate_b;
  matvec_add(params.gate_w, x, zg);
  trace.transform = tanh_act(zt);
  trace.gate = sigmoid(zg);
  Vector y(x.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    y[k] = trace.transform[k] * trace.gate[k] + x[k] * (1.0 - trace.gate[k]);
  }
  return y;
}

Vector highway_forward(const HighwayParams& params, std::span<const double> x) {
  HighwayTrace trace;
  return highway_forward(params, x, trace);
}

Vector highway_backward(const HighwayParams& params, std::span<const double> x,
                        const HighwayTrace& trace, std::span<const double> dy,
                        HighwayParams& grads) {
  const std::size_t d = params.dim();
  Vector dx(d), dzt(d), dzg(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double h = trace.transform[k];
    const double g = trace.gate[k];
    dx[k] = dy[k] * (1.0 - g);
    dzt[k] = dy[k] * g * (1.0 - h * h);
    dzg[k] = dy[k] * (h - x[k]) * g * (1.0 - g);
  }
  outer_add(grads.transform_w, dzt, x);
  add_into(grads.transform_b, dzt);
  outer_add(grads.gate_w, dzg, x);
  add_into(grads.gate_b, dzg);
  matvec_transposed_add(params.transform_w, dzt, dx);
  matvec_transposed_add(params.gate_w, dzg, dx);
  return dx;
}

std::vector<Vector> highway_bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                           const CarryGateParams& gate_fwd,
                                           const CarryGateParams& gate_bwd,
                                           const std::vector<Vector>& inputs) {
  check_carry_gate(gate_fwd, fwd);
  check_carry_gate(gate_bwd, bwd);
  const auto f = lstm_forward(fwd, inputs, LstmState::zeros(fwd.hidden_dim()));
  const auto b = lstm_forward(bwd, reversed(inputs), LstmState::zeros(bwd.hidden_dim()));
  const std::size_t n = inputs.size();
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& x = inputs[t];
    const Vector gf = carry_gate(gate_fwd, x);
    const Vector gb = carry_gate(gate_bwd, x);
    const auto& hf = f[t].h;
    const auto& hb = b[n - 1 - t].h;
    Vector row(2 * x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      row[k] = gf[k] * hf[k] + (1.0 - gf[k]) * x[k];
      row[x.size() + k] = gb[k] * hb[k] + (1.0 - gb[k]) * x[k];
    }
    out.push_back(std::move(row));
  }
  return out;
}

// --- sentence encoder ------------------------------------------------------

EmissionMatrix encode_sentence(const EncoderParams& model, const std::vector<std::string>& tokens,
                               bool training, Rng& rng, EncoderCache* cache) {
  if (tokens.empty()) throw UsageError("encode_sentence: empty sentence");
  const auto& cfg = model.config;
  const auto& w = model.weights;
  const std::size_t n = tokens.size();

  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  c = EncoderCache{};
  c.tokens.resize(n);

  for (std::size_t t = 0; t < n; ++t) {
    auto& tok = c.tokens[t];
    tok.char_ids = char_ids_of(model.chars, tokens[t]);
    const auto rows = rows_of(model.chars, tok.char_ids);
    tok.char_fwd = lstm_trace(w.char_fwd, rows, LstmState::zeros(cfg.char_hidden));
    tok.char_bwd = lstm_trace(w.char_bwd, reversed(rows), LstmState::zeros(cfg.char_hidden));
    tok.char_raw = concat(tok.char_fwd.back().h, tok.char_bwd.back().h);
    const Vector char_vec =
        w.char_highway ? highway_forward(*w.char_highway, tok.char_raw, tok.highway) : tok.char_raw;
    tok.word_id = model.words.row_index(tokens[t]);
    c.token_input.push_back(concat(char_vec, model.words.weights.row(tok.word_id)));
  }

  for (std::size_t t = 0; t < n; ++t) {
    Vector mask = dropout_mask(cfg.token_dim(), cfg.dropout_rate, rng, training);
    Vector x = c.token_input[t];
    for (std::size_t k = 0; k < x.size(); ++k) x[k] *= mask[k];
    c.masks.push_back(std::move(mask));
    c.lstm_input.push_back(std::move(x));
  }

  c.word_fwd = lstm_trace(w.word_fwd, c.lstm_input, LstmState::zeros(cfg.word_hidden));
  c.word_bwd = lstm_trace(w.word_bwd, reversed(c.lstm_input), LstmState::zeros(cfg.word_hidden));

  const bool highway = w.word_gate_fwd && w.word_gate_bwd;
  if (highway) {
    check_carry_gate(*w.word_gate_fwd, w.word_fwd);
    check_carry_gate(*w.word_gate_bwd, w.word_bwd);
  }
  const std::size_t hidden = cfg.word_hidden;
  EmissionMatrix scores(n, model.num_tags);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& hf = c.word_fwd[t].h;
    const auto& hb = c.word_bwd[n - 1 - t].h;
    Vector feat;
    if (highway) {
      const auto& x = c.lstm_input[t];
      c.gate_fwd.push_back(carry_gate(*w.word_gate_fwd, x));
      c.gate_bwd.push_back(carry_gate(*w.word_gate_bwd, x));
      const auto& gf = c.gate_fwd.back();
      const auto& gb = c.gate_bwd.back();
      feat.resize(2 * hidden);
      for (std::size_t k = 0; k < hidden; ++k) {
        feat[k] = gf[k] * hf[k] + (1.0 - gf[k]) * x[k];
        feat[hidden + k] = gb[k] * hb[k] + (1.0 - gb[k]) * x[k];
      }
    } else {
      feat = concat(hf, hb);
    }
    auto row = scores.row(t);
    std::copy(w.proj_b.begin(), w.proj_b.end(), row.begin());
    matvec_add(w.proj_w, feat, row);
    c.features.push_back(std::move(feat));
  }
  c.ready = true;
  return scores;
}

void encoder_backward(const EncoderParams& model, const EncoderCache& cache,
                      const Matrix& upstream, EncoderGrads& grads) {
  if (!cache.ready) throw UsageError("encoder_backward: no cached forward pass");
  const std::size_t n = cache.tokens.size();
  if (upstream.rows() != n || upstream.cols() != model.num_tags) {
    throw UsageError("encoder_backward: upstream gradient shape mismatch");
  }
  const auto& cfg = model.config;
  const auto& w = model.weights;
  auto& g = grads.weights;
  const std::size_t hidden = cfg.word_hidden;
  const bool highway = w.word_gate_fwd && w.word_gate_bwd;

  // Projection.
  std::vector<Vector> dfeat(n, Vector(2 * hidden));
  for (std::size_t t = 0; t < n; ++t) {
    const auto de = upstream.row(t);
    outer_add(g.proj_w, de, cache.features[t]);
    add_into(g.proj_b, de);
    matvec_transposed_add(w.proj_w, de, dfeat[t]);
  }

  // Word-level (highway) Bi-LSTM. Backward-direction gradients are indexed
  // in the cell's right-to-left processing order.
  std::vector<Vector> dh_f(n, Vector(hidden)), dh_b(n, Vector(hidden));
  std::vector<Vector> dx(n, Vector(cfg.token_dim()));
  for (std::size_t t = 0; t < n; ++t) {
    auto& out_b = dh_b[n - 1 - t];
    if (!highway) {
      std::copy(dfeat[t].begin(), dfeat[t].begin() + hidden, dh_f[t].begin());
      std::copy(dfeat[t].begin() + hidden, dfeat[t].end(), out_b.begin());
      continue;
    }
    const auto& x = cache.lstm_input[t];
    const auto& hf = cache.word_fwd[t].h;
    const auto& hb = cache.word_bwd[n - 1 - t].h;
    const auto& gf = cache.gate_fwd[t];
    const auto& gb = cache.gate_bwd[t];
    Vector dzf(hidden), dzb(hidden);
    for (std::size_t k = 0; k < hidden; ++k) {
      const double df = dfeat[t][k];
      const double db = dfeat[t][hidden + k];
      dh_f[t][k] = df * gf[k];
      out_b[k] = db * gb[k];
      dx[t][k] += df * (1.0 - gf[k]) + db * (1.0 - gb[k]);
      dzf[k] = df * (hf[k] - x[k]) * gf[k] * (1.0 - gf[k]);
      dzb[k] = db * (hb[k] - x[k]) * gb[k] * (1.0 - gb[k]);
    }
    outer_add(g.word_gate_fwd->w, dzf, x);
    add_into(g.word_gate_fwd->b, dzf);
    outer_add(g.word_gate_bwd->w, dzb, x);
    add_into(g.word_gate_bwd->b, dzb);
    matvec_transposed_add(w.word_gate_fwd->w, dzf, dx[t]);
    matvec_transposed_add(w.word_gate_bwd->w, dzb, dx[t]);
  }
  const auto dx_f = lstm_backward(w.word_fwd, cache.word_fwd, dh_f, g.word_fwd);
  const auto dx_b = lstm_backward(w.word_bwd, cache.word_bwd, dh_b, g.word_bwd);
  for (std::size_t t = 0; t < n; ++t) {
    add_into(dx[t], dx_f[t]);
    add_into(dx[t], dx_b[n - 1 - t]);
  }

  // Dropout, then split into char and word parts.
  const std::size_t char_width = 2 * cfg.char_hidden;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& tok = cache.tokens[t];
    Vector d = dx[t];
    for (std::size_t k = 0; k < d.size(); ++k) d[k] *= cache.masks[t][k];

    if (model.words.trainable) {
      auto [it, inserted] = grads.word_rows.try_emplace(tok.word_id, Vector(cfg.word_dim));
      add_into(it->second, std::span<const double>(d).subspan(char_width));
    }

    Vector dchar(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(char_width));
    if (w.char_highway) {
      dchar = highway_backward(*w.char_highway, tok.char_raw, tok.highway, dchar, *g.char_highway);
    }
    const std::size_t len = tok.char_ids.size();
    std::vector<Vector> dcf(len, Vector(cfg.char_hidden)), dcb(len, Vector(cfg.char_hidden));
    std::copy(dchar.begin(), dchar.begin() + cfg.char_hidden, dcf.back().begin());
    std::copy(dchar.begin() + cfg.char_hidden, dchar.end(), dcb.back().begin());
    const auto dxf = lstm_backward(w.char_fwd, tok.char_fwd, dcf, g.char_fwd);
    const auto dxb = lstm_backward(w.char_bwd, tok.char_bwd, dcb, g.char_bwd);
    if (!model.chars.trainable) continue;
    for (std::size_t j = 0; j < len; ++j) {
      auto [it, inserted] = grads.char_rows.try_emplace(tok.char_ids[j], Vector(cfg.char_dim));
      add_into(it->second, dxf[j]);
      add_into(it->second, dxb[len - 1 - j]);
    }
  }
}

}  // namespace sekira
