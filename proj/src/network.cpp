#include "evt/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "evt/text.hpp"
#include "network_internal.hpp"

namespace evt {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void NetworkConfig::validate() const {
  if (lstm_units < 1) throw FormatError("lstm_units must be positive");
  if (lstm_layers != 2) throw FormatError("lstm_layers must be 2");
  if (dropout_input < 0.0 || dropout_input >= 1.0 || dropout_recurrent < 0.0 ||
      dropout_recurrent >= 1.0)
    throw FormatError("dropout rates must lie in [0, 1)");
  if (char_emb_dim < 1 || char_filters < 1) throw FormatError("char dimensions must be positive");
  if (char_filter_width < 1 || char_filter_width % 2 == 0)
    throw FormatError("char_filter_width must be odd");
  if (n_labels != kNumLabels) throw FormatError("n_labels must equal the label alphabet size");
  if (word_dim < 1) throw FormatError("word_dim must be positive");
}

size_t ModelLayout::add(std::string name, std::vector<size_t> shape) {
  size_t sz = 1;
  for (size_t d : shape) sz *= d;
  tensors.push_back({std::move(name), std::move(shape), total, sz});
  total += sz;
  return tensors.back().offset;
}

const TensorSpec& ModelLayout::find(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw FormatError("unknown tensor '" + std::string(name) + "'");
}

double* ModelLayout::view(Vec& buf, std::string_view name) const {
  return buf.data() + find(name).offset;
}

const double* ModelLayout::view(const Vec& buf, std::string_view name) const {
  return buf.data() + find(name).offset;
}

ModelLayout build_layout(const NetworkConfig& cfg, int n_chars) {
  ModelLayout layout;
  const size_t H = cfg.lstm_units;
  const size_t F = cfg.char_filters;
  layout.add("char_emb", {static_cast<size_t>(n_chars), static_cast<size_t>(cfg.char_emb_dim)});
  layout.add("char_filters",
             {F, static_cast<size_t>(cfg.char_filter_width), static_cast<size_t>(cfg.char_emb_dim)});
  layout.add("char_bias", {F});
  for (int layer = 1; layer <= 2; ++layer) {
    const size_t in_dim = layer == 1 ? static_cast<size_t>(cfg.word_repr_dim()) : 2 * H;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string base = "lstm" + std::to_string(layer) + "_" + dir;
      layout.add(base + "_W", {4 * H, in_dim});
      layout.add(base + "_U", {4 * H, H});
      layout.add(base + "_b", {4 * H});
    }
  }
  layout.add("proj_W", {static_cast<size_t>(cfg.n_labels), 2 * H});
  layout.add("proj_b", {static_cast<size_t>(cfg.n_labels)});
  layout.add("crf_trans", {static_cast<size_t>(cfg.n_labels), static_cast<size_t>(cfg.n_labels)});
  layout.add("crf_start", {static_cast<size_t>(cfg.n_labels)});
  layout.add("crf_end", {static_cast<size_t>(cfg.n_labels)});
  return layout;
}

DropoutMasks ones_masks(const NetworkConfig& cfg) {
  DropoutMasks m;
  for (int layer = 0; layer < 2; ++layer) {
    const int in_dim = layer == 0 ? cfg.word_repr_dim() : 2 * cfg.lstm_units;
    for (int dir = 0; dir < 2; ++dir) {
      m.input[layer][dir].assign(in_dim, 1.0);
      m.recurrent[layer][dir].assign(cfg.lstm_units, 1.0);
    }
  }
  return m;
}

DropoutMasks sample_masks(const NetworkConfig& cfg, Rng& rng) {
  DropoutMasks m = ones_masks(cfg);
  auto fill = [&rng](Vec& mask, double rate) {
    if (rate <= 0.0) return;
    const double keep = 1.0 - rate;
    for (double& x : mask) x = rng.uniform() < keep ? 1.0 / keep : 0.0;
  };
  for (int layer = 0; layer < 2; ++layer)
    for (int dir = 0; dir < 2; ++dir) {
      fill(m.input[layer][dir], cfg.dropout_input);
      fill(m.recurrent[layer][dir], cfg.dropout_recurrent);
    }
  return m;
}

// ---------------------------------------------------------------------------
// Model construction.
// ---------------------------------------------------------------------------

TaggerModel make_model(const NetworkConfig& cfg, CharVocab char_vocab,
                       std::shared_ptr<const EmbeddingTable> embeddings,
                       std::string vectors_path) {
  cfg.validate();
  TaggerModel m;
  m.config = cfg;
  m.char_vocab = std::move(char_vocab);
  m.labels = label_alphabet();
  m.embeddings = std::move(embeddings);
  m.vectors_path = std::move(vectors_path);
  if (m.embeddings && static_cast<int>(m.embeddings->dim) != cfg.word_dim)
    throw FormatError("embedding table dim does not match word_dim");
  m.layout = build_layout(cfg, m.char_vocab.size());
  m.params.assign(m.layout.total, 0.0);
  return m;
}

void init_params(TaggerModel& model, uint64_t seed) {
  Rng rng(seed);
  const size_t H = model.config.lstm_units;
  for (const auto& spec : model.layout.tensors) {
    double* p = model.params.data() + spec.offset;
    const bool is_bias = spec.shape.size() == 1;
    const bool is_crf = spec.name.rfind("crf_", 0) == 0;
    if (is_crf) {
      std::fill(p, p + spec.size, 0.0);
      continue;
    }
    if (is_bias) {
      std::fill(p, p + spec.size, 0.0);
      if (spec.name.rfind("lstm", 0) == 0)  // forget-gate block
        std::fill(p + H, p + 2 * H, 1.0);
      continue;
    }
    double fan_in, fan_out;
    if (spec.shape.size() == 2) {
      fan_out = static_cast<double>(spec.shape[0]);
      fan_in = static_cast<double>(spec.shape[1]);
    } else {  // conv filters F x W x C
      fan_in = static_cast<double>(spec.shape[1] * spec.shape[2]);
      fan_out = static_cast<double>(spec.shape[0] * spec.shape[1]);
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (size_t i = 0; i < spec.size; ++i) p[i] = rng.uniform(-limit, limit);
  }
}

CharCnnParams TaggerModel::char_cnn() const {
  CharCnnParams p;
  p.n_filters = config.char_filters;
  p.width = config.char_filter_width;
  p.emb_dim = config.char_emb_dim;
  const auto& emb_spec = layout.find("char_emb");
  p.char_embeddings = Matrix(emb_spec.shape[0], emb_spec.shape[1]);
  std::copy_n(params.data() + emb_spec.offset, emb_spec.size, p.char_embeddings.a.begin());
  const auto& f_spec = layout.find("char_filters");
  p.filters.assign(params.begin() + f_spec.offset, params.begin() + f_spec.offset + f_spec.size);
  const auto& b_spec = layout.find("char_bias");
  p.filter_bias.assign(params.begin() + b_spec.offset, params.begin() + b_spec.offset + b_spec.size);
  return p;
}

LstmDirParams TaggerModel::lstm(int layer, Direction dir) const {
  const std::string base =
      "lstm" + std::to_string(layer) + (dir == Direction::kForward ? "_fwd" : "_bwd");
  LstmDirParams p;
  const auto& w = layout.find(base + "_W");
  p.W = Matrix(w.shape[0], w.shape[1]);
  std::copy_n(params.data() + w.offset, w.size, p.W.a.begin());
  const auto& u = layout.find(base + "_U");
  p.U = Matrix(u.shape[0], u.shape[1]);
  std::copy_n(params.data() + u.offset, u.size, p.U.a.begin());
  const auto& b = layout.find(base + "_b");
  p.b.assign(params.begin() + b.offset, params.begin() + b.offset + b.size);
  return p;
}

CrfParams TaggerModel::crf() const {
  CrfParams p;
  const auto& t = layout.find("crf_trans");
  p.transitions = Matrix(t.shape[0], t.shape[1]);
  std::copy_n(params.data() + t.offset, t.size, p.transitions.a.begin());
  const auto& s = layout.find("crf_start");
  p.start_scores.assign(params.begin() + s.offset, params.begin() + s.offset + s.size);
  const auto& e = layout.find("crf_end");
  p.end_scores.assign(params.begin() + e.offset, params.begin() + e.offset + e.size);
  return p;
}

// ---------------------------------------------------------------------------
// Forward cores.
// ---------------------------------------------------------------------------

namespace detail {

RawCnn cnn_raw(const TaggerModel& m) {
  return {m.tensor("char_emb"), m.tensor("char_filters"), m.tensor("char_bias"),
          m.config.char_filters, m.config.char_filter_width, m.config.char_emb_dim,
          m.char_vocab.size()};
}

RawLstm lstm_raw(const TaggerModel& m, int layer, Direction dir) {
  const std::string base =
      "lstm" + std::to_string(layer) + (dir == Direction::kForward ? "_fwd" : "_bwd");
  const int in_dim = layer == 1 ? m.config.word_repr_dim() : 2 * m.config.lstm_units;
  return {m.tensor(base + "_W"), m.tensor(base + "_U"), m.tensor(base + "_b"), in_dim,
          m.config.lstm_units};
}

RawCrf crf_raw(const TaggerModel& m) {
  return {m.tensor("crf_trans"), m.tensor("crf_start"), m.tensor("crf_end"),
          m.config.n_labels};
}

std::vector<int> padded_char_indices(const CharVocab& vocab, const std::string& surface,
                                     int width) {
  const auto cps = utf8_decode(surface);
  if (cps.empty()) throw std::invalid_argument("empty word in char CNN input");
  const int pad = (width - 1) / 2;
  std::vector<int> idx(cps.size() + 2 * pad, CharVocab::kPad);
  for (size_t i = 0; i < cps.size(); ++i) idx[pad + i] = vocab.index_of(cps[i]);
  return idx;
}

Vec cnn_core(const RawCnn& p, const std::vector<int>& padded, CharCnnTrace* trace) {
  const int positions = static_cast<int>(padded.size()) - (p.width - 1);
  Vec pooled(p.n_filters, -std::numeric_limits<double>::infinity());
  std::vector<int> argmax(p.n_filters, 0);
  for (int pos = 0; pos < positions; ++pos) {
    for (int f = 0; f < p.n_filters; ++f) {
      double a = p.bias[f];
      const double* flt = p.filt + static_cast<size_t>(f) * p.width * p.emb_dim;
      for (int w = 0; w < p.width; ++w) {
        const double* e = p.emb + static_cast<size_t>(padded[pos + w]) * p.emb_dim;
        const double* fl = flt + static_cast<size_t>(w) * p.emb_dim;
        for (int k = 0; k < p.emb_dim; ++k) a += fl[k] * e[k];
      }
      const double v = std::tanh(a);
      if (v > pooled[f]) {
        pooled[f] = v;
        argmax[f] = pos;
      }
    }
  }
  if (trace != nullptr) {
    trace->padded_indices = padded;
    trace->argmax_pos = std::move(argmax);
    trace->pooled = pooled;
  }
  return pooled;
}

void lstm_core(const RawLstm& p, const std::vector<Vec>& xs_masked, const double* rec_mask,
               std::vector<Vec>& h_out, LstmDirTrace* trace) {
  const int T = static_cast<int>(xs_masked.size());
  const int H = p.H;
  h_out.assign(T, Vec(H, 0.0));
  Vec h_prev(H, 0.0), c_prev(H, 0.0), hm(H), z(4 * H);
  if (trace != nullptr) {
    trace->x_masked = xs_masked;
    trace->h_prev_masked.assign(T, Vec(H));
    trace->gate_i.assign(T, Vec(H));
    trace->gate_f.assign(T, Vec(H));
    trace->gate_g.assign(T, Vec(H));
    trace->gate_o.assign(T, Vec(H));
    trace->cell.assign(T, Vec(H));
    trace->tanh_cell.assign(T, Vec(H));
    trace->h.assign(T, Vec(H));
  }
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < H; ++j) hm[j] = rec_mask ? h_prev[j] * rec_mask[j] : h_prev[j];
    std::copy(p.b, p.b + 4 * H, z.begin());
    matvec_add(p.W, 4 * H, p.in_dim, xs_masked[t].data(), z.data());
    matvec_add(p.U, 4 * H, H, hm.data(), z.data());
    Vec& h = h_out[t];
    for (int j = 0; j < H; ++j) {
      const double gi = sigmoid(z[j]);
      const double gf = sigmoid(z[H + j]);
      const double gg = std::tanh(z[2 * H + j]);
      const double go = sigmoid(z[3 * H + j]);
      const double c = gf * c_prev[j] + gi * gg;
      const double tc = std::tanh(c);
      h[j] = go * tc;
      if (trace != nullptr) {
        trace->h_prev_masked[t][j] = hm[j];
        trace->gate_i[t][j] = gi;
        trace->gate_f[t][j] = gf;
        trace->gate_g[t][j] = gg;
        trace->gate_o[t][j] = go;
        trace->cell[t][j] = c;
        trace->tanh_cell[t][j] = tc;
        trace->h[t][j] = h[j];
      }
      c_prev[j] = c;
    }
    h_prev = h;
  }
}

double crf_forward_alphas(const Matrix& e, const RawCrf& crf, Matrix* alphas) {
  const int T = static_cast<int>(e.rows);
  const int L = crf.L;
  Matrix local;
  Matrix& a = alphas != nullptr ? *alphas : local;
  a = Matrix(T, L);
  for (int y = 0; y < L; ++y) a(0, y) = crf.start[y] + e(0, y);
  Vec tmp(L);
  for (int t = 1; t < T; ++t) {
    for (int y = 0; y < L; ++y) {
      for (int p = 0; p < L; ++p) tmp[p] = a(t - 1, p) + crf.trans[p * L + y];
      a(t, y) = e(t, y) + log_sum_exp(tmp.data(), L);
    }
  }
  Vec fin(L);
  for (int y = 0; y < L; ++y) fin[y] = a(T - 1, y) + crf.end[y];
  return log_sum_exp(fin.data(), L);
}

double crf_gold_score(const Matrix& e, const RawCrf& crf, const TagSequence& gold) {
  const int T = static_cast<int>(e.rows);
  if (static_cast<int>(gold.size()) != T)
    throw std::invalid_argument("gold tag sequence length mismatch");
  for (int tag : gold)
    if (tag < 0 || tag >= crf.L) throw std::invalid_argument("tag outside the label alphabet");
  double s = crf.start[gold[0]] + e(0, gold[0]);
  for (int t = 1; t < T; ++t) s = (s + crf.trans[gold[t - 1] * crf.L + gold[t]]) + e(t, gold[t]);
  return s + crf.end[gold[T - 1]];
}

Vec word_representation(const TaggerModel& m, const std::string& surface,
                        CharCnnTrace* trace) {
  const Vec& wv = lookup(*m.embeddings, surface);
  const Vec cv = cnn_core(cnn_raw(m),
                          padded_char_indices(m.char_vocab, surface, m.config.char_filter_width),
                          trace);
  Vec out;
  out.reserve(wv.size() + cv.size());
  out.insert(out.end(), wv.begin(), wv.end());
  out.insert(out.end(), cv.begin(), cv.end());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public ops.
// ---------------------------------------------------------------------------

Vec char_cnn_forward(const std::vector<int>& char_indices, const CharCnnParams& p) {
  if (char_indices.empty()) throw std::invalid_argument("empty word in char CNN input");
  const int pad = (p.width - 1) / 2;
  std::vector<int> padded(char_indices.size() + 2 * pad, CharVocab::kPad);
  std::copy(char_indices.begin(), char_indices.end(), padded.begin() + pad);
  detail::RawCnn raw{p.char_embeddings.a.data(), p.filters.data(), p.filter_bias.data(),
                     p.n_filters, p.width, p.emb_dim,
                     static_cast<int>(p.char_embeddings.rows)};
  return detail::cnn_core(raw, padded, nullptr);
}

std::vector<Vec> lstm_direction_forward(const std::vector<Vec>& inputs,
                                        const LstmDirParams& p, Direction dir) {
  if (inputs.empty()) throw std::invalid_argument("empty input sequence");
  detail::RawLstm raw{p.W.a.data(), p.U.a.data(), p.b.data(), static_cast<int>(p.W.cols),
                      static_cast<int>(p.U.cols)};
  std::vector<Vec> h;
  if (dir == Direction::kForward) {
    detail::lstm_core(raw, inputs, nullptr, h, nullptr);
    return h;
  }
  std::vector<Vec> rev(inputs.rbegin(), inputs.rend());
  detail::lstm_core(raw, rev, nullptr, h, nullptr);
  std::reverse(h.begin(), h.end());
  return h;
}

namespace {

/// Runs one bidirectional layer; returns concatenated 2H outputs.
std::vector<Vec> bilstm_layer(const TaggerModel& model, int layer,
                              const std::vector<Vec>& inputs, const DropoutMasks& masks,
                              std::array<LstmDirTrace, 2>* trace) {
  const int T = static_cast<int>(inputs.size());
  const int H = model.config.lstm_units;
  std::vector<Vec> out(T, Vec(2 * H));
  for (int d = 0; d < 2; ++d) {
    const Direction dir = d == 0 ? Direction::kForward : Direction::kBackward;
    const detail::RawLstm raw = detail::lstm_raw(model, layer, dir);
    const Vec& in_mask = masks.input[layer - 1][d];
    const Vec& rec_mask = masks.recurrent[layer - 1][d];
    std::vector<Vec> xs(T);
    for (int t = 0; t < T; ++t) {
      const Vec& src = inputs[d == 0 ? t : T - 1 - t];
      Vec x(raw.in_dim);
      for (int j = 0; j < raw.in_dim; ++j) x[j] = src[j] * in_mask[j];
      xs[t] = std::move(x);
    }
    std::vector<Vec> h;
    detail::lstm_core(raw, xs, rec_mask.data(), h, trace != nullptr ? &(*trace)[d] : nullptr);
    for (int t = 0; t < T; ++t) {
      const Vec& src = h[d == 0 ? t : T - 1 - t];
      std::copy(src.begin(), src.end(), out[t].begin() + d * H);
    }
  }
  return out;
}

}  // namespace

std::vector<Vec> bilstm_stack_forward(const std::vector<Vec>& inputs,
                                      const TaggerModel& model, bool train_mode,
                                      const DropoutMasks& masks) {
  if (inputs.empty()) throw std::invalid_argument("empty input sequence");
  if (!train_mode) {
    const DropoutMasks eval = ones_masks(model.config);
    std::vector<Vec> h1 = bilstm_layer(model, 1, inputs, eval, nullptr);
    return bilstm_layer(model, 2, h1, eval, nullptr);
  }
  std::vector<Vec> h1 = bilstm_layer(model, 1, inputs, masks, nullptr);
  return bilstm_layer(model, 2, h1, masks, nullptr);
}

Matrix emissions_traced(const Sentence& s, const TaggerModel& model,
                        const DropoutMasks& masks, SentenceTrace* trace) {
  const int T = static_cast<int>(s.tokens.size());
  if (T == 0) throw std::invalid_argument("empty sentence");
  if (!model.embeddings) throw FormatError("model has no embedding table attached");
  std::vector<Vec> inputs(T);
  std::vector<CharCnnTrace> char_traces(trace != nullptr ? T : 0);
  for (int t = 0; t < T; ++t)
    inputs[t] = detail::word_representation(model, s.tokens[t].surface,
                                            trace != nullptr ? &char_traces[t] : nullptr);
  std::vector<Vec> h1 =
      bilstm_layer(model, 1, inputs, masks, trace != nullptr ? &trace->lstm[0] : nullptr);
  std::vector<Vec> h2 =
      bilstm_layer(model, 2, h1, masks, trace != nullptr ? &trace->lstm[1] : nullptr);

  const int L = model.config.n_labels;
  const double* proj_w = model.tensor("proj_W");
  const double* proj_b = model.tensor("proj_b");
  Matrix e(T, L);
  for (int t = 0; t < T; ++t) {
    std::copy(proj_b, proj_b + L, e.row(t));
    matvec_add(proj_w, L, 2 * model.config.lstm_units, h2[t].data(), e.row(t));
  }
  if (trace != nullptr) {
    trace->word_repr = std::move(inputs);
    trace->char_cnn = std::move(char_traces);
    trace->layer_out[0] = std::move(h1);
    trace->layer_out[1] = std::move(h2);
    trace->emission_scores = e;
  }
  return e;
}

Matrix emissions(const Sentence& s, const TaggerModel& model, bool train_mode,
                 const DropoutMasks& masks) {
  if (!train_mode) {
    const DropoutMasks eval = ones_masks(model.config);
    return emissions_traced(s, model, eval, nullptr);
  }
  return emissions_traced(s, model, masks, nullptr);
}

double crf_log_partition(const Matrix& emissions, const CrfParams& crf) {
  detail::RawCrf raw{crf.transitions.a.data(), crf.start_scores.data(),
                     crf.end_scores.data(), static_cast<int>(crf.start_scores.size())};
  return detail::crf_forward_alphas(emissions, raw, nullptr);
}

double crf_nll(const Matrix& emissions, const CrfParams& crf, const TagSequence& gold) {
  detail::RawCrf raw{crf.transitions.a.data(), crf.start_scores.data(),
                     crf.end_scores.data(), static_cast<int>(crf.start_scores.size())};
  return detail::crf_forward_alphas(emissions, raw, nullptr) -
         detail::crf_gold_score(emissions, raw, gold);
}

TagSequence viterbi_decode(const Matrix& emissions, const CrfParams& crf) {
  const int T = static_cast<int>(emissions.rows);
  const int L = static_cast<int>(crf.start_scores.size());
  const double* trans = crf.transitions.a.data();
  Matrix delta(T, L);
  std::vector<std::vector<int>> backptr(T, std::vector<int>(L, 0));
  for (int y = 0; y < L; ++y) delta(0, y) = crf.start_scores[y] + emissions(0, y);
  for (int t = 1; t < T; ++t) {
    for (int y = 0; y < L; ++y) {
      double best = -std::numeric_limits<double>::infinity();
      int best_p = 0;
      for (int p = 0; p < L; ++p) {
        const double score = delta(t - 1, p) + trans[p * L + y];
        if (score > best) {  // ties keep the lowest predecessor index
          best = score;
          best_p = p;
        }
      }
      delta(t, y) = emissions(t, y) + best;
      backptr[t][y] = best_p;
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  int best_y = 0;
  for (int y = 0; y < L; ++y) {
    const double score = delta(T - 1, y) + crf.end_scores[y];
    if (score > best) {
      best = score;
      best_y = y;
    }
  }
  TagSequence tags(T);
  tags[T - 1] = best_y;
  for (int t = T - 1; t > 0; --t) tags[t - 1] = backptr[t][tags[t]];
  return tags;
}

std::vector<EventSpan> predict(const Sentence& s, const TaggerModel& model) {
  const DropoutMasks eval = ones_masks(model.config);
  const Matrix e = emissions_traced(s, model, eval, nullptr);
  return decode_bio(viterbi_decode(e, model.crf()));
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'E', 'V', 'T', 'M', 'O', 'D', 'E', 'L'};
constexpr uint32_t kFormatVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size()) throw FormatError("truncated model file");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::pair<std::string, std::string>> config_entries(const TaggerModel& m) {
  const NetworkConfig& c = m.config;
  return {
      {"lstm_units", std::to_string(c.lstm_units)},
      {"lstm_layers", std::to_string(c.lstm_layers)},
      {"dropout_input", format_double(c.dropout_input)},
      {"dropout_recurrent", format_double(c.dropout_recurrent)},
      {"char_emb_dim", std::to_string(c.char_emb_dim)},
      {"char_filters", std::to_string(c.char_filters)},
      {"char_filter_width", std::to_string(c.char_filter_width)},
      {"n_labels", std::to_string(c.n_labels)},
      {"word_dim", std::to_string(c.word_dim)},
      {"vectors_path", m.vectors_path},
  };
}

}  // namespace

void save_model(const TaggerModel& model, const std::string& path) {
  std::string out;
  out.append(kMagic, sizeof kMagic);
  put_u32(out, kFormatVersion);

  const auto entries = config_entries(model);
  put_u32(out, static_cast<uint32_t>(entries.size()));
  for (const auto& [k, v] : entries) {
    put_str(out, k);
    put_str(out, v);
  }

  put_u32(out, static_cast<uint32_t>(model.labels.size()));
  for (const auto& label : model.labels) put_str(out, label);

  put_u32(out, static_cast<uint32_t>(model.char_vocab.chars.size()));
  for (char32_t c : model.char_vocab.chars) put_u32(out, static_cast<uint32_t>(c));

  put_u32(out, static_cast<uint32_t>(model.layout.tensors.size()));
  for (const auto& spec : model.layout.tensors) {
    put_str(out, spec.name);
    put_u32(out, static_cast<uint32_t>(spec.shape.size()));
    for (size_t d : spec.shape) put_u64(out, d);
    for (size_t i = 0; i < spec.size; ++i) put_f64(out, model.params[spec.offset + i]);
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

TaggerModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string buf = ss.str();
  Reader r{buf};

  r.need(sizeof kMagic);
  if (std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0)
    throw FormatError("'" + path + "' is not a model file (bad magic)");
  r.pos = sizeof kMagic;
  const uint32_t version = r.u32();
  if (version != kFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(version));

  NetworkConfig cfg;
  std::string vectors_path;
  const uint32_t n_entries = r.u32();
  for (uint32_t i = 0; i < n_entries; ++i) {
    const std::string k = r.str();
    const std::string v = r.str();
    try {
      if (k == "lstm_units") cfg.lstm_units = std::stoi(v);
      else if (k == "lstm_layers") cfg.lstm_layers = std::stoi(v);
      else if (k == "dropout_input") cfg.dropout_input = std::stod(v);
      else if (k == "dropout_recurrent") cfg.dropout_recurrent = std::stod(v);
      else if (k == "char_emb_dim") cfg.char_emb_dim = std::stoi(v);
      else if (k == "char_filters") cfg.char_filters = std::stoi(v);
      else if (k == "char_filter_width") cfg.char_filter_width = std::stoi(v);
      else if (k == "n_labels") cfg.n_labels = std::stoi(v);
      else if (k == "word_dim") cfg.word_dim = std::stoi(v);
      else if (k == "vectors_path") vectors_path = v;
      else throw FormatError("unknown config key '" + k + "' in model file");
    } catch (const std::invalid_argument&) {
      throw FormatError("bad value for config key '" + k + "'");
    }
  }

  const uint32_t n_labels = r.u32();
  std::vector<std::string> labels(n_labels);
  for (auto& label : labels) label = r.str();
  if (labels != label_alphabet()) throw FormatError("model label alphabet mismatch");

  CharVocab vocab;
  const uint32_t n_chars = r.u32();
  vocab.chars.resize(n_chars);
  for (auto& c : vocab.chars) c = static_cast<char32_t>(r.u32());

  TaggerModel model = make_model(cfg, std::move(vocab), nullptr, vectors_path);
  const uint32_t n_tensors = r.u32();
  if (n_tensors != model.layout.tensors.size())
    throw FormatError("model tensor count mismatch");
  for (const auto& spec : model.layout.tensors) {
    const std::string name = r.str();
    if (name != spec.name) throw FormatError("unexpected tensor '" + name + "'");
    const uint32_t ndims = r.u32();
    if (ndims != spec.shape.size()) throw FormatError("tensor rank mismatch for '" + name + "'");
    for (size_t d = 0; d < spec.shape.size(); ++d)
      if (r.u64() != spec.shape[d]) throw FormatError("tensor shape mismatch for '" + name + "'");
    for (size_t i = 0; i < spec.size; ++i) model.params[spec.offset + i] = r.f64();
  }
  if (r.pos != buf.size()) throw FormatError("trailing bytes in model file");
  return model;
}

}  // namespace evt
