#include "evt/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "evt/evaluation.hpp"
#include "evt/text.hpp"
#include "network_internal.hpp"

namespace evt {

namespace {

using detail::RawCnn;
using detail::RawCrf;
using detail::RawLstm;

void TrainConfigCheck(const TrainConfig& c) {
  if (c.batch_size < 1) throw FormatError("batch_size must be >= 1");
  if (c.tau <= 0.0) throw FormatError("tau must be positive");
  if (c.learning_rate <= 0.0) throw FormatError("learning_rate must be positive");
  if (c.beta1 < 0.0 || c.beta1 >= 1.0 || c.beta2 < 0.0 || c.beta2 >= 1.0)
    throw FormatError("beta1/beta2 must lie in [0, 1)");
  if (c.epsilon <= 0.0) throw FormatError("epsilon must be positive");
  if (c.max_epochs < 1) throw FormatError("max_epochs must be >= 1");
  if (c.patience < 1) throw FormatError("patience must be >= 1");
}

// Gradient views into a flat buffer sharing the model layout.
struct GradViews {
  double* char_emb;
  double* char_filt;
  double* char_bias;
  double* lstm_W[2][2];
  double* lstm_U[2][2];
  double* lstm_b[2][2];
  double* proj_W;
  double* proj_b;
  double* crf_trans;
  double* crf_start;
  double* crf_end;
};

GradViews make_views(const ModelLayout& layout, Vec& g) {
  GradViews v;
  v.char_emb = layout.view(g, "char_emb");
  v.char_filt = layout.view(g, "char_filters");
  v.char_bias = layout.view(g, "char_bias");
  for (int layer = 0; layer < 2; ++layer)
    for (int d = 0; d < 2; ++d) {
      const std::string base =
          "lstm" + std::to_string(layer + 1) + (d == 0 ? "_fwd" : "_bwd");
      v.lstm_W[layer][d] = layout.view(g, base + "_W");
      v.lstm_U[layer][d] = layout.view(g, base + "_U");
      v.lstm_b[layer][d] = layout.view(g, base + "_b");
    }
  v.proj_W = layout.view(g, "proj_W");
  v.proj_b = layout.view(g, "proj_b");
  v.crf_trans = layout.view(g, "crf_trans");
  v.crf_start = layout.view(g, "crf_start");
  v.crf_end = layout.view(g, "crf_end");
  return v;
}

/// CRF gradient of one sentence's NLL with respect to emissions and,
/// when the destinations are non-null, the CRF parameters; computed via
/// forward-backward marginals. Returns the NLL.
double crf_backward_core(const Matrix& e, const RawCrf& crf, const TagSequence& gold,
                         Matrix& demissions, double* dtrans, double* dstart,
                         double* dend) {
  const int T = static_cast<int>(e.rows);
  const int L = crf.L;
  Matrix alphas;
  const double log_z = detail::crf_forward_alphas(e, crf, &alphas);
  const double gold_score = detail::crf_gold_score(e, crf, gold);

  Matrix betas(T, L);
  for (int y = 0; y < L; ++y) betas(T - 1, y) = crf.end[y];
  Vec tmp(L);
  for (int t = T - 2; t >= 0; --t) {
    for (int p = 0; p < L; ++p) {
      for (int y = 0; y < L; ++y) tmp[y] = crf.trans[p * L + y] + e(t + 1, y) + betas(t + 1, y);
      betas(t, p) = log_sum_exp(tmp.data(), L);
    }
  }

  demissions = Matrix(T, L);
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < L; ++y)
      demissions(t, y) = std::exp(alphas(t, y) + betas(t, y) - log_z);
  for (int t = 0; t < T; ++t) demissions(t, gold[t]) -= 1.0;

  if (dstart != nullptr && dend != nullptr) {
    for (int y = 0; y < L; ++y) {
      dstart[y] += std::exp(alphas(0, y) + betas(0, y) - log_z);
      dend[y] += std::exp(alphas(T - 1, y) + betas(T - 1, y) - log_z);
    }
    dstart[gold[0]] -= 1.0;
    dend[gold[T - 1]] -= 1.0;
  }
  if (dtrans != nullptr) {
    for (int t = 0; t + 1 < T; ++t) {
      for (int p = 0; p < L; ++p) {
        const double ap = alphas(t, p);
        for (int y = 0; y < L; ++y) {
          dtrans[p * L + y] +=
              std::exp(ap + crf.trans[p * L + y] + e(t + 1, y) + betas(t + 1, y) - log_z);
        }
      }
      dtrans[gold[t] * L + gold[t + 1]] -= 1.0;
    }
  }
  return log_z - gold_score;
}

/// BPTT through one LSTM direction (processing order). dh_out holds the
/// downstream gradient on each h_t; dx_masked receives the gradient on the
/// masked inputs.
void lstm_core_backward(const RawLstm& p, const LstmDirTrace& tr, const double* rec_mask,
                        const std::vector<Vec>& dh_out, std::vector<Vec>& dx_masked,
                        double* dW, double* dU, double* db) {
  const int T = static_cast<int>(dh_out.size());
  const int H = p.H;
  dx_masked.assign(T, Vec(p.in_dim, 0.0));
  Vec dh_carry(H, 0.0), dc_carry(H, 0.0), dz(4 * H), tmp(H);
  for (int t = T - 1; t >= 0; --t) {
    for (int j = 0; j < H; ++j) {
      const double dh = dh_out[t][j] + dh_carry[j];
      const double tc = tr.tanh_cell[t][j];
      const double gi = tr.gate_i[t][j];
      const double gf = tr.gate_f[t][j];
      const double gg = tr.gate_g[t][j];
      const double go = tr.gate_o[t][j];
      const double dc = dc_carry[j] + dh * go * (1.0 - tc * tc);
      const double c_prev = t > 0 ? tr.cell[t - 1][j] : 0.0;
      const double d_o = dh * tc;
      dz[j] = dc * gg * gi * (1.0 - gi);
      dz[H + j] = dc * c_prev * gf * (1.0 - gf);
      dz[2 * H + j] = dc * gi * (1.0 - gg * gg);
      dz[3 * H + j] = d_o * go * (1.0 - go);
      dc_carry[j] = dc * gf;
    }
    outer_add(dW, 4 * H, p.in_dim, dz.data(), tr.x_masked[t].data());
    outer_add(dU, 4 * H, H, dz.data(), tr.h_prev_masked[t].data());
    for (int j = 0; j < 4 * H; ++j) db[j] += dz[j];
    matvec_transposed_add(p.W, 4 * H, p.in_dim, dz.data(), dx_masked[t].data());
    std::fill(tmp.begin(), tmp.end(), 0.0);
    matvec_transposed_add(p.U, 4 * H, H, dz.data(), tmp.data());
    for (int j = 0; j < H; ++j) dh_carry[j] = rec_mask ? tmp[j] * rec_mask[j] : tmp[j];
  }
}

/// Backward through one bidirectional layer. d_out is T x 2H; returns the
/// gradient on the layer's un-masked input vectors.
std::vector<Vec> layer_backward(const TaggerModel& model, int layer,
                                const std::array<LstmDirTrace, 2>& traces,
                                const DropoutMasks& masks, const std::vector<Vec>& d_out,
                                GradViews& gv) {
  const int T = static_cast<int>(d_out.size());
  const int H = model.config.lstm_units;
  const int in_dim = layer == 1 ? model.config.word_repr_dim() : 2 * H;
  std::vector<Vec> d_in(T, Vec(in_dim, 0.0));
  for (int d = 0; d < 2; ++d) {
    const Direction dir = d == 0 ? Direction::kForward : Direction::kBackward;
    const RawLstm raw = detail::lstm_raw(model, layer, dir);
    const Vec& in_mask = masks.input[layer - 1][d];
    const Vec& rec_mask = masks.recurrent[layer - 1][d];
    std::vector<Vec> dh(T, Vec(H));
    for (int t = 0; t < T; ++t) {
      const int src = d == 0 ? t : T - 1 - t;
      for (int j = 0; j < H; ++j) dh[t][j] = d_out[src][d * H + j];
    }
    std::vector<Vec> dx_masked;
    lstm_core_backward(raw, traces[d], rec_mask.data(), dh, dx_masked,
                       gv.lstm_W[layer - 1][d], gv.lstm_U[layer - 1][d],
                       gv.lstm_b[layer - 1][d]);
    for (int t = 0; t < T; ++t) {
      const int src = d == 0 ? t : T - 1 - t;
      for (int j = 0; j < in_dim; ++j) d_in[src][j] += dx_masked[t][j] * in_mask[j];
    }
  }
  return d_in;
}

void cnn_backward(const RawCnn& p, const CharCnnTrace& tr, const double* d_out,
                  GradViews& gv) {
  for (int f = 0; f < p.n_filters; ++f) {
    const double g = d_out[f];
    if (g == 0.0) continue;
    const double out = tr.pooled[f];
    const double dpre = g * (1.0 - out * out);
    gv.char_bias[f] += dpre;
    const int pos = tr.argmax_pos[f];
    for (int w = 0; w < p.width; ++w) {
      const int idx = tr.padded_indices[pos + w];
      const double* emb_row = p.emb + static_cast<size_t>(idx) * p.emb_dim;
      const double* filt_row = p.filt + (static_cast<size_t>(f) * p.width + w) * p.emb_dim;
      double* demb_row = gv.char_emb + static_cast<size_t>(idx) * p.emb_dim;
      double* dfilt_row = gv.char_filt + (static_cast<size_t>(f) * p.width + w) * p.emb_dim;
      for (int k = 0; k < p.emb_dim; ++k) {
        dfilt_row[k] += dpre * emb_row[k];
        demb_row[k] += dpre * filt_row[k];
      }
    }
  }
}

/// Accumulates one sentence's unscaled NLL gradient into g.
double sentence_backward(const TaggerModel& model, const Sentence& s,
                         const DropoutMasks& masks, Vec& g) {
  const TagSequence gold = encode_bio(s);
  SentenceTrace trace;
  const Matrix e = emissions_traced(s, model, masks, &trace);
  const int T = static_cast<int>(e.rows);
  const int L = model.config.n_labels;
  const int two_h = 2 * model.config.lstm_units;

  GradViews gv = make_views(model.layout, g);
  Matrix demissions;
  const double nll = crf_backward_core(e, detail::crf_raw(model), gold, demissions,
                                       gv.crf_trans, gv.crf_start, gv.crf_end);

  const double* proj_w = model.tensor("proj_W");
  std::vector<Vec> dh2(T, Vec(two_h, 0.0));
  for (int t = 0; t < T; ++t) {
    const double* de = demissions.row(t);
    for (int y = 0; y < L; ++y) gv.proj_b[y] += de[y];
    outer_add(gv.proj_W, L, two_h, de, trace.layer_out[1][t].data());
    matvec_transposed_add(proj_w, L, two_h, de, dh2[t].data());
  }

  const std::vector<Vec> dh1 = layer_backward(model, 2, trace.lstm[1], masks, dh2, gv);
  const std::vector<Vec> d_input = layer_backward(model, 1, trace.lstm[0], masks, dh1, gv);

  const RawCnn cnn = detail::cnn_raw(model);
  const int word_dim = model.config.word_dim;
  for (int t = 0; t < T; ++t)
    cnn_backward(cnn, trace.char_cnn[t], d_input[t].data() + word_dim, gv);
  return nll;
}

double mean_sentence_nll(const TaggerModel& model, const std::vector<const Sentence*>& batch,
                         const std::vector<DropoutMasks>& masks) {
  const RawCrf crf = detail::crf_raw(model);
  double sum = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const Matrix e = emissions_traced(*batch[i], model, masks[i], nullptr);
    sum += detail::crf_forward_alphas(e, crf, nullptr) -
           detail::crf_gold_score(e, crf, encode_bio(*batch[i]));
  }
  return sum / static_cast<double>(batch.size());
}

}  // namespace

void TrainConfig::validate() const { TrainConfigCheck(*this); }

Matrix crf_emission_gradient(const Matrix& emissions, const CrfParams& crf,
                             const TagSequence& gold) {
  const RawCrf raw{crf.transitions.a.data(), crf.start_scores.data(), crf.end_scores.data(),
                   static_cast<int>(crf.start_scores.size())};
  Matrix demissions;
  crf_backward_core(emissions, raw, gold, demissions, nullptr, nullptr, nullptr);
  return demissions;
}

double backward(const TaggerModel& model, const std::vector<const Sentence*>& batch,
                const std::vector<DropoutMasks>& masks, Vec& grads) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (masks.size() != batch.size())
    throw std::invalid_argument("one DropoutMasks per batch sentence required");
  const size_t k = batch.size();
  std::vector<Vec> bufs(k);
  std::vector<double> nlls(k, 0.0);
  auto run_one = [&](size_t i) {
    bufs[i].assign(model.layout.total, 0.0);
    nlls[i] = sentence_backward(model, *batch[i], masks[i], bufs[i]);
  };
  if (k > 1 && std::thread::hardware_concurrency() > 1) {
    std::vector<std::future<void>> futs;
    futs.reserve(k);
    for (size_t i = 0; i < k; ++i)
      futs.push_back(std::async(std::launch::async, run_one, i));
    for (auto& fu : futs) fu.get();
  } else {
    for (size_t i = 0; i < k; ++i) run_one(i);
  }
  grads.assign(model.layout.total, 0.0);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < grads.size(); ++j) grads[j] += bufs[i][j];
  const double inv = 1.0 / static_cast<double>(k);
  for (double& x : grads) x *= inv;
  double total_nll = 0.0;
  for (double n : nlls) total_nll += n;
  return total_nll * inv;
}

double backward(const TaggerModel& model, const std::vector<const Sentence*>& batch,
                Vec& grads) {
  const std::vector<DropoutMasks> masks(batch.size(), ones_masks(model.config));
  return backward(model, batch, masks, grads);
}

double global_norm(const Vec& grads) {
  double ss = 0.0;
  for (double g : grads) ss += g * g;
  return std::sqrt(ss);
}

double clip_global_norm(Vec& grads, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  const double norm = global_norm(grads);
  if (norm > tau) {
    const double scale = tau / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

void nadam_step(Vec& params, const Vec& grads, OptimizerState& state,
                const TrainConfig& cfg) {
  if (params.size() != grads.size()) throw std::invalid_argument("shape mismatch");
  if (state.m.empty()) state.m.assign(params.size(), 0.0);
  if (state.v.empty()) state.v.assign(params.size(), 0.0);
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw std::invalid_argument("optimizer state shape mismatch");
  const long t = ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (size_t j = 0; j < params.size(); ++j) {
    const double g = grads[j];
    const double m = cfg.beta1 * state.m[j] + (1.0 - cfg.beta1) * g;
    const double v = cfg.beta2 * state.v[j] + (1.0 - cfg.beta2) * g * g;
    state.m[j] = m;
    state.v[j] = v;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    const double m_bar = cfg.beta1 * m_hat + (1.0 - cfg.beta1) * g / bc1;
    params[j] -= cfg.learning_rate * m_bar / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

namespace {

std::pair<double, double> dev_strict_scores(const TaggerModel& model, const Corpus& dev) {
  Corpus system;
  system.split_name = dev.split_name;
  system.sentences.reserve(dev.sentences.size());
  for (const auto& sent : dev.sentences) {
    Sentence out;
    out.tokens = sent.tokens;
    out.events = predict(sent, model);
    system.sentences.push_back(std::move(out));
  }
  const ScoreReport r = score(dev, system);
  return {r.strict.f1, r.strict.f1_class};
}

}  // namespace

std::pair<TaggerModel, TrainHistory> train(const Corpus& train_corpus,
                                           const Corpus& dev_corpus,
                                           std::shared_ptr<const EmbeddingTable> embeddings,
                                           const NetworkConfig& net_cfg,
                                           const TrainConfig& cfg,
                                           std::ostream* log,
                                           const std::string& vectors_path) {
  cfg.validate();
  if (train_corpus.sentences.empty()) throw std::invalid_argument("empty training corpus");
  if (!embeddings) throw std::invalid_argument("no embedding table");

  NetworkConfig net = net_cfg;
  if (net.word_dim == 0) net.word_dim = static_cast<int>(embeddings->dim);
  if (net.word_dim != static_cast<int>(embeddings->dim))
    throw FormatError("configured word_dim does not match the embedding table");

  TaggerModel model =
      make_model(net, build_char_vocab(train_corpus), std::move(embeddings), vectors_path);
  init_params(model, cfg.seed);
  Rng rng(cfg.seed + 0x9E3779B97F4A7C15ull);

  TrainHistory history;
  OptimizerState opt;
  Vec grads;
  Vec best_params;
  double best_f1 = -1.0;
  int epochs_since_best = 0;

  const size_t n = train_corpus.sentences.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double nll_sum = 0.0;
    for (size_t pos = 0; pos < n; pos += cfg.batch_size) {
      const size_t take = std::min<size_t>(cfg.batch_size, n - pos);
      std::vector<const Sentence*> batch(take);
      std::vector<DropoutMasks> masks;
      masks.reserve(take);
      for (size_t i = 0; i < take; ++i) {
        batch[i] = &train_corpus.sentences[order[pos + i]];
        masks.push_back(sample_masks(model.config, rng));
      }
      nll_sum += backward(model, batch, masks, grads) * static_cast<double>(take);
      clip_global_norm(grads, cfg.tau);
      const double post = global_norm(grads);
      if (post > cfg.tau * (1.0 + 1e-9))
        throw std::logic_error("post-clip gradient norm exceeds tau");
      history.max_post_clip_grad_norm = std::max(history.max_post_clip_grad_norm, post);
      nadam_step(model.params, grads, opt, cfg);
    }

    const auto [dev_f1, dev_f1_class] = dev_strict_scores(model, dev_corpus);
    EpochRecord rec{epoch, nll_sum / static_cast<double>(n), dev_f1, dev_f1_class};
    history.epochs.push_back(rec);
    if (log != nullptr) {
      char line[160];
      std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f\n", rec.epoch, rec.mean_nll,
                    rec.dev_strict_f1, rec.dev_f1_class);
      *log << line << std::flush;
    }

    if (dev_f1 > best_f1) {
      best_f1 = dev_f1;
      history.best_epoch = epoch;
      best_params = model.params;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    if (epochs_since_best >= cfg.patience) break;
  }

  if (history.best_epoch > 0) model.params = std::move(best_params);
  return {std::move(model), std::move(history)};
}

double grad_check(const NetworkConfig& tiny_cfg, uint64_t seed, double h) {
  Rng rng(seed);
  const Corpus corpus = generate_synthetic_corpus(rng.next_u64(), 2);

  auto table = std::make_shared<EmbeddingTable>();
  NetworkConfig cfg = tiny_cfg;
  if (cfg.word_dim == 0) cfg.word_dim = 4;
  table->dim = static_cast<size_t>(cfg.word_dim);
  for (const auto& sent : corpus.sentences)
    for (const auto& tok : sent.tokens)
      if (!table->entries.count(tok.surface)) {
        Vec v(table->dim);
        for (auto& x : v) x = rng.uniform(-0.5, 0.5);
        table->entries.emplace(tok.surface, std::move(v));
      }
  table->unk_vector.assign(table->dim, 0.0);

  TaggerModel model = make_model(cfg, build_char_vocab(corpus), table, "");
  init_params(model, rng.next_u64());

  std::vector<const Sentence*> batch;
  for (const auto& sent : corpus.sentences) batch.push_back(&sent);
  const std::vector<DropoutMasks> masks(batch.size(), ones_masks(model.config));

  Vec analytic;
  backward(model, batch, masks, analytic);

  double max_rel = 0.0;
  for (size_t j = 0; j < model.params.size(); ++j) {
    const double saved = model.params[j];
    model.params[j] = saved + h;
    const double up = mean_sentence_nll(model, batch, masks);
    model.params[j] = saved - h;
    const double down = mean_sentence_nll(model, batch, masks);
    model.params[j] = saved;
    const double fd = (up - down) / (2.0 * h);
    // Denominator floor 1e-5: below it the difference quotient's own
    // rounding noise (~eps * |NLL| / h) dominates any true discrepancy.
    const double denom = std::max({std::abs(analytic[j]), std::abs(fd), 1e-5});
    max_rel = std::max(max_rel, std::abs(analytic[j] - fd) / denom);
  }
  return max_rel;
}

// ---------------------------------------------------------------------------
// Configuration files.
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view v, long line_no) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    std::ostringstream os;
    os << "line " << line_no << ": bad value '" << v << "'";
    throw ParseError(os.str());
  }
  return out;
}

}  // namespace

RunConfig parse_config_file(std::istream& in) {
  RunConfig cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    if (const size_t hash = sv.find('#'); hash != std::string_view::npos)
      sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const size_t eq = sv.find('=');
    if (eq == std::string_view::npos) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 'key = value'";
      throw ParseError(os.str());
    }
    const std::string key{trim(sv.substr(0, eq))};
    const std::string_view value = trim(sv.substr(eq + 1));

    if (key == "batch_size") cfg.train.batch_size = parse_number<int>(value, line_no);
    else if (key == "tau") cfg.train.tau = parse_number<double>(value, line_no);
    else if (key == "learning_rate") cfg.train.learning_rate = parse_number<double>(value, line_no);
    else if (key == "beta1") cfg.train.beta1 = parse_number<double>(value, line_no);
    else if (key == "beta2") cfg.train.beta2 = parse_number<double>(value, line_no);
    else if (key == "epsilon") cfg.train.epsilon = parse_number<double>(value, line_no);
    else if (key == "max_epochs") cfg.train.max_epochs = parse_number<int>(value, line_no);
    else if (key == "patience") cfg.train.patience = parse_number<int>(value, line_no);
    else if (key == "seed") cfg.train.seed = parse_number<uint64_t>(value, line_no);
    else if (key == "lstm_units") cfg.net.lstm_units = parse_number<int>(value, line_no);
    else if (key == "lstm_layers") cfg.net.lstm_layers = parse_number<int>(value, line_no);
    else if (key == "dropout_input") cfg.net.dropout_input = parse_number<double>(value, line_no);
    else if (key == "dropout_recurrent")
      cfg.net.dropout_recurrent = parse_number<double>(value, line_no);
    else if (key == "char_emb_dim") cfg.net.char_emb_dim = parse_number<int>(value, line_no);
    else if (key == "char_filters") cfg.net.char_filters = parse_number<int>(value, line_no);
    else if (key == "char_filter_width")
      cfg.net.char_filter_width = parse_number<int>(value, line_no);
    else if (key == "n_labels") cfg.net.n_labels = parse_number<int>(value, line_no);
    else if (key == "word_dim") cfg.net.word_dim = parse_number<int>(value, line_no);
    else {
      std::ostringstream os;
      os << "line " << line_no << ": unknown key '" << key << "'";
      throw ParseError(os.str());
    }
  }
  cfg.train.validate();
  return cfg;
}

RunConfig parse_config_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return parse_config_file(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace evt
