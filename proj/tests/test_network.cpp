#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "evt/network.hpp"
#include "oracles.hpp"

using namespace evt;

namespace {

NetworkConfig tiny_config() {
  NetworkConfig cfg;
  cfg.lstm_units = 3;
  cfg.char_emb_dim = 2;
  cfg.char_filters = 3;
  cfg.char_filter_width = 3;
  cfg.word_dim = 4;
  return cfg;
}

std::shared_ptr<EmbeddingTable> table_for(const Corpus& c, int dim, uint64_t seed) {
  auto t = std::make_shared<EmbeddingTable>();
  t->dim = dim;
  Rng rng(seed);
  for (const auto& s : c.sentences)
    for (const auto& tok : s.tokens)
      if (!t->entries.count(tok.surface)) {
        Vec v(dim);
        for (auto& x : v) x = rng.uniform(-0.5, 0.5);
        t->entries.emplace(tok.surface, std::move(v));
      }
  t->unk_vector.assign(dim, 0.0);
  for (size_t i = 0; i < t->unk_vector.size(); ++i) t->unk_vector[i] = rng.uniform(-0.25, 0.25);
  return t;
}

TaggerModel tiny_model(const Corpus& c, uint64_t seed) {
  const NetworkConfig cfg = tiny_config();
  TaggerModel m = make_model(cfg, build_char_vocab(c), table_for(c, cfg.word_dim, seed), "");
  init_params(m, seed + 1);
  return m;
}

CrfParams zero_crf(int L) {
  CrfParams crf;
  crf.transitions = Matrix(L, L);
  crf.start_scores.assign(L, 0.0);
  crf.end_scores.assign(L, 0.0);
  return crf;
}

LstmDirParams random_lstm(Rng& rng, int in_dim, int H) {
  LstmDirParams p;
  p.W = Matrix(4 * H, in_dim);
  p.U = Matrix(4 * H, H);
  p.b.assign(4 * H, 0.0);
  for (auto& x : p.W.a) x = rng.uniform(-0.4, 0.4);
  for (auto& x : p.U.a) x = rng.uniform(-0.4, 0.4);
  for (auto& x : p.b) x = rng.uniform(-0.2, 0.2);
  return p;
}

}  // namespace

TEST_CASE("char cnn output shape and padding") {
  CharCnnParams p;
  p.n_filters = 5;
  p.width = 3;
  p.emb_dim = 2;
  p.char_embeddings = Matrix(6, 2);
  Rng rng(1);
  for (auto& x : p.char_embeddings.a) x = rng.uniform(-1, 1);
  p.filters.assign(static_cast<size_t>(p.n_filters) * p.width * p.emb_dim, 0.0);
  for (auto& x : p.filters) x = rng.uniform(-1, 1);
  p.filter_bias.assign(p.n_filters, 0.1);

  CHECK(char_cnn_forward({2, 3, 4}, p).size() == 5);
  CHECK(char_cnn_forward({2}, p).size() == 5);  // single character works via padding
  CHECK_THROWS_AS(char_cnn_forward({}, p), std::invalid_argument);
}

TEST_CASE("char cnn matches a hand computation") {
  // one width-1 filter in one embedding dimension over a 2-char word
  CharCnnParams p;
  p.n_filters = 1;
  p.width = 1;
  p.emb_dim = 1;
  p.char_embeddings = Matrix(4, 1);
  p.char_embeddings(2, 0) = 0.5;   // 'a'
  p.char_embeddings(3, 0) = -0.3;  // 'b'
  p.filters = {2.0};
  p.filter_bias = {0.1};

  const Vec out = char_cnn_forward({2, 3}, p);
  REQUIRE(out.size() == 1);
  const double expected = std::max(std::tanh(0.1 + 2.0 * 0.5), std::tanh(0.1 + 2.0 * -0.3));
  CHECK(out[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lstm forward shapes and zero fixture") {
  const int H = 4, in_dim = 3;
  LstmDirParams zero;
  zero.W = Matrix(4 * H, in_dim);
  zero.U = Matrix(4 * H, H);
  zero.b.assign(4 * H, 0.0);
  std::vector<Vec> xs(5, Vec(in_dim, 0.7));
  const auto h = lstm_direction_forward(xs, zero, Direction::kForward);
  REQUIRE(h.size() == xs.size());
  for (const auto& v : h)
    for (double x : v) CHECK(x == 0.0);
  CHECK_THROWS_AS(lstm_direction_forward({}, zero, Direction::kForward), std::invalid_argument);
}

TEST_CASE("backward direction equals reversed forward on reversed input") {
  Rng rng(17);
  const int H = 3, in_dim = 2;
  const LstmDirParams p = random_lstm(rng, in_dim, H);
  std::vector<Vec> xs(6, Vec(in_dim));
  for (auto& v : xs)
    for (auto& x : v) x = rng.uniform(-1, 1);

  std::vector<Vec> rev(xs.rbegin(), xs.rend());
  auto fwd_of_rev = lstm_direction_forward(rev, p, Direction::kForward);
  std::reverse(fwd_of_rev.begin(), fwd_of_rev.end());
  const auto bwd = lstm_direction_forward(xs, p, Direction::kBackward);
  REQUIRE(bwd.size() == fwd_of_rev.size());
  for (size_t t = 0; t < bwd.size(); ++t)
    for (int j = 0; j < H; ++j) CHECK(bwd[t][j] == doctest::Approx(fwd_of_rev[t][j]));
}

TEST_CASE("bilstm stack output and eval-mode mask independence") {
  const Corpus c = generate_synthetic_corpus(31, 3);
  const TaggerModel m = tiny_model(c, 8);
  const Sentence& s = c.sentences[0];

  std::vector<Vec> inputs;
  for (const auto& tok : s.tokens) {
    Vec w = lookup(*m.embeddings, tok.surface);
    Vec cv = char_cnn_forward({2}, m.char_cnn());
    w.insert(w.end(), cv.begin(), cv.end());
    inputs.push_back(std::move(w));
  }

  Rng rng(3);
  const DropoutMasks masks_a = sample_masks(m.config, rng);
  const DropoutMasks masks_b = sample_masks(m.config, rng);

  const auto eval_a = bilstm_stack_forward(inputs, m, false, masks_a);
  const auto eval_b = bilstm_stack_forward(inputs, m, false, masks_b);
  REQUIRE(eval_a.size() == inputs.size());
  for (const auto& v : eval_a) CHECK(v.size() == 2 * static_cast<size_t>(m.config.lstm_units));
  for (size_t t = 0; t < eval_a.size(); ++t)
    CHECK(eval_a[t] == eval_b[t]);

  // train mode: identical masks give identical outputs
  const auto train_a = bilstm_stack_forward(inputs, m, true, masks_a);
  const auto train_b = bilstm_stack_forward(inputs, m, true, masks_a);
  for (size_t t = 0; t < train_a.size(); ++t) CHECK(train_a[t] == train_b[t]);
}

TEST_CASE("emissions shape, bias fixture and determinism") {
  const Corpus c = generate_synthetic_corpus(5, 2);
  TaggerModel m = tiny_model(c, 21);
  const Sentence& s = c.sentences[1];
  const DropoutMasks masks = ones_masks(m.config);

  const Matrix e = emissions(s, m, false, masks);
  CHECK(e.rows == s.tokens.size());
  CHECK(e.cols == 15);

  const Matrix e2 = emissions(s, m, false, masks);
  CHECK(e.a == e2.a);

  // zero projection weights leave only the bias
  double* proj_w = m.tensor("proj_W");
  std::fill(proj_w, proj_w + m.layout.find("proj_W").size, 0.0);
  double* proj_b = m.tensor("proj_b");
  for (int y = 0; y < 15; ++y) proj_b[y] = 0.25 * y;
  const Matrix eb = emissions(s, m, false, masks);
  for (size_t t = 0; t < eb.rows; ++t)
    for (size_t y = 0; y < eb.cols; ++y) CHECK(eb(t, y) == doctest::Approx(0.25 * y));
}

TEST_CASE("emissions are independent of the unk vector when fully covered") {
  const Corpus c = generate_synthetic_corpus(13, 2);
  TaggerModel m = tiny_model(c, 4);
  const Sentence& s = c.sentences[0];
  const Matrix before = emissions(s, m, false, ones_masks(m.config));

  auto patched = std::make_shared<EmbeddingTable>(*m.embeddings);
  for (auto& x : patched->unk_vector) x += 123.0;
  m.embeddings = patched;
  const Matrix after = emissions(s, m, false, ones_masks(m.config));
  CHECK(before.a == after.a);
}

TEST_CASE("crf partition closed forms") {
  const int L = 15;
  const CrfParams crf = zero_crf(L);
  Matrix e(2, L);
  CHECK(crf_log_partition(e, crf) == doctest::Approx(2.0 * std::log(15.0)).epsilon(1e-12));

  // T = 1 reduces to log-sum-exp of start + emissions + end
  Rng rng(2);
  CrfParams r = oracles::random_crf(rng, 4);
  Matrix e1 = oracles::random_emissions(rng, 1, 4);
  Vec terms(4);
  for (int y = 0; y < 4; ++y) terms[y] = r.start_scores[y] + e1(0, y) + r.end_scores[y];
  CHECK(crf_log_partition(e1, r) ==
        doctest::Approx(log_sum_exp(terms.data(), 4)).epsilon(1e-12));
}

TEST_CASE("crf ops match the enumeration oracle") {
  Rng rng(77);
  for (int iter = 0; iter < 60; ++iter) {
    const int T = 1 + static_cast<int>(rng.below(4));
    const int L = 2 + static_cast<int>(rng.below(2));
    const CrfParams crf = oracles::random_crf(rng, L);
    const Matrix e = oracles::random_emissions(rng, T, L);
    const auto oracle = oracles::enumerate_paths(e, crf);

    CHECK(std::abs(crf_log_partition(e, crf) - oracle.log_z) <= 1e-9);

    TagSequence gold(T);
    for (int t = 0; t < T; ++t) gold[t] = static_cast<int>(rng.below(L));
    const double nll = crf_nll(e, crf, gold);
    CHECK(std::abs(nll - (oracle.log_z - oracles::path_score(e, crf, gold))) <= 1e-9);
    CHECK(nll >= -1e-12);

    CHECK(viterbi_decode(e, crf) == TagSequence(oracle.best_seq.begin(), oracle.best_seq.end()));

    // log-sum-exp dominates every path and probabilities sum to one
    double prob_sum = 0.0;
    for (double s : oracle.all_scores) {
      CHECK(oracle.log_z >= s - 1e-12);
      prob_sum += std::exp(s - oracle.log_z);
    }
    CHECK(prob_sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("crf_nll special cases") {
  const int L = 15;
  const CrfParams crf = zero_crf(L);
  Matrix e(2, L);
  CHECK(crf_nll(e, crf, {3, 7}) == doctest::Approx(2.0 * std::log(15.0)).epsilon(1e-12));

  // overwhelming margin for the gold path drives the NLL to zero
  Matrix big(3, L);
  const TagSequence gold = {1, 2, 0};
  for (int t = 0; t < 3; ++t) big(t, gold[t]) = 1000.0;
  CHECK(crf_nll(big, crf, gold) == doctest::Approx(0.0).epsilon(1e-9));

  CHECK_THROWS_AS(crf_nll(e, crf, {0, 99}), std::invalid_argument);
  CHECK_THROWS_AS(crf_nll(e, crf, {0}), std::invalid_argument);
}

TEST_CASE("viterbi tie handling and single-token case") {
  const int L = 15;
  const CrfParams crf = zero_crf(L);
  Matrix e(4, L);
  CHECK(viterbi_decode(e, crf) == TagSequence{0, 0, 0, 0});

  Rng rng(8);
  CrfParams r = oracles::random_crf(rng, 5);
  Matrix e1 = oracles::random_emissions(rng, 1, 5);
  int best = 0;
  double best_v = -1e300;
  for (int y = 0; y < 5; ++y) {
    const double v = r.start_scores[y] + e1(0, y) + r.end_scores[y];
    if (v > best_v) {
      best_v = v;
      best = y;
    }
  }
  CHECK(viterbi_decode(e1, r) == TagSequence{best});
}

TEST_CASE("uniform emission shift moves the partition and not the argmax") {
  Rng rng(91);
  for (int iter = 0; iter < 25; ++iter) {
    const int T = 2 + static_cast<int>(rng.below(3));
    const int L = 3;
    const CrfParams crf = oracles::random_crf(rng, L);
    Matrix e = oracles::random_emissions(rng, T, L);
    const double z0 = crf_log_partition(e, crf);
    const TagSequence v0 = viterbi_decode(e, crf);
    const double c = rng.uniform(-3, 3);
    const int t_shift = static_cast<int>(rng.below(T));
    for (int y = 0; y < L; ++y) e(t_shift, y) += c;
    CHECK(crf_log_partition(e, crf) == doctest::Approx(z0 + c).epsilon(1e-10));
    CHECK(viterbi_decode(e, crf) == v0);
  }
}

TEST_CASE("predict composes emissions, viterbi and decode") {
  const Corpus c = generate_synthetic_corpus(19, 3);
  const TaggerModel m = tiny_model(c, 33);
  const Sentence& s = c.sentences[2];

  const auto direct = predict(s, m);
  const Matrix e = emissions(s, m, false, ones_masks(m.config));
  const auto composed = decode_bio(viterbi_decode(e, m.crf()));
  CHECK(direct == composed);
  CHECK(predict(s, m) == direct);
}

TEST_CASE("model serialization round-trips bit-exactly") {
  const Corpus c = generate_synthetic_corpus(3, 4);
  TaggerModel m = tiny_model(c, 55);
  m.vectors_path = "some/vectors.vec";

  const std::string p1 = "/tmp/evt_model_test_1.bin";
  const std::string p2 = "/tmp/evt_model_test_2.bin";
  save_model(m, p1);
  TaggerModel loaded = load_model(p1);
  save_model(loaded, p2);

  auto slurp = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  CHECK(slurp(p1) == slurp(p2));
  CHECK_FALSE(slurp(p1).empty());

  CHECK(loaded.vectors_path == m.vectors_path);
  CHECK(loaded.params == m.params);
  CHECK(loaded.config.lstm_units == m.config.lstm_units);
  CHECK(loaded.char_vocab.chars == m.char_vocab.chars);

  loaded.embeddings = m.embeddings;
  const Sentence& s = c.sentences[0];
  CHECK(predict(s, loaded) == predict(s, m));
}

TEST_CASE("model loader rejects corrupt files") {
  const std::string path = "/tmp/evt_model_test_bad.bin";
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOTAMODELFILE.....";
  }
  CHECK_THROWS_AS(load_model(path), FormatError);

  const Corpus c = generate_synthetic_corpus(3, 2);
  TaggerModel m = tiny_model(c, 9);
  save_model(m, path);
  // truncate
  std::string bytes;
  {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    bytes = ss.str();
  }
  {
    std::ofstream f(path, std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_model(path), FormatError);
  CHECK_THROWS_AS(load_model("/tmp/evt_no_such_model.bin"), FormatError);
}
