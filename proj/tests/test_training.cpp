#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "evt/evaluation.hpp"
#include "evt/training.hpp"
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
  return t;
}

TaggerModel tiny_model(const Corpus& c, uint64_t seed) {
  const NetworkConfig cfg = tiny_config();
  TaggerModel m = make_model(cfg, build_char_vocab(c), table_for(c, cfg.word_dim, seed), "");
  init_params(m, seed + 1);
  return m;
}

double batch_nll(const TaggerModel& m, const std::vector<const Sentence*>& batch,
                 const std::vector<DropoutMasks>& masks) {
  const CrfParams crf = m.crf();
  double sum = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const Matrix e = emissions(*batch[i], m, true, masks[i]);
    sum += crf_nll(e, crf, encode_bio(*batch[i]));
  }
  return sum / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("clip_global_norm fixtures") {
  Vec small = {0.3, 0.4};  // norm 0.5
  CHECK(clip_global_norm(small, 1.0) == doctest::Approx(0.5));
  CHECK(small == Vec{0.3, 0.4});

  Vec big = {2.0, 0.0};  // norm 2
  CHECK(clip_global_norm(big, 1.0) == doctest::Approx(2.0));
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] == 0.0);
  CHECK(global_norm(big) == doctest::Approx(1.0));

  Vec zeros(5, 0.0);
  clip_global_norm(zeros, 1.0);
  CHECK(zeros == Vec(5, 0.0));

  Rng rng(4);
  for (int iter = 0; iter < 100; ++iter) {
    Vec g(20);
    for (auto& x : g) x = rng.uniform(-3, 3);
    clip_global_norm(g, 1.0);
    CHECK(global_norm(g) <= 1.0 + 1e-12);
  }
}

TEST_CASE("nadam zero gradient leaves parameters unchanged") {
  Vec params = {1.5, -2.0};
  Vec grads = {0.0, 0.0};
  OptimizerState state;
  TrainConfig cfg;
  nadam_step(params, grads, state, cfg);
  CHECK(params == Vec{1.5, -2.0});
  CHECK(state.step == 1);
}

TEST_CASE("nadam single-step fixture") {
  // scalar parameter, g = 1, defaults, t = 1; the documented update gives
  //   m=0.1 v=0.001 m_hat=1 v_hat=1 m_bar=1.9
  //   delta = 0.002 * 1.9 / (1 + 1e-8)
  Vec params = {1.0};
  Vec grads = {1.0};
  OptimizerState state;
  TrainConfig cfg;
  nadam_step(params, grads, state, cfg);
  const double expected_delta = 0.002 * 1.9 / (1.0 + 1e-8);
  CHECK(params[0] == doctest::Approx(1.0 - expected_delta).epsilon(1e-12));
  CHECK(params[0] < 1.0);  // moves against the gradient
}

TEST_CASE("nadam descends a quadratic") {
  // f(x) = 0.5 (x - 3)^2, gradient x - 3
  double x = 0.0;
  OptimizerState state;
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  auto loss = [](double v) { return 0.5 * (v - 3.0) * (v - 3.0); };
  const double l0 = loss(x);
  Vec params = {x};
  for (int step = 0; step < 2; ++step) {
    Vec grads = {params[0] - 3.0};
    nadam_step(params, grads, state, cfg);
  }
  CHECK(loss(params[0]) < l0);
}

TEST_CASE("crf emission gradient equals enumeration marginals minus gold") {
  Rng rng(6);
  for (int iter = 0; iter < 30; ++iter) {
    const int T = 1 + static_cast<int>(rng.below(4));
    const int L = 2 + static_cast<int>(rng.below(2));
    const CrfParams crf = oracles::random_crf(rng, L);
    const Matrix e = oracles::random_emissions(rng, T, L);
    TagSequence gold(T);
    for (int t = 0; t < T; ++t) gold[t] = static_cast<int>(rng.below(L));

    const Matrix de = crf_emission_gradient(e, crf, gold);
    const auto oracle = oracles::enumerate_paths(e, crf);
    for (int t = 0; t < T; ++t)
      for (int y = 0; y < L; ++y) {
        const double want = oracle.node_marginals(t, y) - (gold[t] == y ? 1.0 : 0.0);
        CHECK(de(t, y) == doctest::Approx(want).epsilon(1e-9));
      }
  }
}

TEST_CASE("duplicated sentence leaves the mean gradient unchanged") {
  const Corpus c = generate_synthetic_corpus(44, 1);
  const TaggerModel m = tiny_model(c, 10);
  const Sentence* s = &c.sentences[0];

  Vec g1, g2;
  backward(m, {s}, g1);
  backward(m, {s, s}, g2);
  REQUIRE(g1.size() == g2.size());
  for (size_t j = 0; j < g1.size(); ++j) CHECK(g1[j] == doctest::Approx(g2[j]).epsilon(1e-12));
}

TEST_CASE("grad_check stays within tolerance and is deterministic") {
  const double err = grad_check(tiny_config(), 2024);
  CHECK(err <= 1e-4);
  CHECK(grad_check(tiny_config(), 2024) == err);

  // doubling h keeps the error in the same regime
  const double err2 = grad_check(tiny_config(), 2024, 2e-5);
  CHECK(err2 <= 1e-3);
  CHECK(err2 <= 200.0 * std::max(err, 1e-9));
}

TEST_CASE("backward with dropout masks matches finite differences") {
  const Corpus c = generate_synthetic_corpus(3, 2);
  TaggerModel m = tiny_model(c, 12);
  std::vector<const Sentence*> batch = {&c.sentences[0], &c.sentences[1]};

  Rng rng(55);
  std::vector<DropoutMasks> masks;
  masks.push_back(sample_masks(m.config, rng));
  masks.push_back(sample_masks(m.config, rng));

  Vec analytic;
  backward(m, batch, masks, analytic);

  const double h = 1e-5;
  double max_rel = 0.0;
  for (size_t j = 0; j < m.params.size(); ++j) {
    const double saved = m.params[j];
    m.params[j] = saved + h;
    const double up = batch_nll(m, batch, masks);
    m.params[j] = saved - h;
    const double down = batch_nll(m, batch, masks);
    m.params[j] = saved;
    const double fd = (up - down) / (2 * h);
    const double rel =
        std::abs(analytic[j] - fd) / std::max({std::abs(analytic[j]), std::abs(fd), 1e-6});
    max_rel = std::max(max_rel, rel);
  }
  CHECK(max_rel <= 1e-4);
}

TEST_CASE("one small step on the first batch lowers the loss") {
  const Corpus c = generate_synthetic_corpus(70, 8);
  TaggerModel m = tiny_model(c, 20);
  std::vector<const Sentence*> batch;
  for (const auto& s : c.sentences) batch.push_back(&s);
  const std::vector<DropoutMasks> masks(batch.size(), ones_masks(m.config));

  Vec grads;
  const double before = backward(m, batch, masks, grads);
  clip_global_norm(grads, 1.0);
  OptimizerState state;
  TrainConfig cfg;
  cfg.learning_rate = 1e-4;
  nadam_step(m.params, grads, state, cfg);
  CHECK(batch_nll(m, batch, masks) < before);
}

TEST_CASE("backward rejects bad input") {
  const Corpus c = generate_synthetic_corpus(1, 1);
  const TaggerModel m = tiny_model(c, 1);
  Vec g;
  CHECK_THROWS_AS(backward(m, {}, g), std::invalid_argument);
}

TEST_CASE("train is deterministic and selects the best epoch") {
  const Corpus train_c = generate_synthetic_corpus(100, 60);
  const Corpus dev_c = generate_synthetic_corpus(101, 20);
  auto table = table_for(train_c, 4, 3);
  for (const auto& s : dev_c.sentences)  // cover dev words too
    for (const auto& tok : s.tokens)
      if (!table->entries.count(tok.surface)) table->entries.emplace(tok.surface, Vec(4, 0.1));

  NetworkConfig net = tiny_config();
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.patience = 5;
  cfg.seed = 7;

  std::ostringstream log1, log2;
  auto [m1, h1] = train(train_c, dev_c, table, net, cfg, &log1);
  auto [m2, h2] = train(train_c, dev_c, table, net, cfg, &log2);

  CHECK(m1.params == m2.params);
  CHECK(log1.str() == log2.str());
  REQUIRE(h1.epochs.size() == h2.epochs.size());
  CHECK(h1.epochs.size() <= 3);
  CHECK(h1.best_epoch >= 1);
  CHECK(h1.max_post_clip_grad_norm <= cfg.tau + 1e-9);
  for (size_t i = 0; i < h1.epochs.size(); ++i) {
    CHECK(h1.epochs[i].mean_nll == h2.epochs[i].mean_nll);
    CHECK(h1.epochs[i].dev_strict_f1 == h2.epochs[i].dev_strict_f1);
  }

  const std::string p1 = "/tmp/evt_train_det_1.bin";
  const std::string p2 = "/tmp/evt_train_det_2.bin";
  save_model(m1, p1);
  save_model(m2, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::ostringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  CHECK(b1.str() == b2.str());
}

TEST_CASE("training stops after patience epochs without improvement") {
  // empty dev keeps dev F1 at 0 from epoch 1 on, so the plateau starts
  // immediately and training must stop at epoch 1 + patience
  const Corpus train_c = generate_synthetic_corpus(200, 20);
  const Corpus dev_c;  // empty
  NetworkConfig net = tiny_config();
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.patience = 2;
  cfg.seed = 1;
  auto [model, history] = train(train_c, dev_c, table_for(train_c, 4, 5), net, cfg);
  CHECK(history.epochs.size() == 3);
  CHECK(history.best_epoch == 1);
}

TEST_CASE("train rejects an empty corpus") {
  const Corpus empty;
  const Corpus dev = generate_synthetic_corpus(1, 1);
  CHECK_THROWS_AS(train(empty, dev, table_for(dev, 4, 1), tiny_config(), TrainConfig{}),
                  std::invalid_argument);
}

TEST_CASE("config files parse with defaults, comments and errors") {
  std::istringstream full(
      "# training\n"
      "batch_size = 4\n"
      "tau = 2.5\n"
      "learning_rate = 0.01\n"
      "beta1 = 0.8\n"
      "beta2 = 0.99\n"
      "epsilon = 1e-7\n"
      "max_epochs = 9\n"
      "patience = 3\n"
      "seed = 11\n"
      "lstm_units = 16  # small\n"
      "lstm_layers = 2\n"
      "dropout_input = 0.25\n"
      "dropout_recurrent = 0.1\n"
      "char_emb_dim = 8\n"
      "char_filters = 8\n"
      "char_filter_width = 3\n"
      "n_labels = 15\n"
      "word_dim = 50\n");
  const RunConfig cfg = parse_config_file(full);
  CHECK(cfg.train.batch_size == 4);
  CHECK(cfg.train.tau == 2.5);
  CHECK(cfg.train.seed == 11);
  CHECK(cfg.net.lstm_units == 16);
  CHECK(cfg.net.dropout_input == 0.25);
  CHECK(cfg.net.word_dim == 50);

  std::istringstream defaults("");
  const RunConfig d = parse_config_file(defaults);
  CHECK(d.train.batch_size == 8);
  CHECK(d.train.tau == 1.0);
  CHECK(d.train.learning_rate == 0.002);
  CHECK(d.net.lstm_units == 100);

  std::istringstream unknown("nonsense = 1\n");
  CHECK_THROWS_WITH_AS(parse_config_file(unknown), doctest::Contains("unknown key"),
                       ParseError);

  std::istringstream bad("batch_size = soon\n");
  CHECK_THROWS_WITH_AS(parse_config_file(bad), doctest::Contains("line 1"), ParseError);

  std::istringstream invalid("batch_size = 0\n");
  CHECK_THROWS_AS(parse_config_file(invalid), FormatError);
}
