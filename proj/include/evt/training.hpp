#ifndef EVT_TRAINING_HPP
#define EVT_TRAINING_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "evt/corpus.hpp"
#include "evt/embeddings.hpp"
#include "evt/network.hpp"

namespace evt {

struct TrainConfig {
  int batch_size = 8;
  double tau = 1.0;  // max global gradient norm
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 30;
  int patience = 5;  // epochs without dev-F1 improvement
  uint64_t seed = 42;

  void validate() const;  // throws FormatError
};

struct OptimizerState {
  Vec m;  // first moment
  Vec v;  // second moment
  long step = 0;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double mean_nll = 0.0;
  double dev_strict_f1 = 0.0;
  double dev_f1_class = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based, 0 when no epoch completed
  double max_post_clip_grad_norm = 0.0;
};

/// d crf_nll / d emissions for one sentence: the per-position label
/// marginal minus the gold one-hot, computed by forward-backward.
Matrix crf_emission_gradient(const Matrix& emissions, const CrfParams& crf,
                             const TagSequence& gold);

/// Analytic gradients of the mean sentence NLL over the batch with respect
/// to every trainable parameter (word embeddings are frozen). `masks`
/// holds one DropoutMasks per batch sentence; `grads` is resized to the
/// parameter arena and overwritten. Returns the mean NLL.
double backward(const TaggerModel& model, const std::vector<const Sentence*>& batch,
                const std::vector<DropoutMasks>& masks, Vec& grads);

/// Same with all-ones masks (no dropout).
double backward(const TaggerModel& model, const std::vector<const Sentence*>& batch,
                Vec& grads);

double global_norm(const Vec& grads);

/// Scales all gradients by tau/g when the global norm g exceeds tau;
/// returns the pre-clip norm.
double clip_global_norm(Vec& grads, double tau);

/// Nadam step (Nesterov-accelerated Adam with a constant momentum
/// schedule). With t the incremented step counter:
///
///   m <- b1 m + (1-b1) g            v <- b2 v + (1-b2) g^2
///   m_hat = m / (1 - b1^t)          v_hat = v / (1 - b2^t)
///   m_bar = b1 m_hat + (1-b1) g / (1 - b1^t)
///   theta <- theta - lr * m_bar / (sqrt(v_hat) + eps)
void nadam_step(Vec& params, const Vec& grads, OptimizerState& state,
                const TrainConfig& cfg);

/// Full training loop: seeded shuffling into batches of batch_size,
/// backward -> clip -> nadam per batch, dev strict-F1 model selection with
/// early stopping. Writes one `epoch,mean_nll,dev_strict_f1,dev_f1_class`
/// line per epoch to `log` when given. Deterministic for a fixed seed.
std::pair<TaggerModel, TrainHistory> train(const Corpus& train_corpus,
                                           const Corpus& dev_corpus,
                                           std::shared_ptr<const EmbeddingTable> embeddings,
                                           const NetworkConfig& net_cfg,
                                           const TrainConfig& cfg,
                                           std::ostream* log = nullptr,
                                           const std::string& vectors_path = "");

/// Builds a seeded tiny model and 2-sentence batch, then compares
/// backward() against central finite differences (step h) parameter by
/// parameter. Returns the maximum relative error, where each parameter's
/// error is |analytic - fd| / max(|analytic|, |fd|, 1e-5).
double grad_check(const NetworkConfig& tiny_cfg, uint64_t seed, double h = 1e-5);

/// Flat `key = value` configuration covering every TrainConfig and
/// NetworkConfig field; `#` starts a comment; unknown keys are errors.
struct RunConfig {
  NetworkConfig net;
  TrainConfig train;
};

RunConfig parse_config_file(std::istream& in);
RunConfig parse_config_path(const std::string& path);

}  // namespace evt

#endif  // EVT_TRAINING_HPP
