#ifndef EVT_NETWORK_HPP
#define EVT_NETWORK_HPP

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "evt/corpus.hpp"
#include "evt/embeddings.hpp"
#include "evt/tensor.hpp"

namespace evt {

/// Raised on malformed model container files.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NetworkConfig {
  int lstm_units = 100;
  int lstm_layers = 2;  // the stack is fixed at two layers
  double dropout_input = 0.5;
  double dropout_recurrent = 0.5;
  int char_emb_dim = 30;
  int char_filters = 30;
  int char_filter_width = 3;  // odd
  int n_labels = kNumLabels;
  int word_dim = 0;  // taken from the embedding table

  int word_repr_dim() const { return word_dim + char_filters; }
  void validate() const;  // throws FormatError
};

// ---------------------------------------------------------------------------
// Owned parameter blocks. Tests and the standalone ops use these directly;
// TaggerModel keeps all trainable parameters in one flat arena and
// materializes copies on demand.
// ---------------------------------------------------------------------------

struct CharCnnParams {
  Matrix char_embeddings;       // vocab_size x emb_dim
  std::vector<double> filters;  // n_filters x width x emb_dim, row-major
  Vec filter_bias;              // n_filters
  int n_filters = 0;
  int width = 0;
  int emb_dim = 0;

  double filter_at(int f, int w, int k) const {
    return filters[(static_cast<size_t>(f) * width + w) * emb_dim + k];
  }
};

struct LstmDirParams {
  Matrix W;  // 4H x in_dim, gate order [input, forget, cell, output]
  Matrix U;  // 4H x H
  Vec b;     // 4H
};

enum class Direction { kForward, kBackward };

struct CrfParams {
  Matrix transitions;  // transitions(i, j) scores label j following label i
  Vec start_scores;
  Vec end_scores;
};

// ---------------------------------------------------------------------------
// Flat parameter arena.
// ---------------------------------------------------------------------------

struct TensorSpec {
  std::string name;
  std::vector<size_t> shape;
  size_t offset = 0;
  size_t size = 0;
};

struct ModelLayout {
  std::vector<TensorSpec> tensors;
  size_t total = 0;

  size_t add(std::string name, std::vector<size_t> shape);
  const TensorSpec& find(std::string_view name) const;
  double* view(Vec& buf, std::string_view name) const;
  const double* view(const Vec& buf, std::string_view name) const;
};

/// Tensor inventory for a configuration; n_chars is CharVocab::size().
ModelLayout build_layout(const NetworkConfig& cfg, int n_chars);

/// Variational dropout masks: one input mask and one recurrent mask per
/// layer per direction, shared across timesteps, inverted-scaled at
/// sampling time. All-ones masks give eval-mode behavior.
struct DropoutMasks {
  std::array<std::array<Vec, 2>, 2> input;      // [layer][direction]
  std::array<std::array<Vec, 2>, 2> recurrent;  // [layer][direction]
};

DropoutMasks ones_masks(const NetworkConfig& cfg);
DropoutMasks sample_masks(const NetworkConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Model.
// ---------------------------------------------------------------------------

struct TaggerModel {
  NetworkConfig config;
  CharVocab char_vocab;
  std::vector<std::string> labels;
  std::string vectors_path;  // embedding table reference, stored in the container
  std::shared_ptr<const EmbeddingTable> embeddings;
  ModelLayout layout;
  Vec params;

  CharCnnParams char_cnn() const;
  LstmDirParams lstm(int layer, Direction dir) const;
  CrfParams crf() const;

  const double* tensor(std::string_view name) const { return layout.view(params, name); }
  double* tensor(std::string_view name) { return layout.view(params, name); }
};

TaggerModel make_model(const NetworkConfig& cfg, CharVocab char_vocab,
                       std::shared_ptr<const EmbeddingTable> embeddings,
                       std::string vectors_path);

/// Glorot-uniform weights, zero biases except the LSTM forget-gate block
/// (1.0), zero CRF scores. Deterministic per seed.
void init_params(TaggerModel& model, uint64_t seed);

// ---------------------------------------------------------------------------
// Forward computation.
// ---------------------------------------------------------------------------

/// Character-window convolution with tanh and max-over-positions pooling.
/// The word is padded on both sides with the PAD embedding so every window
/// is valid; output has n_filters entries. Throws on an empty word.
Vec char_cnn_forward(const std::vector<int>& char_indices, const CharCnnParams& p);

/// Standard LSTM recurrence with zero initial state. The backward
/// direction processes the reversed sequence and re-reverses its outputs.
std::vector<Vec> lstm_direction_forward(const std::vector<Vec>& inputs,
                                        const LstmDirParams& p, Direction dir);

/// Two stacked bidirectional layers over word-representation vectors;
/// outputs have 2H entries. Masks are ignored in eval mode.
std::vector<Vec> bilstm_stack_forward(const std::vector<Vec>& inputs,
                                      const TaggerModel& model, bool train_mode,
                                      const DropoutMasks& masks);

/// Per-token unnormalized label scores, T x n_labels.
Matrix emissions(const Sentence& s, const TaggerModel& model, bool train_mode,
                 const DropoutMasks& masks);

// ---------------------------------------------------------------------------
// Linear-chain CRF over emission scores.
//
// score(y) = start[y_1] + sum_t e[t][y_t] + sum_t trans[y_t][y_{t+1}] + end[y_T]
// ---------------------------------------------------------------------------

/// log sum over all label sequences of exp(score(y)), by the forward
/// algorithm in log space.
double crf_log_partition(const Matrix& emissions, const CrfParams& crf);

/// crf_log_partition - score(gold); always >= 0. Throws on a tag outside
/// the alphabet.
double crf_nll(const Matrix& emissions, const CrfParams& crf, const TagSequence& gold);

/// Highest-scoring label sequence; ties resolved toward the lowest label
/// index at each backtracking decision.
TagSequence viterbi_decode(const Matrix& emissions, const CrfParams& crf);

/// decode_bio(viterbi_decode(emissions(s, eval mode))).
std::vector<EventSpan> predict(const Sentence& s, const TaggerModel& model);

// ---------------------------------------------------------------------------
// Forward traces (everything backpropagation needs to replay a sentence).
// ---------------------------------------------------------------------------

struct CharCnnTrace {
  std::vector<int> padded_indices;
  std::vector<int> argmax_pos;  // per filter, first maximal position
  Vec pooled;                   // per filter, tanh at the argmax
};

struct LstmDirTrace {
  // Everything in processing order (reversed sequence for the backward
  // direction).
  std::vector<Vec> x_masked;
  std::vector<Vec> h_prev_masked;
  std::vector<Vec> gate_i, gate_f, gate_g, gate_o;
  std::vector<Vec> cell, tanh_cell;
  std::vector<Vec> h;
};

struct SentenceTrace {
  std::vector<Vec> word_repr;             // T x (word_dim + char_filters)
  std::vector<CharCnnTrace> char_cnn;     // per token
  std::array<std::array<LstmDirTrace, 2>, 2> lstm;  // [layer][direction]
  std::vector<Vec> layer_out[2];          // concatenated 2H outputs per layer
  Matrix emission_scores;                 // T x n_labels
};

/// Forward pass that also fills `trace` when non-null; identical results
/// to emissions().
Matrix emissions_traced(const Sentence& s, const TaggerModel& model,
                        const DropoutMasks& masks, SentenceTrace* trace);

// ---------------------------------------------------------------------------
// Serialization: versioned binary container holding config key-values, the
// label alphabet, the char vocab and every parameter tensor (name, shape,
// row-major little-endian 64-bit floats). Load/save round-trips bit-exactly.
// ---------------------------------------------------------------------------

void save_model(const TaggerModel& model, const std::string& path);

/// Loads a container; the embedding table is not attached (callers load it
/// from model.vectors_path and assign model.embeddings).
TaggerModel load_model(const std::string& path);

}  // namespace evt

#endif  // EVT_NETWORK_HPP
