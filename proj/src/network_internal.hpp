// Raw-pointer parameter views and shared forward cores used by the
// network forward pass and by backpropagation.
#ifndef EVT_NETWORK_INTERNAL_HPP
#define EVT_NETWORK_INTERNAL_HPP

#include "evt/network.hpp"

namespace evt::detail {

struct RawCnn {
  const double* emb;   // vocab x emb_dim
  const double* filt;  // n_filters x width x emb_dim
  const double* bias;  // n_filters
  int n_filters, width, emb_dim, vocab;
};

struct RawLstm {
  const double* W;  // 4H x in_dim
  const double* U;  // 4H x H
  const double* b;  // 4H
  int in_dim, H;
};

struct RawCrf {
  const double* trans;  // L x L
  const double* start;  // L
  const double* end;    // L
  int L;
};

RawCnn cnn_raw(const TaggerModel& m);
RawLstm lstm_raw(const TaggerModel& m, int layer, Direction dir);
RawCrf crf_raw(const TaggerModel& m);

/// PAD-padded char indices for a token surface ((width-1)/2 each side).
std::vector<int> padded_char_indices(const CharVocab& vocab, const std::string& surface,
                                     int width);

/// Convolution + tanh + max pool over one padded word. Ties in the pool go
/// to the first maximal position.
Vec cnn_core(const RawCnn& p, const std::vector<int>& padded, CharCnnTrace* trace);

/// LSTM over a sequence given in processing order. rec_mask may be null
/// (all ones). Fills trace when non-null.
void lstm_core(const RawLstm& p, const std::vector<Vec>& xs_masked, const double* rec_mask,
               std::vector<Vec>& h_out, LstmDirTrace* trace);

/// Forward algorithm; fills alphas (T x L) when non-null; returns logZ.
double crf_forward_alphas(const Matrix& e, const RawCrf& crf, Matrix* alphas);

double crf_gold_score(const Matrix& e, const RawCrf& crf, const TagSequence& gold);

/// Word embedding (frozen) concatenated with the char CNN feature.
Vec word_representation(const TaggerModel& m, const std::string& surface,
                        CharCnnTrace* trace);

}  // namespace evt::detail

#endif  // EVT_NETWORK_INTERNAL_HPP
