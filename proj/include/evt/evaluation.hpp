#ifndef EVT_EVALUATION_HPP
#define EVT_EVALUATION_HPP

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evt/corpus.hpp"

namespace evt {

/// Raised when gold and system corpora do not line up sentence by sentence.
class AlignmentError : public std::runtime_error {
 public:
  explicit AlignmentError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class MatchMode { kStrict, kRelaxed };

struct ModeScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double f1_class = 0.0;
};

struct ScoreCounts {
  long gold = 0;
  long system = 0;
  long strict_tp = 0;
  long relaxed_tp = 0;
  long strict_tp_class = 0;
  long relaxed_tp_class = 0;
};

struct ScoreReport {
  ModeScores strict;
  ModeScores relaxed;
  ScoreCounts counts;
};

struct PosBucket {
  long gold = 0;
  long matched = 0;
  double recall_pct = 0.0;
};

/// Per-POS strict-match recall over gold events. An event's POS is the
/// gold annotation of its first token ("_" when missing).
struct PosBreakdown {
  std::map<std::string, PosBucket> per_pos;
};

/// Rows are gold classes, columns system classes, over extent-matched
/// pairs; the diagonal holds correct classifications.
struct ConfusionMatrix {
  std::array<std::array<long, kNumEventClasses>, kNumEventClasses> counts{};

  long total() const;
  long off_diagonal() const;
};

struct McNemarResult {
  long b = 0;  // A correct, B wrong
  long c = 0;  // A wrong, B correct
  double chi2 = 0.0;
  bool significant_at_005 = false;
};

/// Extent matching within one sentence. Strict pairs spans with identical
/// boundaries; relaxed pairs each gold span left-to-right with the first
/// unmatched overlapping system span (one-to-one).
std::vector<std::pair<int, int>> match_spans(const std::vector<EventSpan>& gold,
                                             const std::vector<EventSpan>& system,
                                             MatchMode mode);

/// Full corpus scoring; 0/0 rates are 0. Throws AlignmentError when the
/// corpora differ in sentence count or token surfaces.
ScoreReport score(const Corpus& gold, const Corpus& system);

PosBreakdown pos_breakdown(const Corpus& gold, const Corpus& system);

ConfusionMatrix class_confusion(const Corpus& gold, const Corpus& system, MatchMode mode);

/// McNemar's test with continuity correction over per-gold-event extent
/// correctness: chi2 = (|b-c|-1)^2 / (b+c), 0 when b+c = 0; the 0.05
/// threshold for one degree of freedom is 3.841.
McNemarResult mcnemar(const Corpus& system_a, const Corpus& system_b, const Corpus& gold,
                      MatchMode mode);

/// Human-readable table with R/P/F1/F1-class columns per mode.
std::string format_report_table(const ScoreReport& r);

/// Machine-readable `key value` lines, one metric per line.
std::string format_report_kv(const ScoreReport& r);

ScoreReport parse_report_kv(std::istream& in);

}  // namespace evt

#endif  // EVT_EVALUATION_HPP
