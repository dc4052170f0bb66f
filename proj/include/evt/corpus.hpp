#ifndef EVT_CORPUS_HPP
#define EVT_CORPUS_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evt {

/// Raised on malformed column files, vector files, or config files.
/// Messages carry a 1-based line number where one applies.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised on annotation-level violations (overlapping spans, bad indices).
class InvalidAnnotation : public std::runtime_error {
 public:
  explicit InvalidAnnotation(const std::string& msg) : std::runtime_error(msg) {}
};

// The seven event classes, in canonical order. Label indices and all
// per-class reports follow this order.
enum class EventClass : int {
  kOccurrence = 0,
  kAspectual,
  kIState,
  kIAction,
  kPerception,
  kReporting,
  kState,
};

inline constexpr int kNumEventClasses = 7;
inline constexpr int kNumLabels = 1 + 2 * kNumEventClasses;

const std::string& class_name(EventClass c);
std::optional<EventClass> class_from_name(const std::string& name);

struct Token {
  std::string surface;
  std::string pos;  // empty when unknown; "_" in column files
};

struct EventSpan {
  int start = 0;  // token index, inclusive
  int end = 0;    // token index, inclusive
  EventClass cls = EventClass::kOccurrence;

  bool operator==(const EventSpan&) const = default;
  bool overlaps(const EventSpan& o) const { return start <= o.end && o.start <= end; }
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<EventSpan> events;  // sorted by start, pairwise non-overlapping
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::string split_name;
};

/// One label per token, indices into label_alphabet().
using TagSequence = std::vector<int>;

/// The 15 labels: "O" first, then B-/I- pairs per class in canonical order.
const std::vector<std::string>& label_alphabet();
int label_index(const std::string& label);  // -1 when unknown

/// Checks the Sentence invariants; throws InvalidAnnotation on violation.
void validate_sentence(const Sentence& s);

/// BIO encoding: B-class at span start, I-class inside, "O" elsewhere.
TagSequence encode_bio(const Sentence& s);

/// Inverse of encode_bio, total via repair rule R1: an I-x without a
/// preceding B-x/I-x run of the same class opens a new span of class x.
std::vector<EventSpan> decode_bio(const TagSequence& tags);

/// Column format: `surface<TAB>pos<TAB>label` per token, blank line between
/// sentences, labels from label_alphabet(), pos "_" when unknown.
Corpus read_column_file(std::istream& in, const std::string& split_name = "");
void write_column_file(const Corpus& c, std::ostream& out);

Corpus read_column_path(const std::string& path);
void write_column_path(const Corpus& c, const std::string& path);

struct CountsReport {
  std::array<long, kNumEventClasses> events_per_class{};
  std::map<std::string, long> event_tokens_per_pos;  // "_" for missing POS
  long multi_token_events = 0;
  long total_events = 0;
  long total_event_tokens = 0;
};

CountsReport corpus_stats(const Corpus& c);

/// Deterministic template-based corpus: trigger words imply event classes,
/// filler words are never events, class proportions follow the per-class
/// event distribution of the target data (OCCURRENCE modal).
Corpus generate_synthetic_corpus(uint64_t seed, int n_sentences);

/// Every surface form the synthetic generator can emit (for building
/// vector files that fully cover generated corpora).
const std::vector<std::string>& template_vocabulary();

}  // namespace evt

#endif  // EVT_CORPUS_HPP
