#ifndef EVT_EMBEDDINGS_HPP
#define EVT_EMBEDDINGS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "evt/corpus.hpp"
#include "evt/tensor.hpp"

namespace evt {

/// Vocabulary -> dense vector map. Immutable after load; lookup is total
/// via the fallback chain exact -> lowercased -> digit-normalized
/// lowercased -> unk_vector.
struct EmbeddingTable {
  size_t dim = 0;
  std::unordered_map<std::string, Vec> entries;
  Vec unk_vector;
  long duplicate_words = 0;  // later occurrences dropped at load time
};

/// Character inventory of a corpus. Index 0 is PAD, index 1 is UNK; real
/// characters start at index 2 in code-point order.
struct CharVocab {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  std::vector<char32_t> chars;  // characters at indices >= 2

  int size() const { return static_cast<int>(chars.size()) + 2; }
  int index_of(char32_t c) const;  // kUnk for unseen characters
};

struct OovReport {
  double token_oov_rate = 0.0;  // percent, 0..100
  double type_oov_rate = 0.0;   // percent, 0..100
  long n_tokens = 0;
  long n_types = 0;
  long oov_tokens = 0;
  long oov_types = 0;
};

/// Text vector format: each data line `word v1 v2 ... vd` separated by
/// single spaces; optional `vocab_size dim` header line. Duplicate words
/// keep their first occurrence. The unk vector is sampled once from
/// uniform [-0.25, 0.25]^dim with a fixed seed so runs are reproducible.
EmbeddingTable load_text_vectors(std::istream& in, bool has_header);

/// Like load_text_vectors but detects the header line (exactly two integer
/// fields) automatically. Used by the CLI.
EmbeddingTable load_text_vectors_path(const std::string& path);

/// Fallback-chain lookup; always returns a vector of table.dim entries.
const Vec& lookup(const EmbeddingTable& table, const std::string& token);

/// True when the fallback chain fails before the unk step.
bool is_oov(const EmbeddingTable& table, const std::string& token);

/// Token rate over all tokens; type rate over distinct lowercased surface
/// forms (a type counts as OOV when every observed surface form of it is).
OovReport oov_rate(const Corpus& corpus, const EmbeddingTable& table);

CharVocab build_char_vocab(const Corpus& corpus);

/// Writes a vector file covering `words` with seeded uniform [-0.5, 0.5]
/// entries; desk-scale stand-in for published embedding sets.
void write_random_vectors(const std::vector<std::string>& words, size_t dim, uint64_t seed,
                          std::ostream& out);

}  // namespace evt

#endif  // EVT_EMBEDDINGS_HPP
