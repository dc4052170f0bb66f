#include "evt/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "evt/text.hpp"

namespace evt {

namespace {

constexpr uint64_t kUnkVectorSeed = 0x9E3779B97F4A7C15ull;

bool parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_long(std::string_view s, long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

Vec make_unk_vector(size_t dim) {
  Rng rng(kUnkVectorSeed);
  Vec v(dim);
  for (auto& x : v) x = rng.uniform(-0.25, 0.25);
  return v;
}

}  // namespace

int CharVocab::index_of(char32_t c) const {
  auto it = std::lower_bound(chars.begin(), chars.end(), c);
  if (it != chars.end() && *it == c) return static_cast<int>(it - chars.begin()) + 2;
  return kUnk;
}

EmbeddingTable load_text_vectors(std::istream& in, bool has_header) {
  EmbeddingTable table;
  std::string line;
  long line_no = 0;
  long header_dim = -1;
  if (has_header) {
    if (!std::getline(in, line)) throw ParseError("empty vector file");
    ++line_no;
    auto fields = split(rstrip(line), ' ');
    long vocab_size = 0;
    if (fields.size() != 2 || !parse_long(fields[0], vocab_size) ||
        !parse_long(fields[1], header_dim) || header_dim <= 0) {
      throw ParseError("line 1: malformed header, expected 'vocab_size dim'");
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = rstrip(line);
    if (sv.empty()) continue;
    auto fields = split(sv, ' ');
    if (fields.size() < 2) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 'word v1 ... vd'";
      throw ParseError(os.str());
    }
    if (table.dim == 0) {
      table.dim = fields.size() - 1;
      if (header_dim > 0 && static_cast<long>(table.dim) != header_dim) {
        std::ostringstream os;
        os << "line " << line_no << ": " << table.dim << " values but header declares dim "
           << header_dim;
        throw ParseError(os.str());
      }
    } else if (fields.size() - 1 != table.dim) {
      std::ostringstream os;
      os << "line " << line_no << ": " << fields.size() - 1 << " values, expected "
         << table.dim;
      throw ParseError(os.str());
    }
    Vec v(table.dim);
    for (size_t i = 0; i < table.dim; ++i) {
      if (!parse_double(fields[i + 1], v[i])) {
        std::ostringstream os;
        os << "line " << line_no << ": bad float '" << fields[i + 1] << "'";
        throw ParseError(os.str());
      }
    }
    auto [it, inserted] = table.entries.emplace(std::move(fields[0]), std::move(v));
    if (!inserted) ++table.duplicate_words;
  }
  if (table.dim == 0) throw ParseError("vector file contains no data lines");
  table.unk_vector = make_unk_vector(table.dim);
  return table;
}

EmbeddingTable load_text_vectors_path(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw ParseError("cannot open '" + path + "'");
  std::string first;
  bool has_header = false;
  if (std::getline(probe, first)) {
    auto fields = split(rstrip(first), ' ');
    long a = 0, b = 0;
    has_header = fields.size() == 2 && parse_long(fields[0], a) && parse_long(fields[1], b);
  }
  std::ifstream in(path);
  try {
    return load_text_vectors(in, has_header);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

const Vec& lookup(const EmbeddingTable& table, const std::string& token) {
  auto it = table.entries.find(token);
  if (it != table.entries.end()) return it->second;
  const std::string lower = lowercase(token);
  it = table.entries.find(lower);
  if (it != table.entries.end()) return it->second;
  it = table.entries.find(normalize_digits(lower));
  if (it != table.entries.end()) return it->second;
  return table.unk_vector;
}

bool is_oov(const EmbeddingTable& table, const std::string& token) {
  if (table.entries.count(token)) return false;
  const std::string lower = lowercase(token);
  if (table.entries.count(lower)) return false;
  return table.entries.count(normalize_digits(lower)) == 0;
}

OovReport oov_rate(const Corpus& corpus, const EmbeddingTable& table) {
  OovReport r;
  std::unordered_map<std::string, bool> type_covered;  // lowercased type -> any hit
  for (const auto& sent : corpus.sentences) {
    for (const auto& tok : sent.tokens) {
      ++r.n_tokens;
      const bool oov = is_oov(table, tok.surface);
      if (oov) ++r.oov_tokens;
      auto [it, inserted] = type_covered.emplace(lowercase(tok.surface), !oov);
      if (!inserted && !oov) it->second = true;
    }
  }
  r.n_types = static_cast<long>(type_covered.size());
  for (const auto& [_, covered] : type_covered)
    if (!covered) ++r.oov_types;
  if (r.n_tokens > 0) r.token_oov_rate = 100.0 * r.oov_tokens / r.n_tokens;
  if (r.n_types > 0) r.type_oov_rate = 100.0 * r.oov_types / r.n_types;
  return r;
}

CharVocab build_char_vocab(const Corpus& corpus) {
  std::set<char32_t> seen;
  for (const auto& sent : corpus.sentences)
    for (const auto& tok : sent.tokens)
      for (char32_t c : utf8_decode(tok.surface)) seen.insert(c);
  CharVocab v;
  v.chars.assign(seen.begin(), seen.end());
  return v;
}

void write_random_vectors(const std::vector<std::string>& words, size_t dim, uint64_t seed,
                          std::ostream& out) {
  Rng rng(seed);
  char buf[32];
  for (const auto& w : words) {
    out << w;
    for (size_t i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof buf, " %.6f", rng.uniform(-0.5, 0.5));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace evt
