#include "evt/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "evt/text.hpp"

namespace evt {

namespace {

void check_aligned(const Corpus& gold, const Corpus& system) {
  if (gold.sentences.size() != system.sentences.size()) {
    std::ostringstream os;
    os << "corpora differ in sentence count: " << gold.sentences.size() << " vs "
       << system.sentences.size();
    throw AlignmentError(os.str());
  }
  for (size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& g = gold.sentences[i].tokens;
    const auto& s = system.sentences[i].tokens;
    bool same = g.size() == s.size();
    for (size_t t = 0; same && t < g.size(); ++t) same = g[t].surface == s[t].surface;
    if (!same) {
      std::ostringstream os;
      os << "sentence " << i + 1 << ": token sequences differ";
      throw AlignmentError(os.str());
    }
  }
}

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

double ratio(long num, long den) { return den > 0 ? static_cast<double>(num) / den : 0.0; }

/// Marks, per gold event of each sentence, whether the system extent-matches it.
std::vector<std::vector<bool>> gold_correctness(const Corpus& gold, const Corpus& system,
                                                MatchMode mode) {
  std::vector<std::vector<bool>> out(gold.sentences.size());
  for (size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& g = gold.sentences[i].events;
    out[i].assign(g.size(), false);
    for (auto [gi, si] : match_spans(g, system.sentences[i].events, mode))
      out[i][gi] = true;
  }
  return out;
}

}  // namespace

long ConfusionMatrix::total() const {
  long t = 0;
  for (const auto& row : counts)
    for (long v : row) t += v;
  return t;
}

long ConfusionMatrix::off_diagonal() const {
  long t = 0;
  for (int i = 0; i < kNumEventClasses; ++i)
    for (int j = 0; j < kNumEventClasses; ++j)
      if (i != j) t += counts[i][j];
  return t;
}

std::vector<std::pair<int, int>> match_spans(const std::vector<EventSpan>& gold,
                                             const std::vector<EventSpan>& system,
                                             MatchMode mode) {
  std::vector<std::pair<int, int>> pairs;
  if (mode == MatchMode::kStrict) {
    for (int gi = 0; gi < static_cast<int>(gold.size()); ++gi) {
      for (int si = 0; si < static_cast<int>(system.size()); ++si) {
        if (gold[gi].start == system[si].start && gold[gi].end == system[si].end) {
          pairs.emplace_back(gi, si);
          break;  // extents are unique within a non-overlapping span set
        }
      }
    }
    return pairs;
  }
  std::vector<bool> used(system.size(), false);
  for (int gi = 0; gi < static_cast<int>(gold.size()); ++gi) {
    for (int si = 0; si < static_cast<int>(system.size()); ++si) {
      if (used[si] || !gold[gi].overlaps(system[si])) continue;
      used[si] = true;
      pairs.emplace_back(gi, si);
      break;
    }
  }
  return pairs;
}

ScoreReport score(const Corpus& gold, const Corpus& system) {
  check_aligned(gold, system);
  ScoreReport r;
  for (size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& g = gold.sentences[i].events;
    const auto& s = system.sentences[i].events;
    r.counts.gold += static_cast<long>(g.size());
    r.counts.system += static_cast<long>(s.size());
    for (auto [gi, si] : match_spans(g, s, MatchMode::kStrict)) {
      ++r.counts.strict_tp;
      if (g[gi].cls == s[si].cls) ++r.counts.strict_tp_class;
    }
    for (auto [gi, si] : match_spans(g, s, MatchMode::kRelaxed)) {
      ++r.counts.relaxed_tp;
      if (g[gi].cls == s[si].cls) ++r.counts.relaxed_tp_class;
    }
  }
  const auto fill = [&](ModeScores& m, long tp, long tp_class) {
    m.precision = ratio(tp, r.counts.system);
    m.recall = ratio(tp, r.counts.gold);
    m.f1 = f1_of(m.precision, m.recall);
    m.f1_class = f1_of(ratio(tp_class, r.counts.system), ratio(tp_class, r.counts.gold));
  };
  fill(r.strict, r.counts.strict_tp, r.counts.strict_tp_class);
  fill(r.relaxed, r.counts.relaxed_tp, r.counts.relaxed_tp_class);
  return r;
}

PosBreakdown pos_breakdown(const Corpus& gold, const Corpus& system) {
  check_aligned(gold, system);
  PosBreakdown b;
  const auto correct = gold_correctness(gold, system, MatchMode::kStrict);
  for (size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& sent = gold.sentences[i];
    for (size_t ei = 0; ei < sent.events.size(); ++ei) {
      const std::string& pos = sent.tokens[sent.events[ei].start].pos;
      auto& bucket = b.per_pos[pos.empty() ? "_" : pos];
      ++bucket.gold;
      if (correct[i][ei]) ++bucket.matched;
    }
  }
  for (auto& [_, bucket] : b.per_pos)
    bucket.recall_pct = bucket.gold > 0 ? 100.0 * bucket.matched / bucket.gold : 0.0;
  return b;
}

ConfusionMatrix class_confusion(const Corpus& gold, const Corpus& system, MatchMode mode) {
  check_aligned(gold, system);
  ConfusionMatrix m;
  for (size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& g = gold.sentences[i].events;
    const auto& s = system.sentences[i].events;
    for (auto [gi, si] : match_spans(g, s, mode))
      ++m.counts[static_cast<int>(g[gi].cls)][static_cast<int>(s[si].cls)];
  }
  return m;
}

McNemarResult mcnemar(const Corpus& system_a, const Corpus& system_b, const Corpus& gold,
                      MatchMode mode) {
  const auto a = gold_correctness(gold, system_a, mode);
  const auto b = gold_correctness(gold, system_b, mode);
  McNemarResult r;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t e = 0; e < a[i].size(); ++e) {
      if (a[i][e] && !b[i][e]) ++r.b;
      if (!a[i][e] && b[i][e]) ++r.c;
    }
  }
  const long n = r.b + r.c;
  if (n > 0) {
    const double d = std::llabs(r.b - r.c) - 1.0;
    r.chi2 = d * d / static_cast<double>(n);
  }
  r.significant_at_005 = r.chi2 > 3.841;
  return r;
}

std::string format_report_table(const ScoreReport& r) {
  char buf[256];
  std::string out;
  out += "Mode      R        P        F1       F1-class\n";
  std::snprintf(buf, sizeof buf, "strict    %.4f   %.4f   %.4f   %.4f\n", r.strict.recall,
                r.strict.precision, r.strict.f1, r.strict.f1_class);
  out += buf;
  std::snprintf(buf, sizeof buf, "relaxed   %.4f   %.4f   %.4f   %.4f\n", r.relaxed.recall,
                r.relaxed.precision, r.relaxed.f1, r.relaxed.f1_class);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "counts    gold=%ld system=%ld strict_tp=%ld relaxed_tp=%ld "
                "strict_tp_class=%ld relaxed_tp_class=%ld\n",
                r.counts.gold, r.counts.system, r.counts.strict_tp, r.counts.relaxed_tp,
                r.counts.strict_tp_class, r.counts.relaxed_tp_class);
  out += buf;
  return out;
}

std::string format_report_kv(const ScoreReport& r) {
  char buf[128];
  std::string out;
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s %.6f\n", key, v);
    out += buf;
  };
  auto put_count = [&](const char* key, long v) {
    std::snprintf(buf, sizeof buf, "%s %ld\n", key, v);
    out += buf;
  };
  put("strict_recall", r.strict.recall);
  put("strict_precision", r.strict.precision);
  put("strict_f1", r.strict.f1);
  put("strict_f1_class", r.strict.f1_class);
  put("relaxed_recall", r.relaxed.recall);
  put("relaxed_precision", r.relaxed.precision);
  put("relaxed_f1", r.relaxed.f1);
  put("relaxed_f1_class", r.relaxed.f1_class);
  put_count("gold_events", r.counts.gold);
  put_count("system_events", r.counts.system);
  put_count("strict_tp", r.counts.strict_tp);
  put_count("relaxed_tp", r.counts.relaxed_tp);
  put_count("strict_tp_class", r.counts.strict_tp_class);
  put_count("relaxed_tp_class", r.counts.relaxed_tp_class);
  return out;
}

ScoreReport parse_report_kv(std::istream& in) {
  ScoreReport r;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = rstrip(line);
    if (sv.empty()) continue;
    auto fields = split(sv, ' ');
    if (fields.size() != 2) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 'key value'";
      throw ParseError(os.str());
    }
    double v = 0.0;
    try {
      v = std::stod(fields[1]);
    } catch (const std::exception&) {
      std::ostringstream os;
      os << "line " << line_no << ": bad value '" << fields[1] << "'";
      throw ParseError(os.str());
    }
    const std::string& k = fields[0];
    if (k == "strict_recall") r.strict.recall = v;
    else if (k == "strict_precision") r.strict.precision = v;
    else if (k == "strict_f1") r.strict.f1 = v;
    else if (k == "strict_f1_class") r.strict.f1_class = v;
    else if (k == "relaxed_recall") r.relaxed.recall = v;
    else if (k == "relaxed_precision") r.relaxed.precision = v;
    else if (k == "relaxed_f1") r.relaxed.f1 = v;
    else if (k == "relaxed_f1_class") r.relaxed.f1_class = v;
    else if (k == "gold_events") r.counts.gold = static_cast<long>(v);
    else if (k == "system_events") r.counts.system = static_cast<long>(v);
    else if (k == "strict_tp") r.counts.strict_tp = static_cast<long>(v);
    else if (k == "relaxed_tp") r.counts.relaxed_tp = static_cast<long>(v);
    else if (k == "strict_tp_class") r.counts.strict_tp_class = static_cast<long>(v);
    else if (k == "relaxed_tp_class") r.counts.relaxed_tp_class = static_cast<long>(v);
    else {
      std::ostringstream os;
      os << "line " << line_no << ": unknown key '" << k << "'";
      throw ParseError(os.str());
    }
  }
  return r;
}

}  // namespace evt
