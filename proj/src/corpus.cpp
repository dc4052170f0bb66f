#include "evt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "evt/tensor.hpp"
#include "evt/text.hpp"

namespace evt {

namespace {

const std::array<std::string, kNumEventClasses> kClassNames = {
    "OCCURRENCE", "ASPECTUAL", "I_STATE", "I_ACTION",
    "PERCEPTION", "REPORTING", "STATE",
};

}  // namespace

const std::string& class_name(EventClass c) { return kClassNames[static_cast<int>(c)]; }

std::optional<EventClass> class_from_name(const std::string& name) {
  for (int i = 0; i < kNumEventClasses; ++i)
    if (kClassNames[i] == name) return static_cast<EventClass>(i);
  return std::nullopt;
}

const std::vector<std::string>& label_alphabet() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> v;
    v.push_back("O");
    for (const auto& c : kClassNames) {
      v.push_back("B-" + c);
      v.push_back("I-" + c);
    }
    return v;
  }();
  return labels;
}

int label_index(const std::string& label) {
  static const std::unordered_map<std::string, int> index = [] {
    std::unordered_map<std::string, int> m;
    const auto& labels = label_alphabet();
    for (size_t i = 0; i < labels.size(); ++i) m[labels[i]] = static_cast<int>(i);
    return m;
  }();
  auto it = index.find(label);
  return it == index.end() ? -1 : it->second;
}

void validate_sentence(const Sentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  for (const auto& t : s.tokens)
    if (t.surface.empty()) throw InvalidAnnotation("token with empty surface");
  const EventSpan* prev = nullptr;
  for (const auto& e : s.events) {
    if (e.start < 0 || e.start > e.end || e.end >= n) {
      std::ostringstream os;
      os << "span [" << e.start << "," << e.end << "] out of bounds for sentence of length "
         << n;
      throw InvalidAnnotation(os.str());
    }
    if (prev != nullptr) {
      if (prev->start > e.start) throw InvalidAnnotation("spans not sorted by start");
      if (prev->overlaps(e)) {
        std::ostringstream os;
        os << "overlapping spans [" << prev->start << "," << prev->end << "] and ["
           << e.start << "," << e.end << "]";
        throw InvalidAnnotation(os.str());
      }
    }
    prev = &e;
  }
}

TagSequence encode_bio(const Sentence& s) {
  validate_sentence(s);
  TagSequence tags(s.tokens.size(), 0);  // label 0 == "O"
  for (const auto& e : s.events) {
    const int base = 1 + 2 * static_cast<int>(e.cls);
    tags[e.start] = base;  // B-class
    for (int t = e.start + 1; t <= e.end; ++t) tags[t] = base + 1;  // I-class
  }
  return tags;
}

std::vector<EventSpan> decode_bio(const TagSequence& tags) {
  std::vector<EventSpan> spans;
  bool open = false;
  EventSpan cur;
  auto close = [&] {
    if (open) spans.push_back(cur);
    open = false;
  };
  for (int t = 0; t < static_cast<int>(tags.size()); ++t) {
    const int tag = tags[t];
    if (tag == 0) {
      close();
      continue;
    }
    const EventClass cls = static_cast<EventClass>((tag - 1) / 2);
    const bool is_begin = ((tag - 1) % 2) == 0;
    if (is_begin || !open || cur.cls != cls) {
      // B-x, or an I-x that cannot extend the current run (repair rule R1).
      close();
      open = true;
      cur = {t, t, cls};
    } else {
      cur.end = t;
    }
  }
  close();
  return spans;
}

Corpus read_column_file(std::istream& in, const std::string& split_name) {
  Corpus corpus;
  corpus.split_name = split_name;
  Sentence sent;
  TagSequence tags;
  std::string line;
  long line_no = 0;
  auto flush = [&] {
    if (sent.tokens.empty()) return;
    sent.events = decode_bio(tags);
    corpus.sentences.push_back(std::move(sent));
    sent = Sentence{};
    tags.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = rstrip(line);
    if (sv.empty()) {
      flush();
      continue;
    }
    auto fields = split(sv, '\t');
    if (fields.size() != 3) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 3 tab-separated fields, got "
         << fields.size();
      throw ParseError(os.str());
    }
    if (fields[0].empty()) {
      std::ostringstream os;
      os << "line " << line_no << ": empty token surface";
      throw ParseError(os.str());
    }
    const int tag = label_index(fields[2]);
    if (tag < 0) {
      std::ostringstream os;
      os << "line " << line_no << ": unknown label '" << fields[2] << "'";
      throw ParseError(os.str());
    }
    Token tok;
    tok.surface = fields[0];
    tok.pos = fields[1] == "_" ? std::string() : fields[1];
    sent.tokens.push_back(std::move(tok));
    tags.push_back(tag);
  }
  flush();
  return corpus;
}

void write_column_file(const Corpus& c, std::ostream& out) {
  for (const auto& sent : c.sentences) {
    const TagSequence tags = encode_bio(sent);
    const auto& labels = label_alphabet();
    for (size_t t = 0; t < sent.tokens.size(); ++t) {
      const auto& tok = sent.tokens[t];
      out << tok.surface << '\t' << (tok.pos.empty() ? "_" : tok.pos) << '\t'
          << labels[tags[t]] << '\n';
    }
    out << '\n';
  }
}

Corpus read_column_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return read_column_file(in, path);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_column_path(const Corpus& c, const std::string& path) {
  std::ostringstream buf;
  write_column_file(c, buf);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << buf.str();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

CountsReport corpus_stats(const Corpus& c) {
  CountsReport r;
  for (const auto& sent : c.sentences) {
    for (const auto& e : sent.events) {
      ++r.events_per_class[static_cast<int>(e.cls)];
      ++r.total_events;
      if (e.end > e.start) ++r.multi_token_events;
      for (int t = e.start; t <= e.end; ++t) {
        const std::string& pos = sent.tokens[t].pos;
        ++r.event_tokens_per_pos[pos.empty() ? "_" : pos];
        ++r.total_event_tokens;
      }
    }
  }
  return r;
}

namespace {

struct Trigger {
  std::vector<std::string> words;
  EventClass cls;
  std::string pos;
};

struct TemplateTables {
  std::vector<std::pair<std::string, std::string>> fillers;  // surface, pos
  std::vector<std::vector<Trigger>> single;                  // per class
  std::vector<Trigger> multi;
  std::vector<double> class_weights;
  std::vector<std::string> vocabulary;
};

// Per-class weights follow the training-split class distribution of the
// target corpus (OCCURRENCE 9041, ..., STATE 4090 of 17528 events).
const TemplateTables& tables() {
  static const TemplateTables t = [] {
    TemplateTables tt;
    tt.fillers = {
        {"il", "Other"},       {"la", "Other"},      {"un", "Other"},
        {"una", "Other"},      {"di", "Other"},      {"a", "Other"},
        {"da", "Other"},       {"con", "Other"},     {"per", "Other"},
        {"su", "Other"},       {"non", "Other"},     {"poi", "Other"},
        {"ieri", "Other"},     {"oggi", "Other"},    {"domani", "Other"},
        {"Marco", "Noun"},     {"Anna", "Noun"},     {"Luca", "Noun"},
        {"giornale", "Noun"},  {"casa", "Noun"},     {"città", "Noun"},
        {"governo", "Noun"},   {"strada", "Noun"},   {"libro", "Noun"},
        {"ministro", "Noun"},  {"paese", "Noun"},    {"molto", "Other"},
        {"nuovo", "Other"},    {"grande", "Other"},  {"però", "Other"},
    };
    tt.single.resize(kNumEventClasses);
    auto add = [&](EventClass c, std::vector<std::string> words, std::string pos) {
      tt.single[static_cast<int>(c)].push_back({std::move(words), c, std::move(pos)});
    };
    add(EventClass::kOccurrence, {"accaduto"}, "Verb");
    add(EventClass::kOccurrence, {"arrivato"}, "Verb");
    add(EventClass::kOccurrence, {"andare"}, "Verb");
    add(EventClass::kOccurrence, {"esplosione"}, "Noun");
    add(EventClass::kOccurrence, {"incontro"}, "Noun");
    add(EventClass::kOccurrence, {"elezioni"}, "Noun");
    add(EventClass::kAspectual, {"iniziato"}, "Verb");
    add(EventClass::kAspectual, {"continuato"}, "Verb");
    add(EventClass::kAspectual, {"terminato"}, "Verb");
    add(EventClass::kIState, {"pensa"}, "Verb");
    add(EventClass::kIState, {"spera"}, "Verb");
    add(EventClass::kIState, {"desiderio"}, "Noun");
    add(EventClass::kIAction, {"tentato"}, "Verb");
    add(EventClass::kIAction, {"promesso"}, "Verb");
    add(EventClass::kIAction, {"richiesta"}, "Noun");
    add(EventClass::kPerception, {"visto"}, "Verb");
    add(EventClass::kPerception, {"sentito"}, "Verb");
    add(EventClass::kReporting, {"dichiarato"}, "Verb");
    add(EventClass::kReporting, {"annunciato"}, "Verb");
    add(EventClass::kReporting, {"riferito"}, "Verb");
    add(EventClass::kState, {"malato"}, "Adjective");
    add(EventClass::kState, {"presente"}, "Adjective");
    add(EventClass::kState, {"crisi"}, "Noun");
    add(EventClass::kState, {"pace"}, "Noun");
    tt.multi = {
        {{"in", "grado", "di"}, EventClass::kIState, "Preposition"},
        {{"fare", "le", "valigie"}, EventClass::kOccurrence, "Verb"},
        {{"messo", "in", "atto"}, EventClass::kIAction, "Verb"},
    };
    tt.class_weights = {9041, 446, 1599, 1476, 162, 714, 4090};

    std::vector<std::string> vocab;
    for (const auto& [w, _] : tt.fillers) vocab.push_back(w);
    for (const auto& cls : tt.single)
      for (const auto& tr : cls)
        for (const auto& w : tr.words) vocab.push_back(w);
    for (const auto& tr : tt.multi)
      for (const auto& w : tr.words) vocab.push_back(w);
    vocab.push_back(".");
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    tt.vocabulary = std::move(vocab);
    return tt;
  }();
  return t;
}

constexpr double kMultiTokenShare = 0.069;  // 1207 of 17528 events

}  // namespace

const std::vector<std::string>& template_vocabulary() { return tables().vocabulary; }

Corpus generate_synthetic_corpus(uint64_t seed, int n_sentences) {
  const TemplateTables& tt = tables();
  Rng rng(seed);
  Corpus corpus;
  corpus.split_name = "synthetic";
  corpus.sentences.reserve(std::max(n_sentences, 0));
  for (int s = 0; s < n_sentences; ++s) {
    Sentence sent;
    double u = rng.uniform();
    const int n_events = u < 0.65 ? 1 : (u < 0.90 ? 2 : 3);
    auto emit_fillers = [&](int lo, int hi) {
      const int n = lo + static_cast<int>(rng.below(hi - lo + 1));
      for (int i = 0; i < n; ++i) {
        const auto& [w, pos] = tt.fillers[rng.below(tt.fillers.size())];
        sent.tokens.push_back({w, pos});
      }
    };
    for (int e = 0; e < n_events; ++e) {
      emit_fillers(1, 3);
      const EventClass cls = static_cast<EventClass>(rng.weighted(tt.class_weights));
      const Trigger* trig = nullptr;
      if (rng.uniform() < kMultiTokenShare) {
        // Pick a multi-token trigger of this class when one exists.
        std::vector<const Trigger*> of_class;
        for (const auto& m : tt.multi)
          if (m.cls == cls) of_class.push_back(&m);
        if (!of_class.empty()) trig = of_class[rng.below(of_class.size())];
      }
      if (trig == nullptr) {
        const auto& pool = tt.single[static_cast<int>(cls)];
        trig = &pool[rng.below(pool.size())];
      }
      EventSpan span;
      span.start = static_cast<int>(sent.tokens.size());
      for (const auto& w : trig->words) sent.tokens.push_back({w, trig->pos});
      span.end = static_cast<int>(sent.tokens.size()) - 1;
      span.cls = cls;
      sent.events.push_back(span);
    }
    emit_fillers(0, 2);
    sent.tokens.push_back({".", "Punct"});
    corpus.sentences.push_back(std::move(sent));
  }
  return corpus;
}

}  // namespace evt
