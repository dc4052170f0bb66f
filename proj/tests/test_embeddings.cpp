#include <sstream>

#include "doctest.h"
#include "evt/embeddings.hpp"

using namespace evt;

namespace {

Corpus corpus_of_words(std::initializer_list<const char*> words) {
  Corpus c;
  Sentence s;
  for (const char* w : words) s.tokens.push_back({w, ""});
  c.sentences.push_back(std::move(s));
  return c;
}

}  // namespace

TEST_CASE("load_text_vectors with and without header") {
  std::istringstream plain("casa 0.1 0.2 0.3\ncane -1 2 3.5\n");
  const EmbeddingTable a = load_text_vectors(plain, false);
  CHECK(a.dim == 3);
  CHECK(a.entries.size() == 2);
  CHECK(a.entries.at("casa") == Vec{0.1, 0.2, 0.3});

  std::istringstream with_header("2 3\ncasa 0.1 0.2 0.3\ncane -1 2 3.5\n");
  const EmbeddingTable b = load_text_vectors(with_header, true);
  CHECK(b.dim == a.dim);
  CHECK(b.entries == a.entries);
  CHECK(b.unk_vector == a.unk_vector);
}

TEST_CASE("load_text_vectors rejects malformed input") {
  std::istringstream ragged("casa 0.1 0.2 0.3\ncane 1 2\n");
  CHECK_THROWS_WITH_AS(load_text_vectors(ragged, false), doctest::Contains("line 2"),
                       ParseError);

  std::istringstream mismatch("5 4\ncasa 0.1 0.2 0.3\n");
  CHECK_THROWS_AS(load_text_vectors(mismatch, true), ParseError);

  std::istringstream empty("");
  CHECK_THROWS_AS(load_text_vectors(empty, false), ParseError);

  std::istringstream bad_float("casa 0.1 x\n");
  CHECK_THROWS_AS(load_text_vectors(bad_float, false), ParseError);
}

TEST_CASE("load_text_vectors tolerates trailing whitespace and no final newline") {
  std::istringstream a("casa 1 2 \r\ncane 3 4");
  const EmbeddingTable t = load_text_vectors(a, false);
  CHECK(t.dim == 2);
  CHECK(t.entries.at("cane") == Vec{3.0, 4.0});
}

TEST_CASE("duplicate words keep the first occurrence") {
  std::istringstream in("casa 1 1\ncasa 2 2\n");
  const EmbeddingTable t = load_text_vectors(in, false);
  CHECK(t.entries.at("casa") == Vec{1.0, 1.0});
  CHECK(t.duplicate_words == 1);
}

TEST_CASE("lookup walks the fallback chain") {
  std::istringstream in("casa 1 0\nvia2000 0 1\nanno0 5 5\n");
  const EmbeddingTable t = load_text_vectors(in, false);

  CHECK(lookup(t, "casa") == Vec{1.0, 0.0});
  CHECK(lookup(t, "Casa") == Vec{1.0, 0.0});    // lowercase step
  CHECK(lookup(t, "CASA") == Vec{1.0, 0.0});
  CHECK(lookup(t, "Anno7") == Vec{5.0, 5.0});   // digit-normalized step
  CHECK(lookup(t, "ignota") == t.unk_vector);
  CHECK(lookup(t, "ignota").size() == t.dim);

  CHECK_FALSE(is_oov(t, "Casa"));
  CHECK(is_oov(t, "ignota"));
}

TEST_CASE("unk vector is fixed across loads") {
  std::istringstream a("casa 1 2 3\n");
  std::istringstream b("altro 9 9 9\n");
  const EmbeddingTable ta = load_text_vectors(a, false);
  const EmbeddingTable tb = load_text_vectors(b, false);
  CHECK(ta.unk_vector == tb.unk_vector);
  for (double x : tb.unk_vector) {
    CHECK(x >= -0.25);
    CHECK(x < 0.25);
  }
}

TEST_CASE("oov_rate fixtures") {
  std::istringstream in("uno 1\ndue 1\ntre 1\n");
  const EmbeddingTable t = load_text_vectors(in, false);

  const OovReport all = oov_rate(corpus_of_words({"uno", "due", "tre"}), t);
  CHECK(all.token_oov_rate == 0.0);
  CHECK(all.type_oov_rate == 0.0);

  const OovReport quarter = oov_rate(corpus_of_words({"uno", "due", "tre", "nove"}), t);
  CHECK(quarter.n_tokens == 4);
  CHECK(quarter.n_types == 4);
  CHECK(quarter.token_oov_rate == doctest::Approx(25.0));
  CHECK(quarter.type_oov_rate == doctest::Approx(25.0));

  const OovReport empty = oov_rate(Corpus{}, t);
  CHECK(empty.token_oov_rate == 0.0);
  CHECK(empty.type_oov_rate == 0.0);
}

TEST_CASE("oov_rate counts types over lowercased forms") {
  std::istringstream in("uno 1\n");
  const EmbeddingTable t = load_text_vectors(in, false);
  // "Uno" and "uno" are one covered type; "Due" and "due" one uncovered type
  const OovReport r = oov_rate(corpus_of_words({"Uno", "uno", "Due", "due"}), t);
  CHECK(r.n_types == 2);
  CHECK(r.oov_types == 1);
  CHECK(r.token_oov_rate == doctest::Approx(50.0));
  CHECK(r.type_oov_rate == doctest::Approx(50.0));
}

TEST_CASE("adding entries never raises oov rates") {
  const Corpus c = generate_synthetic_corpus(21, 50);
  std::ostringstream small_src;
  const auto& vocab = template_vocabulary();
  for (size_t i = 0; i < vocab.size(); i += 2) small_src << vocab[i] << " 1 2\n";
  std::istringstream small_in(small_src.str());
  const EmbeddingTable small = load_text_vectors(small_in, false);

  std::ostringstream big_src;
  for (const auto& w : vocab) big_src << w << " 1 2\n";
  std::istringstream big_in(big_src.str());
  const EmbeddingTable big = load_text_vectors(big_in, false);

  const OovReport rs = oov_rate(c, small);
  const OovReport rb = oov_rate(c, big);
  CHECK(rb.token_oov_rate <= rs.token_oov_rate);
  CHECK(rb.type_oov_rate <= rs.type_oov_rate);
  CHECK(rb.token_oov_rate == 0.0);
}

TEST_CASE("char vocab construction") {
  const CharVocab empty = build_char_vocab(Corpus{});
  CHECK(empty.size() == 2);

  const CharVocab v = build_char_vocab(corpus_of_words({"ab", "ba"}));
  CHECK(v.size() == 4);
  CHECK(v.index_of(U'a') == 2);
  CHECK(v.index_of(U'b') == 3);
  CHECK(v.index_of(U'z') == CharVocab::kUnk);

  const CharVocab acc = build_char_vocab(corpus_of_words({"città"}));
  CHECK(acc.size() == 2 + 4);  // {c, i, t, à}
}

TEST_CASE("char vocab handles accented characters") {
  const CharVocab v = build_char_vocab(corpus_of_words({"però"}));
  // p e r ò -> 4 distinct characters
  CHECK(v.size() == 6);
  CHECK(v.index_of(U'ò') > CharVocab::kUnk);
}

TEST_CASE("write_random_vectors output loads back") {
  std::ostringstream out;
  write_random_vectors({"uno", "due"}, 5, 3, out);
  std::istringstream in(out.str());
  const EmbeddingTable t = load_text_vectors(in, false);
  CHECK(t.dim == 5);
  CHECK(t.entries.size() == 2);

  std::ostringstream out2;
  write_random_vectors({"uno", "due"}, 5, 3, out2);
  CHECK(out.str() == out2.str());
}
