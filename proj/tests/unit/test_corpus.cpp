#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "nerclust/corpus.hpp"
#include "nerclust/error.hpp"
#include "nerclust/eval.hpp"

using namespace nerclust;

namespace {

LabeledCorpus parse(const std::string& text, ColumnSpec spec = ColumnSpec::conll2003()) {
  std::istringstream in(text);
  return read_conll(in, spec);
}

std::uint64_t count_of(const Vocabulary& v, std::string_view w) {
  auto id = v.find(w);
  return id ? v.entry(*id).count : 0;
}

std::uint64_t bigram_of(const Vocabulary& v, std::string_view a, std::string_view b) {
  auto ia = v.find(a), ib = v.find(b);
  if (!ia || !ib) return 0;
  for (const auto& g : v.bigrams())
    if (g.left == *ia && g.right == *ib) return g.count;
  return 0;
}

}  // namespace

TEST(ReadConll, MapsFields) {
  auto c = parse("Obama NNP I-NP B-PER\nspoke VBD I-VP O\n\n");
  ASSERT_EQ(c.sentences.size(), 1u);
  const auto& s = c.sentences[0];
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.tokens[0].surface, "Obama");
  EXPECT_EQ(*s.tokens[0].pos, "NNP");
  EXPECT_EQ(*s.tokens[0].chunk, "I-NP");
  EXPECT_EQ(s.labels(), (std::vector<std::string>{"B-PER", "O"}));
  EXPECT_EQ(c.label_set, (std::set<std::string>{"PER"}));
}

TEST(ReadConll, DocstartOnlyGivesNoSentences) {
  auto c = parse("-DOCSTART- -X- O O\n\n\n");
  EXPECT_TRUE(c.sentences.empty());
}

TEST(ReadConll, DocstartBetweenDocuments) {
  auto c = parse("-DOCSTART- -X- O O\n\nA NN O O\n\n-DOCSTART- -X- O O\nB NN O O\n");
  ASSERT_EQ(c.sentences.size(), 2u);
  EXPECT_EQ(c.sentences[1].tokens[0].surface, "B");
}

TEST(ReadConll, EmptyStream) { EXPECT_TRUE(parse("").sentences.empty()); }

TEST(ReadConll, ShortLineReportsLineNumber) {
  try {
    parse("Obama NNP I-NP B-PER\nspoke VBD\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ReadConll, RejectsUnknownLabel) {
  EXPECT_THROW(parse("x NN O B-FOO\n"), DataError);
}

TEST(ReadConll, TabSeparatedTwoColumn) {
  ColumnSpec spec = ColumnSpec::conll2002();
  spec.separator = '\t';
  auto c = parse("Madrid\tB-LOC\nes\tO\n", spec);
  ASSERT_EQ(c.sentences.size(), 1u);
  EXPECT_FALSE(c.sentences[0].tokens[0].pos.has_value());
  EXPECT_EQ(c.sentences[0].labels(), (std::vector<std::string>{"B-LOC", "O"}));
}

TEST(ReadConll, Iob1KeptVerbatimUntilNormalized) {
  auto c = parse(
      "Angela NNP I-NP I-PER\nMerkel NNP I-NP I-PER\nbesuchte VVFIN I-VP O\n"
      "Paris NE I-NP I-LOC\nheute ADV I-ADVP O\n");
  EXPECT_EQ(c.sentences[0].tokens[0].ne_label, "I-PER");
  auto n = normalize_tag_scheme(c, TagScheme::IOB1);
  // By hand: spans (PER,0,1) and (LOC,3,3) re-emitted with B- at each start.
  EXPECT_EQ(n.sentences[0].labels(),
            (std::vector<std::string>{"B-PER", "I-PER", "O", "B-LOC", "O"}));
}

TEST(ColumnSpec, Validation) {
  EXPECT_THROW(ColumnSpec::parse("word=0,ne=0"), UsageError);
  EXPECT_THROW(ColumnSpec::parse("word=0,pos=1,ne=1"), UsageError);
  EXPECT_THROW(ColumnSpec::parse("bogus=1"), UsageError);
  auto s = ColumnSpec::parse("word=0,lemma=1,pos=2,ne=3");
  EXPECT_EQ(*s.lemma_col, 1u);
  EXPECT_FALSE(s.chunk_col.has_value());
  EXPECT_EQ(s.width(), 4u);
}

TEST(TagScheme, Iob1Examples) {
  using V = std::vector<std::string>;
  EXPECT_EQ(to_bio2(V{"I-PER", "I-PER", "O"}, TagScheme::IOB1),
            (V{"B-PER", "I-PER", "O"}));
  EXPECT_EQ(to_bio2(V{"I-PER", "B-PER"}, TagScheme::IOB1), (V{"B-PER", "B-PER"}));
  EXPECT_EQ(to_bio2(V{"I-LOC", "I-PER"}, TagScheme::IOB1), (V{"B-LOC", "B-PER"}));
}

TEST(TagScheme, Bio2IsIdentity) {
  using V = std::vector<std::string>;
  const V x{"B-PER", "I-PER", "O", "B-LOC", "B-LOC", "I-LOC"};
  EXPECT_EQ(to_bio2(x, TagScheme::BIO2), x);
}

TEST(TagScheme, ViolationsNameSentenceAndPosition) {
  using V = std::vector<std::string>;
  EXPECT_THROW(to_bio2(V{"O", "I-PER"}, TagScheme::BIO2), DataError);
  EXPECT_THROW(to_bio2(V{"O", "B-PER"}, TagScheme::IOB1), DataError);
  auto c = parse("a NN O O\n\nb NN O O\nc NN O I-PER\n");
  try {
    normalize_tag_scheme(c, TagScheme::BIO2);
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("sentence 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("position 1"), std::string::npos) << msg;
  }
}

TEST(TagScheme, SpanPreservingOnRandomIob1) {
  std::mt19937 rng(7);
  const std::vector<std::string> types{"LOC", "MISC", "ORG", "PER"};
  for (int trial = 0; trial < 500; ++trial) {
    // Random IOB1 sequence: I-X anywhere, B-X only right after an X span.
    std::vector<std::string> iob1;
    const int n = 1 + int(rng() % 10);
    for (int t = 0; t < n; ++t) {
      const auto& ty = types[rng() % 4];
      const int r = int(rng() % 3);
      if (r == 0) {
        iob1.push_back("O");
      } else if (r == 2 && t > 0 && iob1.back() != "O" &&
                 iob1.back().substr(2) == ty) {
        iob1.push_back("B-" + ty);
      } else {
        iob1.push_back("I-" + ty);
      }
    }
    // IOB1 spans by definition: a span continues through I-X unless a B-X
    // starts a new one.
    std::vector<EntitySpan> expected;
    for (std::size_t t = 0; t < iob1.size(); ++t) {
      if (iob1[t] == "O") continue;
      const std::string ty = iob1[t].substr(2);
      const bool cont = t > 0 && iob1[t][0] == 'I' && iob1[t - 1] != "O" &&
                        iob1[t - 1].substr(2) == ty;
      if (cont)
        expected.back().end = t;
      else
        expected.push_back({ty, 0, t, t});
    }
    const auto bio2 = to_bio2(iob1, TagScheme::IOB1);
    EXPECT_EQ(extract_entities(bio2), expected);
    EXPECT_EQ(to_bio2(bio2, TagScheme::BIO2), bio2);
  }
}

TEST(WriteConll, RoundTrip) {
  const std::string text =
      "EU NNP I-NP B-ORG\nrejects VBZ I-VP O\nGerman JJ I-NP B-MISC\n\n"
      "Peter NNP I-NP B-PER\nBlackburn NNP I-NP I-PER\n\n";
  auto c = parse(text);
  std::ostringstream out;
  write_conll(c, out);
  EXPECT_EQ(out.str(), text);
  auto again = parse(out.str());
  ASSERT_EQ(again.sentences.size(), c.sentences.size());
  for (std::size_t s = 0; s < c.sentences.size(); ++s)
    EXPECT_EQ(again.sentences[s].labels(), c.sentences[s].labels());
}

TEST(WriteConll, AppendsPredictions) {
  auto c = parse("Obama NNP I-NP B-PER\nspoke VBD I-VP O\n");
  std::vector<std::vector<std::string>> pred{{"B-PER", "B-LOC"}};
  std::ostringstream out;
  write_conll(c, out, &pred);
  std::istringstream in(out.str());
  EXPECT_EQ(read_label_column(in), pred);
}

TEST(TokenizePlain, Examples) {
  std::istringstream in("Barack Obama hat 2012\n    \na\tb  c\n\n");
  auto p = tokenize_plain(in);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0], (std::vector<std::string>{"Barack", "Obama", "hat", "2012"}));
  EXPECT_EQ(p[1], (std::vector<std::string>{"a", "b", "c"}));
}

TEST(TokenizePlain, InvalidUtf8ReportsOffset) {
  std::istringstream in("ok\nab\xC3(\n");
  try {
    tokenize_plain(in);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset 5"), std::string::npos) << e.what();
  }
  EXPECT_EQ(find_invalid_utf8("M\xC3\xBCnchen"), std::nullopt);
  EXPECT_EQ(find_invalid_utf8("\xC0\x80"), 0u);  // overlong
  EXPECT_EQ(find_invalid_utf8("x\xED\xA0\x80"), 1u);  // surrogate
}

TEST(Vocabulary, HandCountedSentence) {
  // Framed stream: <s> a b a b <s>.
  auto v = build_vocabulary({{"a", "b", "a", "b"}}, 1);
  EXPECT_EQ(count_of(v, "a"), 2u);
  EXPECT_EQ(count_of(v, "b"), 2u);
  EXPECT_EQ(count_of(v, "<s>"), 1u);
  EXPECT_EQ(bigram_of(v, "a", "b"), 2u);
  EXPECT_EQ(bigram_of(v, "b", "a"), 1u);
  EXPECT_EQ(bigram_of(v, "<s>", "a"), 1u);
  EXPECT_EQ(bigram_of(v, "b", "<s>"), 1u);
  EXPECT_EQ(v.bigram_total(), 5u);
  EXPECT_EQ(v.unigram_total(), 4u);
  EXPECT_FALSE(v.unk_id().has_value());
}

TEST(Vocabulary, ThresholdMapsToUnknown) {
  auto v = build_vocabulary({{"a", "b", "a", "b"}}, 3);
  EXPECT_FALSE(v.find("a").has_value());
  EXPECT_FALSE(v.find("b").has_value());
  ASSERT_TRUE(v.unk_id().has_value());
  EXPECT_EQ(count_of(v, "<unk>"), 4u);
  EXPECT_EQ(bigram_of(v, "<unk>", "<unk>"), 3u);
}

TEST(Vocabulary, IdsFollowFrequencyThenWord) {
  auto v = build_vocabulary({{"c", "b", "a", "b", "c", "d"}}, 1, "");
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.entry(0).word, "b");
  EXPECT_EQ(v.entry(1).word, "c");
  EXPECT_EQ(v.entry(2).word, "a");
  EXPECT_EQ(v.entry(3).word, "d");
  std::ostringstream out;
  v.write_tsv(out);
  EXPECT_EQ(out.str(), "b\t2\nc\t2\na\t1\nd\t1\n");
}

TEST(Vocabulary, EmptyStreamIsError) {
  EXPECT_THROW(build_vocabulary({}, 1), DataError);
  EXPECT_THROW(build_vocabulary({{}}, 1), DataError);
}

TEST(Vocabulary, DoubledCorpusDoublesCounts) {
  const PlainCorpus one{{"der", "Hund", "bellt"}, {"der", "Hund"}};
  PlainCorpus two = one;
  two.insert(two.end(), one.begin(), one.end());
  auto v1 = build_vocabulary(one, 1), v2 = build_vocabulary(two, 1);
  ASSERT_EQ(v1.size(), v2.size());
  for (std::size_t i = 0; i < v1.size(); ++i)
    EXPECT_EQ(2 * v1.entry(i).count, v2.entry(i).count);
  ASSERT_EQ(v1.bigrams().size(), v2.bigrams().size());
  for (std::size_t i = 0; i < v1.bigrams().size(); ++i)
    EXPECT_EQ(2 * v1.bigrams()[i].count, v2.bigrams()[i].count);
}

TEST(Vocabulary, AdditivityOverShards) {
  std::mt19937 rng(3);
  const std::vector<std::string> words{"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 20; ++trial) {
    PlainCorpus left, right;
    for (int s = 0; s < 30; ++s) {
      std::vector<std::string> sent(1 + rng() % 6);
      for (auto& w : sent) w = words[rng() % words.size()];
      (rng() % 2 ? left : right).push_back(sent);
    }
    if (left.empty() || right.empty()) continue;
    PlainCorpus all = left;
    all.insert(all.end(), right.begin(), right.end());
    auto va = build_vocabulary(all, 1), vl = build_vocabulary(left, 1),
         vr = build_vocabulary(right, 1);
    for (const auto& e : va.entries())
      EXPECT_EQ(e.count, count_of(vl, e.word) + count_of(vr, e.word));
    for (const auto& g : va.bigrams()) {
      const auto& a = va.entry(g.left).word;
      const auto& b = va.entry(g.right).word;
      EXPECT_EQ(g.count, bigram_of(vl, a, b) + bigram_of(vr, a, b));
    }
  }
}

TEST(Vocabulary, BigramTotalEqualsTransitions) {
  std::mt19937 rng(11);
  const std::vector<std::string> words{"x", "y", "z", "w", "v", "u", "t"};
  for (std::uint64_t min_count : {1u, 3u}) {
    PlainCorpus corpus;
    std::uint64_t transitions = 0;
    for (int s = 0; s < 200; ++s) {
      std::vector<std::string> sent(1 + rng() % 8);
      for (auto& w : sent) w = words[rng() % (1 + rng() % words.size())];
      transitions += sent.size() + 1;  // framed by boundary on both sides
      corpus.push_back(sent);
    }
    auto v = build_vocabulary(corpus, min_count);
    EXPECT_EQ(v.bigram_total(), transitions);
    // Every token is followed by exactly one symbol and preceded by one.
    std::vector<std::uint64_t> row(v.size()), col(v.size());
    for (const auto& g : v.bigrams()) {
      row[g.left] += g.count;
      col[g.right] += g.count;
    }
    for (std::uint32_t i = 0; i < v.size(); ++i) {
      EXPECT_EQ(row[i], v.entry(i).count);
      EXPECT_EQ(col[i], v.entry(i).count);
      if (i != *v.boundary_id()) EXPECT_GE(v.entry(i).count, min_count);
    }
  }
}

TEST(Vocabulary, RejectsReservedSymbols) {
  EXPECT_THROW(build_vocabulary({{"a", "<s>"}}, 1), DataError);
}
