#include <gtest/gtest.h>

#include <algorithm>

#include "nerclust/error.hpp"
#include "nerclust/features.hpp"

using namespace nerclust;

namespace {

Sentence sentence(std::vector<std::string> words) {
  Sentence s;
  for (auto& w : words) s.tokens.push_back(Token{w, {}, {}, {}, {}});
  return s;
}

bool has(const std::vector<std::string>& f, const std::string& x) {
  return std::find(f.begin(), f.end(), x) != f.end();
}

}  // namespace

TEST(WordShape, Examples) {
  EXPECT_EQ(word_shape("Obama"), "Xxxxx");
  EXPECT_EQ(word_shape("Schalke"), "Xxxxx*");
  EXPECT_EQ(word_shape("2012"), "dddd");
  EXPECT_EQ(word_shape("20120"), "dddd*");
  EXPECT_EQ(word_shape("U.S."), "X.X.");
  EXPECT_EQ(word_shape("e-mail"), "x-xxxx");
  EXPECT_EQ(word_shape("Müller"), "Xxxxx*");
  EXPECT_EQ(word_shape("ÖSTERREICH"), "XXXX*");
  EXPECT_EQ(word_shape("Łódź"), "Xxxx");
  EXPECT_EQ(word_shape("Москва"), "Xxxxx*");
  EXPECT_EQ(word_shape("..."), "...");
}

TEST(ExtractFeatures, ClusterFeatures) {
  ClusterSet clusters;
  clusters.add("de", std::unordered_map<std::string, int>{{"Schalke", 217}, {"in", 3}});
  FeatureConfig cfg;
  cfg.cluster_sources = {"de"};
  auto s = sentence({"Schalke", "gewinnt"});
  auto f = extract_features(s, 0, cfg, clusters);
  EXPECT_TRUE(has(f, "CL:de:217@0"));
  EXPECT_TRUE(has(f, "CL:de:NOCLUSTER@1"));
  EXPECT_FALSE(has(f, "CL:de:NOCLUSTER@-1"));  // outside the sentence
  auto g = extract_features(s, 1, cfg, clusters);
  EXPECT_TRUE(has(g, "CL:de:NOCLUSTER@0"));
  EXPECT_TRUE(has(g, "CL:de:217@-1"));
}

TEST(ExtractFeatures, UnknownSourceIsError) {
  FeatureConfig cfg;
  cfg.cluster_sources = {"fr"};
  EXPECT_THROW(extract_features(sentence({"a"}), 0, cfg, {}), UsageError);
}

TEST(ExtractFeatures, FullTemplate) {
  Sentence s;
  s.tokens.push_back(Token{"Obama", "NNP", {}, {}, {}});
  s.tokens.push_back(Token{"spoke", "VBD", {}, {}, {}});
  auto f = extract_features(s, 0, FeatureConfig{}, {});
  const std::vector<std::string> expected{
      "BG:<BOS>|Obama@-1", "BG:Obama|spoke@0", "BIAS",       "POS:NNP@0",
      "POS:VBD@1",         "PRE1:O@0",         "PRE2:Ob@0",  "PRE3:Oba@0",
      "SH:Xxxxx@0",        "SUF1:a@0",         "SUF2:ma@0",  "SUF3:ama@0",
      "W:<BOS>@-1",        "W:Obama@0",        "W:spoke@1"};
  EXPECT_EQ(f, expected);
}

TEST(ExtractFeatures, SortedAndDuplicateFree) {
  FeatureConfig cfg;
  cfg.context_window = 2;
  auto s = sentence({"a", "a", "a"});
  for (std::size_t t = 0; t < 3; ++t) {
    auto f = extract_features(s, t, cfg, {});
    EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
    EXPECT_EQ(std::adjacent_find(f.begin(), f.end()), f.end());
  }
}

TEST(ExtractFeatures, Utf8Affixes) {
  FeatureConfig cfg;
  auto f = extract_features(sentence({"Köln"}), 0, cfg, {});
  EXPECT_TRUE(has(f, "PRE2:Kö@0"));
  EXPECT_TRUE(has(f, "SUF3:öln@0"));
}

TEST(FeatureConfig, SetAndRoundTrip) {
  FeatureConfig a;
  a.set("context_window", "2");
  a.set("use_shape", "false");
  a.set("cluster_sources", "de,en");
  FeatureConfig b;
  for (const auto& [k, v] : a.to_pairs()) b.set(k, v);
  EXPECT_EQ(a.to_pairs(), b.to_pairs());
  EXPECT_EQ(b.cluster_sources, (std::vector<std::string>{"de", "en"}));
  EXPECT_THROW(a.set("nope", "1"), UsageError);
  EXPECT_THROW(a.set("use_shape", "maybe"), UsageError);
  a.set("cluster_sources", "de,de");
  EXPECT_THROW(a.validate(), UsageError);
}

TEST(ClusterSet, RejectsBadIds) {
  ClusterSet c;
  EXPECT_THROW(c.add("a:b", std::unordered_map<std::string, int>{}), UsageError);
  c.add("de", std::unordered_map<std::string, int>{});
  EXPECT_THROW(c.add("de", std::unordered_map<std::string, int>{}), UsageError);
}
