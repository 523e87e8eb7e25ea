#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nerclust/corpus.hpp"
#include "nerclust/features.hpp"

namespace nerclust {

struct EntitySpan {
  std::string type;
  std::size_t sentence = 0;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive

  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

/// CoNLL chunk semantics: a span opens at B-X, or at an I-X that does not
/// continue an X span, and extends over the following I-X labels.
std::vector<EntitySpan> extract_entities(const std::vector<std::string>& labels,
                                         std::size_t sentence = 0);

struct PRF {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

struct EvalReport {
  std::map<std::string, PRF> per_category;  // all four types, always present
  PRF overall;                              // micro average
};

using LabelSequences = std::vector<std::vector<std::string>>;

LabelSequences gold_labels(const LabeledCorpus& corpus);

/// Exact (type, span) matching. Throws DataError on shape mismatch.
EvalReport score(const LabeledCorpus& gold, const LabelSequences& predicted);
EvalReport score(const LabelSequences& gold, const LabelSequences& predicted);

enum class McNemarUnit { Token, Entity };

McNemarUnit parse_mcnemar_unit(std::string_view name);
std::string_view to_string(McNemarUnit unit);

struct McNemarResult {
  std::size_t b = 0;  // A correct, B wrong
  std::size_t c = 0;  // A wrong, B correct
  double p_value = 1.0;
  bool significant_01 = false;
  bool significant_05 = false;
  McNemarUnit unit = McNemarUnit::Token;
};

/// Exact two-sided binomial p-value for discordant counts (b, c):
/// min(1, 2 * sum_{k <= min(b,c)} C(b+c, k) 2^-(b+c)); 1 when b + c = 0.
double mcnemar_exact_p(std::size_t b, std::size_t c);

McNemarResult mcnemar(const LabelSequences& gold, const LabelSequences& a,
                      const LabelSequences& b,
                      McNemarUnit unit = McNemarUnit::Token);

/// Per-category F1 difference (system - baseline) in points.
std::map<std::string, double> delta_report(const EvalReport& baseline,
                                           const EvalReport& system);

struct OovEntry {
  std::string word;
  std::size_t test_frequency = 0;
  std::vector<std::string> covering;  // clustering ids, in ClusterSet order
};

/// Test words absent from the training vocabulary but present in at least
/// one clustering, by test frequency then word.
std::vector<OovEntry> oov_report(const LabeledCorpus& train,
                                 const LabeledCorpus& test,
                                 const ClusterSet& clusterings);

/// Category rows (LOC, MISC, ORG, PER) plus Overall with P, R, F1 in
/// percent; a ΔF1 column is added when `baseline` is given.
void write_eval_report(const EvalReport& report, std::ostream& out,
                       const EvalReport* baseline = nullptr);

}  // namespace nerclust
