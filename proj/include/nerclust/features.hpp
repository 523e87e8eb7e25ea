#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nerclust/clustering.hpp"
#include "nerclust/corpus.hpp"

namespace nerclust {

struct FeatureConfig {
  std::size_t context_window = 1;
  bool use_shape = true;
  bool use_prefix_suffix = true;  // lengths 1..3 of the current word
  bool use_pos = true;            // only fires when the column is present
  bool use_lemma = true;
  bool use_bigrams = true;
  std::size_t cluster_window = 1;
  std::vector<std::string> cluster_sources;
  /// Forbid O -> I-X, X -> I-Y (Y != X) and a sentence-initial I-X.
  bool transition_mask = true;

  /// Applies one `key=value` setting; throws UsageError on unknown keys.
  void set(std::string_view key, std::string_view value);
  /// Settings in a fixed order, as accepted by set().
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  void validate() const;
};

/// Word-to-cluster lookups keyed by clustering id, in insertion order.
class ClusterSet {
 public:
  void add(std::string id, const Clustering& clustering);
  void add(std::string id, std::unordered_map<std::string, int> lookup);

  bool contains(std::string_view id) const;
  const std::unordered_map<std::string, int>& lookup(std::string_view id) const;
  const std::vector<std::string>& ids() const { return ids_; }
  bool empty() const { return ids_.empty(); }

 private:
  std::vector<std::string> ids_;
  std::vector<std::unordered_map<std::string, int>> maps_;
};

/// Uppercase -> X, lowercase -> x, digit -> d, anything else verbatim; runs
/// longer than four are cut to four followed by '*'.
std::string word_shape(std::string_view word);

/// Sorted, duplicate-free attribute strings for one token.
std::vector<std::string> extract_features(const Sentence& sentence,
                                          std::size_t position,
                                          const FeatureConfig& config,
                                          const ClusterSet& clusters);

}  // namespace nerclust
