#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nerclust/corpus.hpp"

namespace nerclust {

/// Hard clustering of a vocabulary into K classes.
class Clustering {
 public:
  Clustering() = default;
  Clustering(std::string language, int k);

  const std::string& language() const { return language_; }
  void set_language(std::string language) { language_ = std::move(language); }
  int k() const { return k_; }
  std::size_t size() const { return words_.size(); }

  /// Throws DataError on a duplicate word or an out-of-range cluster id.
  void add(std::string word, int cluster, std::uint64_t count);
  void reassign(std::size_t index, int cluster);

  const std::string& word(std::size_t i) const { return words_[i]; }
  int cluster(std::size_t i) const { return clusters_[i]; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }

  std::optional<std::size_t> find(std::string_view word) const;
  std::optional<int> cluster_of(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  /// Word indices per cluster, each list in file order (count descending,
  /// then word). Always the exact inverse of the assignment.
  std::vector<std::vector<std::size_t>> members() const;

  /// Indices sorted by cluster id, count descending, word.
  std::vector<std::size_t> write_order() const;

  /// Same words, clusters and counts (insertion order ignored).
  bool same_assignment(const Clustering& other) const;

 private:
  std::string language_;
  int k_ = 0;
  std::vector<std::string> words_;
  std::vector<int> clusters_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// `#K=<k>` header, optional `#lang=<tag>` line, then
/// `cluster_id<TAB>word<TAB>count` rows.
void write_clusters(const Clustering& clustering, std::ostream& out);
Clustering read_clusters(std::istream& in);

/// Sufficient statistics of the class-bigram objective.
struct ClusterStats {
  int k = 0;
  std::vector<std::int64_t> cluster_bigram;  // k*k, row = left cluster
  std::vector<std::int64_t> left_marginal;
  std::vector<std::int64_t> right_marginal;
  std::int64_t total_bigrams = 0;

  std::int64_t at(int left, int right) const {
    return cluster_bigram[std::size_t(left) * std::size_t(k) + std::size_t(right)];
  }
  std::int64_t& at(int left, int right) {
    return cluster_bigram[std::size_t(left) * std::size_t(k) + std::size_t(right)];
  }

  static ClusterStats compute(const Vocabulary& vocab,
                              std::span<const int> assign, int k);

  friend bool operator==(const ClusterStats&, const ClusterStats&) = default;
};

/// Average mutual information of adjacent cluster labels, in bits.
/// Throws DataError when marginals disagree with the table or total is 0.
double ami(const ClusterStats& stats);

/// Top K-1 words (vocabulary id order) as singletons, the rest in K-1.
/// `seed` is accepted for interface stability; initialization is
/// deterministic.
std::vector<int> init_assignment(const Vocabulary& vocab, int k);
Clustering init_clustering(const Vocabulary& vocab, int k,
                           std::uint64_t seed = 1);

struct ExchangeOptions {
  /// Adds each word's final `suffix_length` characters as an extra context,
  /// contributing a cluster/suffix mutual-information term to the objective.
  bool suffix_context = false;
  std::size_t suffix_length = 3;
  /// Evaluate candidate clusters with the OpenMP kernel.
  bool parallel = true;
};

/// Incremental exchange-algorithm state over one vocabulary.
class ExchangeClusterer {
 public:
  ExchangeClusterer(const Vocabulary& vocab, std::vector<int> assign, int k,
                    ExchangeOptions options = {});

  /// Visits words in id (frequency) order and applies the best strictly
  /// improving move for each. Returns the number of moves.
  std::size_t run_pass();

  /// Change of the objective (bits) if `word` moved to `target`, computed
  /// from the incremental statistics. State is left unchanged.
  double move_delta(std::size_t word, int target);
  void apply_move(std::size_t word, int target);

  /// Class-bigram AMI plus, with suffix context, the suffix MI term.
  double objective() const;

  const ClusterStats& stats() const { return stats_; }
  const std::vector<int>& assignment() const { return assign_; }
  int k() const { return k_; }

  /// Called after every applied move with (word, from, to, gain in bits).
  std::function<void(std::size_t, int, int, double)> on_move;

 private:
  struct Neighbor {
    std::uint32_t word;
    std::int64_t count;
  };

  void gather(std::size_t word);
  void clear_gathered();
  void remove(std::size_t word);
  void insert(std::size_t word, int target);
  void compute_gains(std::size_t word);

  const Vocabulary* vocab_;
  int k_;
  ExchangeOptions options_;
  std::vector<int> assign_;
  std::vector<std::size_t> cluster_size_;
  ClusterStats stats_;

  std::vector<std::vector<Neighbor>> successors_;
  std::vector<std::vector<Neighbor>> predecessors_;
  std::vector<std::int64_t> self_loops_;
  std::vector<std::int64_t> left_count_;   // bigram left marginal per word
  std::vector<std::int64_t> right_count_;  // bigram right marginal per word

  // Cluster/suffix table (suffix context only).
  std::vector<std::uint32_t> suffix_of_;
  std::size_t suffix_types_ = 0;
  std::vector<std::int64_t> suffix_table_;  // k * suffix_types
  std::vector<std::int64_t> suffix_row_;
  std::vector<std::int64_t> suffix_col_;
  std::int64_t suffix_total_ = 0;

  // Scratch for the word being moved.
  std::vector<std::int64_t> out_dense_;
  std::vector<std::int64_t> in_dense_;
  std::vector<int> out_nz_;
  std::vector<int> in_nz_;
  std::vector<double> gains_;
};

struct ClusterTrainingLog {
  std::vector<double> objective_per_pass;  // entry 0 is the initialization
  std::vector<std::size_t> moves_per_pass;
};

/// One exchange pass starting from `clustering` (which must cover `vocab`).
std::pair<Clustering, std::size_t> exchange_pass(
    const Clustering& clustering, const Vocabulary& vocab,
    ExchangeOptions options = {});

struct ClusterTrainingConfig {
  int k = 400;
  std::size_t max_passes = 20;
  std::uint64_t seed = 1;
  std::uint64_t min_count = 5;
  std::string language;
  std::string boundary = std::string(kDefaultBoundary);
  ExchangeOptions exchange;
};

Clustering clustering_from_assignment(const Vocabulary& vocab,
                                      std::span<const int> assign, int k,
                                      std::string language);

/// build_vocabulary, init_clustering, then exchange passes until no move is
/// made or `max_passes` is reached.
Clustering train_clusters(const PlainCorpus& sentences,
                          const ClusterTrainingConfig& config,
                          ClusterTrainingLog* log = nullptr);

Clustering train_clusters(const Vocabulary& vocab,
                          const ClusterTrainingConfig& config,
                          ClusterTrainingLog* log = nullptr);

}  // namespace nerclust
