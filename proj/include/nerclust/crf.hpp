#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nerclust/corpus.hpp"
#include "nerclust/features.hpp"
#include "nerclust/kernels.hpp"

namespace nerclust {

struct TrainConfig {
  double l2_sigma = 1.0;
  std::size_t lbfgs_history = 10;
  double tolerance = 1e-5;  // relative objective change
  std::size_t max_iterations = 200;
  std::uint64_t seed = 1;
  bool parallel = true;

  void set(std::string_view key, std::string_view value);
  void validate() const;
};

struct TrainingSummary {
  std::size_t iterations = 0;
  bool converged = false;
  double objective = 0.0;
  std::vector<double> objective_history;  // after each accepted iteration
};

/// Labels are "O" followed by B-/I- pairs per entity type. Types are
/// ordered alphabetically.
std::vector<std::string> make_label_set(const std::set<std::string>& types);

/// Linear-chain CRF with attribute x label emission weights, label bigram
/// transition weights and start weights.
class CrfModel {
 public:
  CrfModel() = default;
  CrfModel(std::vector<std::string> labels, std::vector<std::string> attributes,
           FeatureConfig config, ClusterSet clusters, double l2_sigma = 1.0);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_labels() const { return labels_.size(); }
  std::optional<int> label_id(std::string_view label) const;

  /// Feature (attribute) strings; emission weights exist for every
  /// attribute/label pair.
  const std::vector<std::string>& attributes() const { return attributes_; }
  std::size_t num_attributes() const { return attributes_.size(); }
  std::optional<std::uint32_t> attribute_id(std::string_view attr) const;

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  double& emission(std::size_t attr, std::size_t label) {
    return weights_[attr * num_labels() + label];
  }
  double& transition(std::size_t prev, std::size_t cur) {
    return weights_[num_attributes() * num_labels() + prev * num_labels() + cur];
  }
  double& start(std::size_t label) {
    return weights_[num_attributes() * num_labels() +
                    num_labels() * num_labels() + label];
  }

  /// True when the transition is permitted (always, without the mask).
  bool allowed(std::size_t prev, std::size_t cur) const;
  bool allowed_start(std::size_t label) const;

  const FeatureConfig& config() const { return config_; }
  const ClusterSet& clusters() const { return clusters_; }
  double l2_sigma() const { return l2_sigma_; }
  const TrainingSummary& summary() const { return summary_; }
  void set_summary(TrainingSummary s) { summary_ = std::move(s); }

  /// Known attribute ids of every token; unseen attributes are dropped.
  std::vector<std::vector<std::uint32_t>> sentence_attributes(
      const Sentence& sentence) const;
  /// Flattens sentences; with `with_gold`, labels must be in the label set.
  kernels::ChainData compile(std::span<const Sentence> sentences,
                             bool with_gold) const;
  kernels::ChainParams params() const;
  kernels::ChainParams params(std::span<const double> weights) const;

  void save(std::ostream& out) const;
  static CrfModel load(std::istream& in);

 private:
  void build_masks();

  std::vector<std::string> labels_;
  std::vector<std::string> attributes_;
  std::unordered_map<std::string, std::uint32_t> attribute_index_;
  std::vector<double> weights_;
  FeatureConfig config_;
  ClusterSet clusters_;
  double l2_sigma_ = 1.0;
  TrainingSummary summary_;
  std::vector<char> allowed_;
  std::vector<char> allowed_start_;
};

/// log of the sum of exp(score) over all (permitted) label sequences.
double log_partition(const CrfModel& model, const Sentence& sentence);

/// Per-position label marginals, row-major (tokens x labels).
std::vector<double> label_marginals(const CrfModel& model,
                                    const Sentence& sentence);

std::vector<std::string> viterbi_decode(const CrfModel& model,
                                        const Sentence& sentence);

/// Decodes every sentence (in parallel unless `parallel` is false).
std::vector<std::vector<std::string>> tag_corpus(const CrfModel& model,
                                                 const LabeledCorpus& corpus,
                                                 bool parallel = true);

struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Sum of conditional log-likelihoods minus |w|^2 / (2 sigma^2), and its
/// gradient, at the model's current weights.
ObjectiveValue objective_and_gradient(const CrfModel& model,
                                      std::span<const Sentence> sentences,
                                      double l2_sigma, bool parallel = true);

/// Builds the attribute index from the training data and fits the weights
/// with L-BFGS. The corpus must be in BIO2.
CrfModel train_crf(const LabeledCorpus& corpus, const FeatureConfig& features,
                   const TrainConfig& train, const ClusterSet& clusters);

}  // namespace nerclust
