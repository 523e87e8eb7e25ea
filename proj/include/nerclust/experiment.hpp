#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nerclust/corpus.hpp"
#include "nerclust/crf.hpp"
#include "nerclust/eval.hpp"
#include "nerclust/features.hpp"

namespace nerclust {

/// Routes a flat `key=value` setting to the feature or the training
/// configuration. Throws UsageError for unknown keys.
void apply_setting(std::string_view key, std::string_view value,
                   FeatureConfig& features, TrainConfig& train);

/// Splits "id=path" arguments.
std::pair<std::string, std::string> split_assignment(std::string_view text);

/// Loads a cluster file; the clustering's language defaults to `id` when
/// the file carries no #lang line.
Clustering load_clustering(const std::filesystem::path& path,
                           const std::string& id);

LabeledCorpus load_labeled(const std::filesystem::path& path,
                           const ColumnSpec& columns, TagScheme scheme);

struct ExperimentSpec {
  struct Source {
    std::string id;
    std::filesystem::path path;
  };
  struct Merge {
    std::string id;
    std::string target;
    std::vector<std::string> sources;
  };

  std::string name = "NER";
  std::filesystem::path train;
  std::filesystem::path test;
  ColumnSpec train_columns = ColumnSpec::conll2003();
  ColumnSpec test_columns = ColumnSpec::conll2003();
  TagScheme scheme = TagScheme::BIO2;
  std::vector<Source> clusterings;
  std::vector<Merge> merges;
  FeatureConfig features;
  TrainConfig training;
  McNemarUnit unit = McNemarUnit::Token;
  std::size_t oov_top = 20;
  std::filesystem::path output;

  /// Flat `key = value` lines, `#` comments, repeated `clusters` and
  /// `merge` keys. Relative paths resolve against `base`.
  static ExperimentSpec parse(std::istream& in,
                              const std::filesystem::path& base);
  static ExperimentSpec load(const std::filesystem::path& file);
  void validate() const;
};

struct SystemResult {
  std::string id;  // "baseline" or a clustering id
  EvalReport report;
  std::optional<McNemarResult> versus_baseline;
  LabelSequences predictions;
};

struct ExperimentResult {
  std::vector<SystemResult> systems;  // baseline first
  std::vector<OovEntry> oov;
};

/// Trains the baseline and one model per clustering (and merged
/// clustering), evaluates each on the test set and writes grid.tsv,
/// significance.tsv, delta.tsv, oov.tsv plus per-system models,
/// predictions and reports under `spec.output`.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// F1 grid with significance stars: ** for p < 0.01, * for p < 0.05.
void write_grid(const ExperimentSpec& spec, const ExperimentResult& result,
                std::ostream& out);
void write_delta_table(const ExperimentResult& result, std::ostream& out);
void write_oov_table(const std::vector<OovEntry>& oov, std::size_t top,
                     std::ostream& out);

}  // namespace nerclust
