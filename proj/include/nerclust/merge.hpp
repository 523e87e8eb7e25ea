#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nerclust/clustering.hpp"

namespace nerclust {

struct ImportedWord {
  std::string word;
  std::string source_language;
  int source_cluster = 0;
  int target_cluster = 0;
  std::size_t overlap = 0;
};

struct MergeReport {
  std::vector<ImportedWord> imported;         // in processing order
  std::map<std::string, std::string> skipped;  // word -> reason
  std::map<std::string, std::size_t> per_source_counts;
};

struct OverlapMatch {
  int target_cluster = 0;
  std::size_t overlap = 0;
};

/// Target cluster sharing the most word types with the source cluster of
/// `word`; ties go to the lower cluster id. Empty when no cluster overlaps.
/// Throws DataError when `word` is not in `source`.
std::optional<OverlapMatch> best_target_cluster(std::string_view word,
                                                const Clustering& source,
                                                const Clustering& target);

/// Keeps every target word in its cluster and imports source words that
/// the target lacks, processing sources in order (first source wins).
/// Overlaps are measured against the original target members.
std::pair<Clustering, MergeReport> merge_clusterings(
    const Clustering& target, const std::vector<Clustering>& sources);

/// `word<TAB>source_lang<TAB>source_cid<TAB>target_cid<TAB>overlap`
void write_merge_report(const MergeReport& report, std::ostream& out);

}  // namespace nerclust
