#include "nerclust/merge.hpp"

#include <ostream>

#include "nerclust/error.hpp"

namespace nerclust {
namespace {

std::optional<OverlapMatch> argmax_overlap(
    const std::vector<std::size_t>& source_members, const Clustering& source,
    const Clustering& target) {
  std::vector<std::size_t> overlap(std::size_t(target.k()), 0);
  for (std::size_t i : source_members)
    if (auto c = target.cluster_of(source.word(i))) ++overlap[*c];
  std::optional<OverlapMatch> best;
  for (int c = 0; c < target.k(); ++c) {
    if (overlap[c] == 0) continue;
    if (!best || overlap[c] > best->overlap) best = OverlapMatch{c, overlap[c]};
  }
  return best;
}

}  // namespace

std::optional<OverlapMatch> best_target_cluster(std::string_view word,
                                                const Clustering& source,
                                                const Clustering& target) {
  auto idx = source.find(word);
  if (!idx)
    throw DataError("word '" + std::string(word) +
                    "' is not in the source clustering");
  const int cid = source.cluster(*idx);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < source.size(); ++i)
    if (source.cluster(i) == cid) members.push_back(i);
  return argmax_overlap(members, source, target);
}

std::pair<Clustering, MergeReport> merge_clusterings(
    const Clustering& target, const std::vector<Clustering>& sources) {
  Clustering merged(target.language(), target.k());
  for (std::size_t i : target.write_order())
    merged.add(target.word(i), target.cluster(i), target.count(i));

  MergeReport report;
  for (const Clustering& source : sources) {
    // All words of one source cluster share the same overlap result.
    const auto members = source.members();
    std::vector<std::optional<OverlapMatch>> match(members.size());
    for (std::size_t c = 0; c < members.size(); ++c)
      match[c] = argmax_overlap(members[c], source, target);

    std::size_t& imported = report.per_source_counts[source.language()];
    for (std::size_t i : source.write_order()) {
      const std::string& w = source.word(i);
      if (merged.contains(w)) continue;
      const auto& m = match[source.cluster(i)];
      if (!m) {
        report.skipped.emplace(w, "no overlap with any target cluster (" +
                                      source.language() + ")");
        continue;
      }
      merged.add(w, m->target_cluster, source.count(i));
      report.skipped.erase(w);
      report.imported.push_back({w, source.language(), source.cluster(i),
                                 m->target_cluster, m->overlap});
      ++imported;
    }
  }
  return {std::move(merged), std::move(report)};
}

void write_merge_report(const MergeReport& report, std::ostream& out) {
  for (const auto& r : report.imported)
    out << r.word << '\t' << r.source_language << '\t' << r.source_cluster
        << '\t' << r.target_cluster << '\t' << r.overlap << '\n';
}

}  // namespace nerclust
