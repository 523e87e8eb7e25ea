#include "nerclust/clustering.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "nerclust/error.hpp"
#include "nerclust/kernels.hpp"

namespace nerclust {
namespace {

// Moves must improve the objective by more than this many bits; rounding
// noise in the gain differences is orders of magnitude smaller.
constexpr double kMinGain = 1e-12;

std::string_view utf8_suffix(std::string_view word, std::size_t chars) {
  std::size_t pos = word.size();
  std::size_t seen = 0;
  while (pos > 0 && seen < chars) {
    --pos;
    while (pos > 0 && (static_cast<unsigned char>(word[pos]) & 0xC0) == 0x80)
      --pos;
    ++seen;
  }
  return word.substr(pos);
}

template <typename T>
T parse_number(std::string_view text, std::size_t line_no,
               std::string_view what) {
  T value{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || p != text.data() + text.size())
    throw DataError("line " + std::to_string(line_no) + ": bad " +
                    std::string(what) + " '" + std::string(text) + "'");
  return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Clustering

Clustering::Clustering(std::string language, int k)
    : language_(std::move(language)), k_(k) {
  if (k < 2) throw UsageError("cluster count must be at least 2");
}

void Clustering::add(std::string word, int cluster, std::uint64_t count) {
  if (cluster < 0 || cluster >= k_)
    throw DataError("cluster id " + std::to_string(cluster) + " for '" + word +
                    "' is outside [0, " + std::to_string(k_) + ")");
  auto [it, inserted] = index_.emplace(word, words_.size());
  if (!inserted) throw DataError("duplicate word '" + word + "'");
  words_.push_back(std::move(word));
  clusters_.push_back(cluster);
  counts_.push_back(count);
}

void Clustering::reassign(std::size_t index, int cluster) {
  if (cluster < 0 || cluster >= k_)
    throw DataError("cluster id " + std::to_string(cluster) + " out of range");
  clusters_.at(index) = cluster;
}

std::optional<std::size_t> Clustering::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Clustering::cluster_of(std::string_view word) const {
  if (auto i = find(word)) return clusters_[*i];
  return std::nullopt;
}

std::vector<std::size_t> Clustering::write_order() const {
  std::vector<std::size_t> order(words_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (clusters_[a] != clusters_[b]) return clusters_[a] < clusters_[b];
    if (counts_[a] != counts_[b]) return counts_[a] > counts_[b];
    return words_[a] < words_[b];
  });
  return order;
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k_));
  for (std::size_t i : write_order()) out[clusters_[i]].push_back(i);
  return out;
}

bool Clustering::same_assignment(const Clustering& other) const {
  if (k_ != other.k_ || words_.size() != other.words_.size()) return false;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    auto j = other.find(words_[i]);
    if (!j || other.clusters_[*j] != clusters_[i] ||
        other.counts_[*j] != counts_[i])
      return false;
  }
  return true;
}

void write_clusters(const Clustering& clustering, std::ostream& out) {
  out << "#K=" << clustering.k() << '\n';
  if (!clustering.language().empty())
    out << "#lang=" << clustering.language() << '\n';
  for (std::size_t i : clustering.write_order())
    out << clustering.cluster(i) << '\t' << clustering.word(i) << '\t'
        << clustering.count(i) << '\n';
}

Clustering read_clusters(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("empty cluster file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("#K=", 0) != 0)
    throw DataError("line 1: cluster file must start with #K=<int>");
  const int k = parse_number<int>(std::string_view(line).substr(3), 1, "K");
  if (k < 2) throw DataError("line 1: K must be at least 2");
  Clustering c("", k);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("#lang=", 0) == 0) c.set_language(line.substr(6));
      continue;
    }
    std::string_view v(line);
    auto t1 = v.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : v.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || v.find('\t', t2 + 1) != v.npos)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected cluster_id<TAB>word<TAB>count");
    const int cid = parse_number<int>(v.substr(0, t1), line_no, "cluster id");
    std::string word(v.substr(t1 + 1, t2 - t1 - 1));
    if (word.empty())
      throw DataError("line " + std::to_string(line_no) + ": empty word");
    const auto count =
        parse_number<std::uint64_t>(v.substr(t2 + 1), line_no, "count");
    if (cid < 0 || cid >= k)
      throw DataError("line " + std::to_string(line_no) + ": cluster id " +
                      std::to_string(cid) + " not below K=" +
                      std::to_string(k));
    if (c.contains(word))
      throw DataError("line " + std::to_string(line_no) +
                      ": duplicate word '" + word + "'");
    c.add(std::move(word), cid, count);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Statistics and objective

ClusterStats ClusterStats::compute(const Vocabulary& vocab,
                                   std::span<const int> assign, int k) {
  if (assign.size() != vocab.size())
    throw DataError("assignment does not cover the vocabulary");
  ClusterStats s;
  s.k = k;
  s.cluster_bigram.assign(std::size_t(k) * std::size_t(k), 0);
  s.left_marginal.assign(std::size_t(k), 0);
  s.right_marginal.assign(std::size_t(k), 0);
  for (const Bigram& b : vocab.bigrams()) {
    const int l = assign[b.left];
    const int r = assign[b.right];
    const auto n = std::int64_t(b.count);
    s.at(l, r) += n;
    s.left_marginal[l] += n;
    s.right_marginal[r] += n;
    s.total_bigrams += n;
  }
  return s;
}

double ami(const ClusterStats& stats) {
  const int k = stats.k;
  if (stats.total_bigrams <= 0) throw DataError("no bigrams");
  std::vector<std::int64_t> rows(std::size_t(k), 0), cols(std::size_t(k), 0);
  std::int64_t total = 0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      const std::int64_t n = stats.at(a, b);
      if (n < 0) throw DataError("negative cluster bigram count");
      rows[a] += n;
      cols[b] += n;
      total += n;
    }
  if (rows != stats.left_marginal || cols != stats.right_marginal ||
      total != stats.total_bigrams)
    throw DataError("cluster bigram marginals are inconsistent");
  const double n_total = double(total);
  double sum = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      const std::int64_t n = stats.at(a, b);
      if (n == 0) continue;
      const double p = double(n) / n_total;
      sum += p * std::log2(double(n) * n_total /
                           (double(rows[a]) * double(cols[b])));
    }
  return sum;
}

std::vector<int> init_assignment(const Vocabulary& vocab, int k) {
  if (k < 2) throw UsageError("cluster count must be at least 2");
  if (vocab.size() < std::size_t(k))
    throw DataError("vocabulary has " + std::to_string(vocab.size()) +
                    " words, fewer than K=" + std::to_string(k));
  std::vector<int> assign(vocab.size(), k - 1);
  for (int i = 0; i < k - 1; ++i) assign[std::size_t(i)] = i;
  return assign;
}

Clustering clustering_from_assignment(const Vocabulary& vocab,
                                      std::span<const int> assign, int k,
                                      std::string language) {
  Clustering c(std::move(language), k);
  for (std::size_t i = 0; i < vocab.size(); ++i)
    c.add(vocab.entry(i).word, assign[i], vocab.entry(i).count);
  return c;
}

Clustering init_clustering(const Vocabulary& vocab, int k, std::uint64_t) {
  return clustering_from_assignment(vocab, init_assignment(vocab, k), k, "");
}

// ---------------------------------------------------------------------------
// Exchange algorithm

ExchangeClusterer::ExchangeClusterer(const Vocabulary& vocab,
                                     std::vector<int> assign, int k,
                                     ExchangeOptions options)
    : vocab_(&vocab), k_(k), options_(options), assign_(std::move(assign)) {
  const std::size_t v = vocab.size();
  if (assign_.size() != v)
    throw DataError("assignment does not cover the vocabulary");
  cluster_size_.assign(std::size_t(k), 0);
  for (int c : assign_) {
    if (c < 0 || c >= k) throw DataError("cluster id out of range");
    ++cluster_size_[c];
  }
  stats_ = ClusterStats::compute(vocab, assign_, k);

  successors_.resize(v);
  predecessors_.resize(v);
  self_loops_.assign(v, 0);
  left_count_.assign(v, 0);
  right_count_.assign(v, 0);
  for (const Bigram& b : vocab.bigrams()) {
    const auto n = std::int64_t(b.count);
    left_count_[b.left] += n;
    right_count_[b.right] += n;
    if (b.left == b.right) {
      self_loops_[b.left] += n;
    } else {
      successors_[b.left].push_back({b.right, n});
      predecessors_[b.right].push_back({b.left, n});
    }
  }

  if (options_.suffix_context) {
    std::unordered_map<std::string, std::uint32_t> ids;
    suffix_of_.resize(v);
    for (std::size_t w = 0; w < v; ++w) {
      std::string suffix(
          utf8_suffix(vocab.entry(w).word, options_.suffix_length));
      auto [it, _] = ids.emplace(suffix, std::uint32_t(ids.size()));
      suffix_of_[w] = it->second;
    }
    suffix_types_ = ids.size();
    suffix_table_.assign(std::size_t(k) * suffix_types_, 0);
    suffix_row_.assign(std::size_t(k), 0);
    suffix_col_.assign(std::size_t(k), 0);
    for (std::size_t w = 0; w < v; ++w) {
      const auto n = std::int64_t(vocab.entry(w).count);
      suffix_table_[std::size_t(assign_[w]) * suffix_types_ + suffix_of_[w]] +=
          n;
      suffix_row_[assign_[w]] += n;
      suffix_total_ += n;
    }
  }

  out_dense_.assign(std::size_t(k), 0);
  in_dense_.assign(std::size_t(k), 0);
  gains_.assign(std::size_t(k), 0.0);
}

void ExchangeClusterer::gather(std::size_t word) {
  for (const Neighbor& n : successors_[word]) {
    const int c = assign_[n.word];
    if (out_dense_[c] == 0) out_nz_.push_back(c);
    out_dense_[c] += n.count;
  }
  for (const Neighbor& n : predecessors_[word]) {
    const int c = assign_[n.word];
    if (in_dense_[c] == 0) in_nz_.push_back(c);
    in_dense_[c] += n.count;
  }
}

void ExchangeClusterer::clear_gathered() {
  for (int c : out_nz_) out_dense_[c] = 0;
  for (int c : in_nz_) in_dense_[c] = 0;
  out_nz_.clear();
  in_nz_.clear();
}

void ExchangeClusterer::remove(std::size_t word) {
  const int a = assign_[word];
  for (int c : out_nz_) stats_.at(a, c) -= out_dense_[c];
  for (int c : in_nz_) stats_.at(c, a) -= in_dense_[c];
  stats_.at(a, a) -= self_loops_[word];
  stats_.left_marginal[a] -= left_count_[word];
  stats_.right_marginal[a] -= right_count_[word];
  if (options_.suffix_context) {
    const auto n = std::int64_t(vocab_->entry(word).count);
    suffix_table_[std::size_t(a) * suffix_types_ + suffix_of_[word]] -= n;
    suffix_row_[a] -= n;
  }
  --cluster_size_[a];
  assign_[word] = -1;
}

void ExchangeClusterer::insert(std::size_t word, int b) {
  for (int c : out_nz_) stats_.at(b, c) += out_dense_[c];
  for (int c : in_nz_) stats_.at(c, b) += in_dense_[c];
  stats_.at(b, b) += self_loops_[word];
  stats_.left_marginal[b] += left_count_[word];
  stats_.right_marginal[b] += right_count_[word];
  if (options_.suffix_context) {
    const auto n = std::int64_t(vocab_->entry(word).count);
    suffix_table_[std::size_t(b) * suffix_types_ + suffix_of_[word]] += n;
    suffix_row_[b] += n;
  }
  ++cluster_size_[b];
  assign_[word] = b;
}

void ExchangeClusterer::compute_gains(std::size_t word) {
  kernels::InsertionProblem p;
  p.k = k_;
  p.bigram = stats_.cluster_bigram;
  p.left_marginal = stats_.left_marginal;
  p.right_marginal = stats_.right_marginal;
  p.out_dense = out_dense_;
  p.in_dense = in_dense_;
  p.out_nz = out_nz_;
  p.in_nz = in_nz_;
  p.self_loop = self_loops_[word];
  p.word_left = left_count_[word];
  p.word_right = right_count_[word];
  p.bigram_scale =
      stats_.total_bigrams > 0 ? 1.0 / double(stats_.total_bigrams) : 0.0;
  if (options_.suffix_context && suffix_total_ > 0) {
    for (int c = 0; c < k_; ++c)
      suffix_col_[c] =
          suffix_table_[std::size_t(c) * suffix_types_ + suffix_of_[word]];
    p.suffix_column = suffix_col_;
    p.suffix_row = suffix_row_;
    p.word_count = std::int64_t(vocab_->entry(word).count);
    p.suffix_scale = 1.0 / double(suffix_total_);
  }
  if (options_.parallel)
    kernels::insertion_gains_omp(p, gains_);
  else
    kernels::insertion_gains_serial(p, gains_);
}

double ExchangeClusterer::move_delta(std::size_t word, int target) {
  const int a = assign_.at(word);
  if (target == a) return 0.0;
  gather(word);
  remove(word);
  compute_gains(word);
  const double d = gains_[target] - gains_[a];
  insert(word, a);
  clear_gathered();
  return d;
}

void ExchangeClusterer::apply_move(std::size_t word, int target) {
  if (target < 0 || target >= k_) throw DataError("cluster id out of range");
  gather(word);
  remove(word);
  insert(word, target);
  clear_gathered();
}

std::size_t ExchangeClusterer::run_pass() {
  std::size_t moves = 0;
  for (std::size_t w = 0; w < assign_.size(); ++w) {
    const int a = assign_[w];
    if (cluster_size_[a] <= 1) continue;  // never empty a cluster
    gather(w);
    remove(w);
    compute_gains(w);
    int best = -1;
    for (int b = 0; b < k_; ++b) {
      if (b == a) continue;
      if (best < 0 || gains_[b] > gains_[best]) best = b;
    }
    const double delta = gains_[best] - gains_[a];
    if (delta > kMinGain) {
      insert(w, best);
      ++moves;
      if (on_move) on_move(w, a, best, delta);
    } else {
      insert(w, a);
    }
    clear_gathered();
  }
  return moves;
}

double ExchangeClusterer::objective() const {
  double value = ami(stats_);
  if (options_.suffix_context && suffix_total_ > 0) {
    std::vector<std::int64_t> cols(suffix_types_, 0);
    for (std::size_t w = 0; w < suffix_of_.size(); ++w)
      cols[suffix_of_[w]] += std::int64_t(vocab_->entry(w).count);
    const double n = double(suffix_total_);
    for (int c = 0; c < k_; ++c)
      for (std::size_t s = 0; s < suffix_types_; ++s) {
        const std::int64_t m = suffix_table_[std::size_t(c) * suffix_types_ + s];
        if (m == 0) continue;
        value += double(m) / n *
                 std::log2(double(m) * n /
                           (double(suffix_row_[c]) * double(cols[s])));
      }
  }
  return value;
}

std::pair<Clustering, std::size_t> exchange_pass(const Clustering& clustering,
                                                 const Vocabulary& vocab,
                                                 ExchangeOptions options) {
  std::vector<int> assign(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    auto c = clustering.cluster_of(vocab.entry(i).word);
    if (!c)
      throw DataError("clustering lacks vocabulary word '" +
                      vocab.entry(i).word + "'");
    assign[i] = *c;
  }
  ExchangeClusterer ex(vocab, std::move(assign), clustering.k(), options);
  const std::size_t moves = ex.run_pass();
  return {clustering_from_assignment(vocab, ex.assignment(), clustering.k(),
                                     clustering.language()),
          moves};
}

Clustering train_clusters(const Vocabulary& vocab,
                          const ClusterTrainingConfig& config,
                          ClusterTrainingLog* log) {
  ExchangeClusterer ex(vocab, init_assignment(vocab, config.k), config.k,
                       config.exchange);
  if (log) {
    *log = {};
    log->objective_per_pass.push_back(ex.objective());
  }
  for (std::size_t pass = 0; pass < config.max_passes; ++pass) {
    const std::size_t moves = ex.run_pass();
    if (log) {
      log->objective_per_pass.push_back(ex.objective());
      log->moves_per_pass.push_back(moves);
    }
    if (moves == 0) break;
  }
  return clustering_from_assignment(vocab, ex.assignment(), config.k,
                                    config.language);
}

Clustering train_clusters(const PlainCorpus& sentences,
                          const ClusterTrainingConfig& config,
                          ClusterTrainingLog* log) {
  if (config.k < 2) throw UsageError("cluster count must be at least 2");
  Vocabulary vocab =
      build_vocabulary(sentences, config.min_count, config.boundary);
  return train_clusters(vocab, config, log);
}

}  // namespace nerclust
