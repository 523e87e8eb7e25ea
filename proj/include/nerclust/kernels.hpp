#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; both produce bit-identical results for any thread count
// unless noted otherwise.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nerclust::kernels {

/// x * log2(x) with 0 log 0 = 0.
inline double xlog2x(std::int64_t x) {
  return x > 0 ? double(x) * std::log2(double(x)) : 0.0;
}

/// Inputs for scoring the insertion of one (already removed) word into each
/// cluster under the class-bigram objective.
struct InsertionProblem {
  int k = 0;
  std::span<const std::int64_t> bigram;  // k*k, word already removed
  std::span<const std::int64_t> left_marginal;
  std::span<const std::int64_t> right_marginal;
  std::span<const std::int64_t> out_dense;  // word -> cluster counts
  std::span<const std::int64_t> in_dense;   // cluster -> word counts
  std::span<const int> out_nz;
  std::span<const int> in_nz;
  std::int64_t self_loop = 0;
  std::int64_t word_left = 0;   // row sum of the word incl. self loop
  std::int64_t word_right = 0;  // column sum of the word incl. self loop
  double bigram_scale = 1.0;    // 1 / total bigrams

  // Optional cluster/suffix term (empty spans disable it).
  std::span<const std::int64_t> suffix_column;  // table[c, word's suffix]
  std::span<const std::int64_t> suffix_row;
  std::int64_t word_count = 0;
  double suffix_scale = 0.0;
};

/// gains[b] = objective change (bits) of inserting the word into cluster b.
void insertion_gains_serial(const InsertionProblem& p, std::span<double> gains);
void insertion_gains_omp(const InsertionProblem& p, std::span<double> gains);

// ---------------------------------------------------------------------------
// Linear-chain CRF

/// Sentences flattened into token-major arrays of active attribute ids.
struct ChainData {
  std::size_t num_labels = 0;
  std::size_t num_attributes = 0;
  std::vector<std::size_t> sentence_start{0};  // n + 1 token offsets
  std::vector<std::size_t> attr_start{0};      // tokens + 1 offsets
  std::vector<std::uint32_t> attrs;
  std::vector<int> gold;  // per token; empty when decoding

  // Attribute -> tokens where it fires (ascending), for the parallel
  // gradient reduction.
  std::vector<std::size_t> occ_start;
  std::vector<std::uint32_t> occ_tokens;
  // Gold feature counts in weight layout.
  std::vector<double> empirical;

  std::size_t sentences() const { return sentence_start.size() - 1; }
  std::size_t tokens() const { return attr_start.size() - 1; }

  void add_sentence(const std::vector<std::vector<std::uint32_t>>& token_attrs,
                    const std::vector<int>* gold_labels);
  /// Builds occurrence lists and empirical counts; call after the last
  /// add_sentence.
  void finalize();
};

/// Weights are laid out as emissions [attr * L + label], then transitions
/// [prev * L + cur], then start scores [label].
inline std::size_t chain_weight_count(std::size_t labels, std::size_t attrs) {
  return attrs * labels + labels * labels + labels;
}

struct ChainParams {
  std::size_t num_labels = 0;
  std::size_t num_attributes = 0;
  std::span<const double> weights;
  std::span<const char> allowed;        // L*L; empty means all allowed
  std::span<const char> allowed_start;  // L; empty means all allowed

  std::size_t transition_offset() const { return num_attributes * num_labels; }
  std::size_t start_offset() const {
    return transition_offset() + num_labels * num_labels;
  }
  double transition(std::size_t prev, std::size_t cur) const;
  double start(std::size_t label) const;
};

/// Sum over sentences of gold score minus log partition. `gradient` receives
/// empirical minus expected feature counts (no regularization). The serial
/// version accumulates sentence by sentence; the OpenMP version reduces in a
/// fixed order, so its result does not depend on the thread count but may
/// differ from the serial one in the last bits.
double chain_loglik_serial(const ChainData& data, const ChainParams& params,
                           std::span<double> gradient);
double chain_loglik_omp(const ChainData& data, const ChainParams& params,
                        std::span<double> gradient);

/// Log partition of one sentence by the forward algorithm.
double chain_log_partition(const ChainData& data, const ChainParams& params,
                           std::size_t sentence);

/// Per-token label marginals (tokens x L) of one sentence.
std::vector<double> chain_marginals(const ChainData& data,
                                    const ChainParams& params,
                                    std::size_t sentence);

/// Viterbi labels for every token. Among equal-scoring paths the
/// lexicographically smallest wins (lowest label, earliest position first).
void chain_decode_serial(const ChainData& data, const ChainParams& params,
                         std::span<int> labels);
void chain_decode_omp(const ChainData& data, const ChainParams& params,
                      std::span<int> labels);

}  // namespace nerclust::kernels
