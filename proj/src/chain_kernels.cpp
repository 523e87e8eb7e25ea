#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "nerclust/error.hpp"
#include "nerclust/kernels.hpp"

namespace nerclust::kernels {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const double* v, std::size_t n) {
  double m = kNegInf;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

// Scratch buffers for one sentence.
struct Lattice {
  std::size_t len = 0;
  std::vector<double> emit, alpha, beta, tmp;
  double log_z = 0.0;

  void emissions(const ChainData& d, const ChainParams& p, std::size_t s) {
    const std::size_t L = p.num_labels;
    const std::size_t first = d.sentence_start[s];
    len = d.sentence_start[s + 1] - first;
    emit.assign(len * L, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
      double* row = emit.data() + t * L;
      const std::size_t tok = first + t;
      for (std::size_t k = d.attr_start[tok]; k < d.attr_start[tok + 1]; ++k) {
        const double* w = p.weights.data() + std::size_t(d.attrs[k]) * L;
        for (std::size_t y = 0; y < L; ++y) row[y] += w[y];
      }
    }
  }

  void forward(const ChainParams& p) {
    const std::size_t L = p.num_labels;
    alpha.assign(len * L, kNegInf);
    tmp.resize(L);
    for (std::size_t y = 0; y < L; ++y) alpha[y] = p.start(y) + emit[y];
    for (std::size_t t = 1; t < len; ++t)
      for (std::size_t y = 0; y < L; ++y) {
        for (std::size_t q = 0; q < L; ++q)
          tmp[q] = alpha[(t - 1) * L + q] + p.transition(q, y);
        alpha[t * L + y] = log_sum_exp(tmp.data(), L) + emit[t * L + y];
      }
    log_z = log_sum_exp(alpha.data() + (len - 1) * L, L);
  }

  void backward(const ChainParams& p) {
    const std::size_t L = p.num_labels;
    beta.assign(len * L, 0.0);
    tmp.resize(L);
    for (std::size_t t = len - 1; t-- > 0;)
      for (std::size_t q = 0; q < L; ++q) {
        for (std::size_t y = 0; y < L; ++y)
          tmp[y] = p.transition(q, y) + emit[(t + 1) * L + y] +
                   beta[(t + 1) * L + y];
        beta[t * L + q] = log_sum_exp(tmp.data(), L);
      }
  }

  double node_marginal(std::size_t t, std::size_t y, std::size_t L) const {
    return std::exp(alpha[t * L + y] + beta[t * L + y] - log_z);
  }

  double edge_marginal(const ChainParams& p, std::size_t t, std::size_t q,
                       std::size_t y) const {
    const std::size_t L = p.num_labels;
    const double tr = p.transition(q, y);
    if (tr == kNegInf) return 0.0;
    return std::exp(alpha[(t - 1) * L + q] + tr + emit[t * L + y] +
                    beta[t * L + y] - log_z);
  }

  double gold_score(const ChainData& d, const ChainParams& p,
                    std::size_t s) const {
    const std::size_t L = p.num_labels;
    const int* g = d.gold.data() + d.sentence_start[s];
    double score = p.start(std::size_t(g[0]));
    for (std::size_t t = 0; t < len; ++t) {
      score += emit[t * L + std::size_t(g[t])];
      if (t > 0) score += p.transition(std::size_t(g[t - 1]), std::size_t(g[t]));
    }
    return score;
  }
};

// Max-sum over suffixes, then a greedy forward pass. Scanning labels in
// ascending order at each position with a strict comparison yields the
// lexicographically smallest optimal path (lowest label, earliest position
// first) whenever tied scores compare equal.
void decode_sentence(const ChainData& d, const ChainParams& p, std::size_t s,
                     Lattice& lat, std::span<int> out) {
  const std::size_t L = p.num_labels;
  lat.emissions(d, p, s);
  const std::size_t n = lat.len;
  auto& suffix = lat.beta;  // best score of positions t+1.. given label at t
  suffix.assign(n * L, 0.0);
  for (std::size_t t = n - 1; t-- > 0;)
    for (std::size_t q = 0; q < L; ++q) {
      double best = kNegInf;
      for (std::size_t y = 0; y < L; ++y)
        best = std::max(best, p.transition(q, y) + lat.emit[(t + 1) * L + y] +
                                  suffix[(t + 1) * L + y]);
      suffix[t * L + q] = best;
    }
  const std::size_t first = d.sentence_start[s];
  int prev = -1;
  for (std::size_t t = 0; t < n; ++t) {
    double best = kNegInf;
    int arg = 0;
    for (std::size_t y = 0; y < L; ++y) {
      const double in = prev < 0 ? p.start(y) : p.transition(std::size_t(prev), y);
      const double v = in + lat.emit[t * L + y] + suffix[t * L + y];
      if (v > best) {
        best = v;
        arg = int(y);
      }
    }
    out[first + t] = arg;
    prev = arg;
  }
}

}  // namespace

double ChainParams::transition(std::size_t prev, std::size_t cur) const {
  if (!allowed.empty() && !allowed[prev * num_labels + cur]) return kNegInf;
  return weights[transition_offset() + prev * num_labels + cur];
}

double ChainParams::start(std::size_t label) const {
  if (!allowed_start.empty() && !allowed_start[label]) return kNegInf;
  return weights[start_offset() + label];
}

void ChainData::add_sentence(
    const std::vector<std::vector<std::uint32_t>>& token_attrs,
    const std::vector<int>* gold_labels) {
  if (token_attrs.empty()) throw DataError("empty sentence");
  if (gold_labels && gold_labels->size() != token_attrs.size())
    throw DataError("gold label count does not match sentence length");
  for (const auto& a : token_attrs) {
    attrs.insert(attrs.end(), a.begin(), a.end());
    attr_start.push_back(attrs.size());
  }
  if (gold_labels) gold.insert(gold.end(), gold_labels->begin(), gold_labels->end());
  sentence_start.push_back(attr_start.size() - 1);
}

void ChainData::finalize() {
  const std::size_t A = num_attributes;
  const std::size_t L = num_labels;
  std::vector<std::size_t> counts(A, 0);
  for (std::uint32_t a : attrs) ++counts[a];
  occ_start.assign(A + 1, 0);
  for (std::size_t a = 0; a < A; ++a) occ_start[a + 1] = occ_start[a] + counts[a];
  occ_tokens.assign(attrs.size(), 0);
  std::vector<std::size_t> fill(occ_start.begin(), occ_start.end() - 1);
  for (std::size_t tok = 0; tok < tokens(); ++tok)
    for (std::size_t k = attr_start[tok]; k < attr_start[tok + 1]; ++k)
      occ_tokens[fill[attrs[k]]++] = std::uint32_t(tok);

  empirical.clear();
  if (gold.empty()) return;
  empirical.assign(chain_weight_count(L, A), 0.0);
  const std::size_t trans = A * L;
  const std::size_t start = trans + L * L;
  for (std::size_t s = 0; s < sentences(); ++s) {
    for (std::size_t tok = sentence_start[s]; tok < sentence_start[s + 1]; ++tok) {
      const auto y = std::size_t(gold[tok]);
      for (std::size_t k = attr_start[tok]; k < attr_start[tok + 1]; ++k)
        empirical[std::size_t(attrs[k]) * L + y] += 1.0;
      if (tok == sentence_start[s])
        empirical[start + y] += 1.0;
      else
        empirical[trans + std::size_t(gold[tok - 1]) * L + y] += 1.0;
    }
  }
}

double chain_loglik_serial(const ChainData& d, const ChainParams& p,
                           std::span<double> grad) {
  const std::size_t L = p.num_labels;
  const std::size_t trans = p.transition_offset();
  const std::size_t start = p.start_offset();
  std::fill(grad.begin(), grad.end(), 0.0);
  Lattice lat;
  std::vector<double> marg(L);
  double total = 0.0;
  for (std::size_t s = 0; s < d.sentences(); ++s) {
    lat.emissions(d, p, s);
    lat.forward(p);
    lat.backward(p);
    total += lat.gold_score(d, p, s) - lat.log_z;
    const std::size_t first = d.sentence_start[s];
    for (std::size_t t = 0; t < lat.len; ++t) {
      const std::size_t tok = first + t;
      const auto g = std::size_t(d.gold[tok]);
      for (std::size_t y = 0; y < L; ++y) marg[y] = lat.node_marginal(t, y, L);
      for (std::size_t k = d.attr_start[tok]; k < d.attr_start[tok + 1]; ++k) {
        double* row = grad.data() + std::size_t(d.attrs[k]) * L;
        row[g] += 1.0;
        for (std::size_t y = 0; y < L; ++y) row[y] -= marg[y];
      }
      if (t == 0) {
        grad[start + g] += 1.0;
        for (std::size_t y = 0; y < L; ++y) grad[start + y] -= marg[y];
      } else {
        grad[trans + std::size_t(d.gold[tok - 1]) * L + g] += 1.0;
        for (std::size_t q = 0; q < L; ++q)
          for (std::size_t y = 0; y < L; ++y)
            grad[trans + q * L + y] -= lat.edge_marginal(p, t, q, y);
      }
    }
  }
  return total;
}

double chain_loglik_omp(const ChainData& d, const ChainParams& p,
                        std::span<double> grad) {
  const std::size_t L = p.num_labels;
  const std::size_t n = d.sentences();
  const std::size_t trans = p.transition_offset();
  const std::size_t start = p.start_offset();

  std::vector<double> node(d.tokens() * L);
  std::vector<double> edge(n * L * L);
  std::vector<double> first_node(n * L);
  std::vector<double> loglik(n);

#pragma omp parallel
  {
    Lattice lat;
#pragma omp for schedule(dynamic, 8)
    for (std::size_t s = 0; s < n; ++s) {
      lat.emissions(d, p, s);
      lat.forward(p);
      lat.backward(p);
      loglik[s] = lat.gold_score(d, p, s) - lat.log_z;
      const std::size_t first = d.sentence_start[s];
      double* e = edge.data() + s * L * L;
      std::fill(e, e + L * L, 0.0);
      for (std::size_t t = 0; t < lat.len; ++t) {
        for (std::size_t y = 0; y < L; ++y)
          node[(first + t) * L + y] = lat.node_marginal(t, y, L);
        if (t > 0)
          for (std::size_t q = 0; q < L; ++q)
            for (std::size_t y = 0; y < L; ++y)
              e[q * L + y] += lat.edge_marginal(p, t, q, y);
      }
      for (std::size_t y = 0; y < L; ++y)
        first_node[s * L + y] = node[first * L + y];
    }
  }

  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) total += loglik[s];
  for (std::size_t i = trans; i < grad.size(); ++i) grad[i] = d.empirical[i];
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < L * L; ++i) grad[trans + i] -= edge[s * L * L + i];
    for (std::size_t y = 0; y < L; ++y) grad[start + y] -= first_node[s * L + y];
  }

  const auto A = std::ptrdiff_t(p.num_attributes);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t a = 0; a < A; ++a) {
    double* row = grad.data() + std::size_t(a) * L;
    const double* emp = d.empirical.data() + std::size_t(a) * L;
    for (std::size_t y = 0; y < L; ++y) row[y] = emp[y];
    for (std::size_t k = d.occ_start[a]; k < d.occ_start[a + 1]; ++k) {
      const double* m = node.data() + std::size_t(d.occ_tokens[k]) * L;
      for (std::size_t y = 0; y < L; ++y) row[y] -= m[y];
    }
  }
  return total;
}

double chain_log_partition(const ChainData& d, const ChainParams& p,
                           std::size_t sentence) {
  Lattice lat;
  lat.emissions(d, p, sentence);
  lat.forward(p);
  return lat.log_z;
}

std::vector<double> chain_marginals(const ChainData& d, const ChainParams& p,
                                    std::size_t sentence) {
  const std::size_t L = p.num_labels;
  Lattice lat;
  lat.emissions(d, p, sentence);
  lat.forward(p);
  lat.backward(p);
  std::vector<double> out(lat.len * L);
  for (std::size_t t = 0; t < lat.len; ++t)
    for (std::size_t y = 0; y < L; ++y) out[t * L + y] = lat.node_marginal(t, y, L);
  return out;
}

void chain_decode_serial(const ChainData& d, const ChainParams& p,
                         std::span<int> labels) {
  Lattice lat;
  for (std::size_t s = 0; s < d.sentences(); ++s)
    decode_sentence(d, p, s, lat, labels);
}

void chain_decode_omp(const ChainData& d, const ChainParams& p,
                      std::span<int> labels) {
  const auto n = std::ptrdiff_t(d.sentences());
#pragma omp parallel
  {
    Lattice lat;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t s = 0; s < n; ++s)
      decode_sentence(d, p, std::size_t(s), lat, labels);
  }
}

}  // namespace nerclust::kernels
