#include <omp.h>

#include "nerclust/kernels.hpp"

namespace nerclust::kernels {
namespace {

double insertion_gain(const InsertionProblem& p, int b) {
  const std::size_t k = std::size_t(p.k);
  const std::int64_t* row = p.bigram.data() + std::size_t(b) * k;
  double s = 0.0;
  for (int c : p.out_nz) {
    if (c == b) continue;
    const std::int64_t n = row[c];
    s += xlog2x(n + p.out_dense[c]) - xlog2x(n);
  }
  for (int c : p.in_nz) {
    if (c == b) continue;
    const std::int64_t n = p.bigram[std::size_t(c) * k + std::size_t(b)];
    s += xlog2x(n + p.in_dense[c]) - xlog2x(n);
  }
  const std::int64_t diag = row[b];
  s += xlog2x(diag + p.out_dense[b] + p.in_dense[b] + p.self_loop) -
       xlog2x(diag);
  const std::int64_t l = p.left_marginal[b];
  const std::int64_t r = p.right_marginal[b];
  s -= xlog2x(l + p.word_left) - xlog2x(l);
  s -= xlog2x(r + p.word_right) - xlog2x(r);
  double gain = s * p.bigram_scale;
  if (!p.suffix_row.empty()) {
    const std::int64_t m = p.suffix_column[b];
    const std::int64_t row_total = p.suffix_row[b];
    const double t = (xlog2x(m + p.word_count) - xlog2x(m)) -
                     (xlog2x(row_total + p.word_count) - xlog2x(row_total));
    gain += t * p.suffix_scale;
  }
  return gain;
}

}  // namespace

void insertion_gains_serial(const InsertionProblem& p,
                            std::span<double> gains) {
  for (int b = 0; b < p.k; ++b) gains[b] = insertion_gain(p, b);
}

void insertion_gains_omp(const InsertionProblem& p, std::span<double> gains) {
  const long work = long(p.k) * long(p.out_nz.size() + p.in_nz.size() + 4);
#pragma omp parallel for schedule(static) if (work > 4096)
  for (int b = 0; b < p.k; ++b) gains[b] = insertion_gain(p, b);
}

}  // namespace nerclust::kernels
