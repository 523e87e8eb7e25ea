#include "nerclust/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <numeric>

#include "nerclust/error.hpp"

namespace nerclust {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_finite(double v, std::span<const double> g) {
  if (!std::isfinite(v)) throw NumericalError("objective is not finite");
  for (double x : g)
    if (!std::isfinite(x)) throw NumericalError("gradient is not finite");
}

struct Pair {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double>& x,
                           const LbfgsOptions& options) {
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 40;
  const std::size_t n = x.size();

  LbfgsResult result;
  std::vector<double> g(n), d(n), x_new(n), g_new(n), alpha(options.history);
  double fx = f(x, g);
  check_finite(fx, g);
  result.value = fx;
  std::deque<Pair> mem;

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    if (std::sqrt(dot(g, g)) < 1e-12) {
      result.converged = true;
      break;
    }
    // Two-loop recursion: d = -H g.
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    for (std::size_t m = mem.size(); m-- > 0;) {
      alpha[m] = mem[m].rho * dot(mem[m].s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[m] * mem[m].y[i];
    }
    if (!mem.empty()) {
      const auto& last = mem.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& v : d) v *= gamma;
    }
    for (std::size_t m = 0; m < mem.size(); ++m) {
      const double beta = mem[m].rho * dot(mem[m].y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[m] - beta) * mem[m].s[i];
    }
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      mem.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = dot(g, d);
    }

    double step = mem.empty() ? 1.0 / std::max(1.0, std::sqrt(dot(g, g))) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + kArmijo * step * slope &&
          f_new < fx) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No decrease along a descent direction: at numerical precision.
      result.converged = true;
      break;
    }
    check_finite(f_new, g_new);

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - x[i];
      p.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-16) {
      p.rho = 1.0 / sy;
      if (mem.size() == options.history) mem.pop_front();
      mem.push_back(std::move(p));
    }

    const double f_prev = fx;
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    result.iterations = iter + 1;
    result.values.push_back(fx);
    if (std::abs(f_prev - fx) / std::max(1.0, std::abs(fx)) <
        options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.value = fx;
  return result;
}

}  // namespace nerclust
