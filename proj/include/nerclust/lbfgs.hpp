#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nerclust {

struct LbfgsOptions {
  std::size_t history = 10;
  /// Stop when |f_prev - f| / max(1, |f|) falls below this.
  double tolerance = 1e-5;
  std::size_t max_iterations = 200;
};

struct LbfgsResult {
  std::size_t iterations = 0;
  double value = 0.0;
  bool converged = false;
  std::vector<double> values;  // objective after each accepted iteration
};

/// Returns f(x) and writes its gradient into the second argument.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

/// Limited-memory BFGS with a backtracking Armijo line search. Every
/// accepted step strictly decreases f. Throws NumericalError on non-finite
/// values.
LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double>& x,
                           const LbfgsOptions& options = {});

}  // namespace nerclust
