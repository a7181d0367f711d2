// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "maple/diffcore/graph.hpp"

namespace maple::diff {

/// Central-difference verification of reverse-mode gradients.
///
/// The function under test receives a fresh graph and one Var per input and
/// returns a scalar. For every coordinate of every input the analytic gradient
/// is compared with (f(x+h·e) − f(x−h·e)) / 2h; the relative error uses the
/// denominator max(|analytic|, |numeric|, 1e-8).
template <typename T>
using ScalarFn = std::function<Var<T>(Graph<T>&, const std::vector<Var<T>>&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Checks every coordinate of every input. Throws OracleError when two
/// evaluations at the same point disagree, ParameterError when step ≤ 0.
template <typename T>
GradCheckReport finite_diff_check(const ScalarFn<T>& f, std::vector<Tensor<T>> inputs, T step);

/// Checks the 32-bit backward pass of `f32` against central differences taken
/// on `f64`, the same function instantiated in 64-bit, at the identical point.
/// Central differences evaluated in 32-bit lose about eps·|f|/h absolute
/// accuracy, which swamps small gradient coordinates.
GradCheckReport finite_diff_check_mixed(const ScalarFn<float>& f32, const ScalarFn<double>& f64,
                                        const std::vector<Tensor<float>>& inputs, double step);

/// Single-input convenience form.
template <typename T>
double finite_diff_check(const std::function<Var<T>(Graph<T>&, Var<T>)>& f,
                         const Tensor<T>& x, T step);

}  // namespace maple::diff
