// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/diffcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace maple::diff {
namespace {

template <typename T>
T evaluate(const ScalarFn<T>& f, const std::vector<Tensor<T>>& inputs) {
  Graph<T> g;
  std::vector<Var<T>> vars;
  vars.reserve(inputs.size());
  for (const auto& in : inputs) vars.push_back(g.leaf(in, false));
  const auto out = f(g, vars);
  if (out.value().size() != 1) throw ContractError("gradient check needs a scalar function");
  return out.value()[0];
}

template <typename T>
std::vector<Tensor<T>> backward_gradients(const ScalarFn<T>& f, const std::vector<Tensor<T>>& inputs) {
  Graph<T> g;
  std::vector<Var<T>> vars;
  for (const auto& in : inputs) vars.push_back(g.leaf(in, true));
  const auto out = f(g, vars);
  g.backward(out);
  std::vector<Tensor<T>> grads;
  for (const auto& v : vars) grads.push_back(g.grad(v));
  return grads;
}

template <typename T>
void require_deterministic(const ScalarFn<T>& f, const std::vector<Tensor<T>>& inputs) {
  const T a = evaluate(f, inputs);
  const T b = evaluate(f, inputs);
  if (std::memcmp(&a, &b, sizeof(T)) != 0) {
    throw OracleError("function under gradient check is not deterministic");
  }
}

// Compares `analytic` with central differences of `f` around `inputs`.
template <typename T, typename A>
GradCheckReport compare(const ScalarFn<T>& f, std::vector<Tensor<T>> inputs,
                        const std::vector<Tensor<A>>& analytic, T step) {
  GradCheckReport report;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    for (std::size_t i = 0; i < inputs[t].size(); ++i) {
      const T saved = inputs[t][i];
      inputs[t][i] = saved + step;
      const T plus = evaluate(f, inputs);
      inputs[t][i] = saved - step;
      const T minus = evaluate(f, inputs);
      inputs[t][i] = saved;

      const double numeric = (static_cast<double>(plus) - static_cast<double>(minus)) /
                             (2.0 * static_cast<double>(step));
      const double exact = static_cast<double>(analytic[t][i]);
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      const double rel = std::abs(exact - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_rel_error || report.coordinates == 1) {
        report.max_rel_error = std::max(report.max_rel_error, rel);
        report.worst_input = t;
        report.worst_index = i;
        report.worst_analytic = exact;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace

template <typename T>
GradCheckReport finite_diff_check(const ScalarFn<T>& f, std::vector<Tensor<T>> inputs, T step) {
  if (!(step > T(0))) throw ParameterError("finite-difference step must be positive");
  const auto analytic = backward_gradients(f, inputs);
  require_deterministic(f, inputs);
  return compare(f, std::move(inputs), analytic, step);
}

GradCheckReport finite_diff_check_mixed(const ScalarFn<float>& f32, const ScalarFn<double>& f64,
                                        const std::vector<Tensor<float>>& inputs, double step) {
  if (!(step > 0.0)) throw ParameterError("finite-difference step must be positive");
  const auto analytic = backward_gradients(f32, inputs);
  require_deterministic(f32, inputs);
  std::vector<Tensor<double>> wide;
  for (const auto& in : inputs) wide.push_back(in.cast<double>());
  require_deterministic(f64, wide);
  return compare(f64, std::move(wide), analytic, step);
}

template <typename T>
double finite_diff_check(const std::function<Var<T>(Graph<T>&, Var<T>)>& f, const Tensor<T>& x,
                         T step) {
  ScalarFn<T> wrapped = [&f](Graph<T>& g, const std::vector<Var<T>>& vars) { return f(g, vars[0]); };
  return finite_diff_check<T>(wrapped, std::vector<Tensor<T>>{x}, step).max_rel_error;
}

template GradCheckReport finite_diff_check(const ScalarFn<float>&, std::vector<Tensor<float>>, float);
template GradCheckReport finite_diff_check(const ScalarFn<double>&, std::vector<Tensor<double>>, double);
template double finite_diff_check(const std::function<Var<float>(Graph<float>&, Var<float>)>&,
                                  const Tensor<float>&, float);
template double finite_diff_check(const std::function<Var<double>(Graph<double>&, Var<double>)>&,
                                  const Tensor<double>&, double);

}  // namespace maple::diff
