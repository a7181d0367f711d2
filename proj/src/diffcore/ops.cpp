// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/diffcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/Core>

namespace maple::diff {
namespace {

template <typename T>
void require_matrix(const Tensor<T>& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + " expects a matrix, got " + shape_string(t.shape()));
  }
}

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Map = Eigen::Map<RowMajor<T>>;
template <typename T>
using ConstMap = Eigen::Map<const RowMajor<T>>;

// C[m×n] += A[m×k]·B[k×n]
template <typename T>
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b, T* c) {
  Map<T>(c, m, n).noalias() += ConstMap<T>(a, m, k) * ConstMap<T>(b, k, n);
}

// C[m×k] += A[m×n]·B[k×n]ᵀ
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  Map<T>(c, m, k).noalias() += ConstMap<T>(a, m, n) * ConstMap<T>(b, k, n).transpose();
}

// C[k×n] += A[m×k]ᵀ·B[m×n]
template <typename T>
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b, T* c) {
  Map<T>(c, k, n).noalias() += ConstMap<T>(a, m, k).transpose() * ConstMap<T>(b, m, n);
}

template <typename T>
constexpr T kGeluScale = T(0.7978845608028654);  // sqrt(2/pi)
template <typename T>
constexpr T kGeluCubic = T(0.044715);

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.shape()[1] != bv.shape()[0]) {
    throw DimensionError("matmul shape mismatch: " + shape_string(av.shape()) + " x " +
                         shape_string(bv.shape()));
  }
  const std::size_t m = av.shape()[0], k = av.shape()[1], n = bv.shape()[1];
  Tensor<T> out({m, n});
  gemm_nn(m, k, n, av.data().data(), bv.data().data(), out.data().data());
  a.graph->add_macs(static_cast<std::uint64_t>(m) * k * n);
  return a.graph->record(std::move(out), {a, b}, [a, b, m, k, n](Graph<T>& g, std::span<const T> dc, const Tensor<T>&) {
    const T* adata = g.value(a).data().data();
    const T* bdata = g.value(b).data().data();
    if (g.requires_grad(a)) gemm_nt(m, n, k, dc.data(), bdata, g.grad_buffer(a).data());
    if (g.requires_grad(b)) gemm_tn(m, k, n, adata, dc.data(), g.grad_buffer(b).data());
  });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  const auto& av = a.value();
  require_matrix(av, "transpose");
  const std::size_t m = av.shape()[0], n = av.shape()[1];
  Tensor<T> out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return a.graph->record(std::move(out), {a}, [a, m, n](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
    auto ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += dy[j * m + i];
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.shape() != bv.shape()) {
    throw DimensionError("add shape mismatch: " + shape_string(av.shape()) + " vs " +
                         shape_string(bv.shape()));
  }
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  return a.graph->record(std::move(out), {a, b}, [a, b](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
    for (auto v : {a, b}) {
      if (!g.requires_grad(v)) continue;
      auto gv = g.grad_buffer(v);
      for (std::size_t i = 0; i < dy.size(); ++i) gv[i] += dy[i];
    }
  });
}

template <typename T>
Var<T> add_row(Var<T> a, Var<T> row) {
  const auto& av = a.value();
  const auto& rv = row.value();
  const std::size_t n = av.cols();
  if (rv.size() != n || av.rank() < 1) {
    throw DimensionError("add_row shape mismatch: " + shape_string(av.shape()) + " + row " +
                         shape_string(rv.shape()));
  }
  const std::size_t m = av.size() / n;
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] + rv[j];
  return a.graph->record(std::move(out), {a, row}, [a, row, m, n](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
    if (g.requires_grad(a)) {
      auto ga = g.grad_buffer(a);
      for (std::size_t i = 0; i < dy.size(); ++i) ga[i] += dy[i];
    }
    if (g.requires_grad(row)) {
      auto gr = g.grad_buffer(row);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gr[j] += dy[i * n + j];
    }
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.shape() != bv.shape()) {
    throw DimensionError("mul shape mismatch: " + shape_string(av.shape()) + " vs " +
                         shape_string(bv.shape()));
  }
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return a.graph->record(std::move(out), {a, b}, [a, b](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
    const auto& av = g.value(a);
    const auto& bv = g.value(b);
    if (g.requires_grad(a)) {
      auto ga = g.grad_buffer(a);
      for (std::size_t i = 0; i < dy.size(); ++i) ga[i] += dy[i] * bv[i];
    }
    if (g.requires_grad(b)) {
      auto gb = g.grad_buffer(b);
      for (std::size_t i = 0; i < dy.size(); ++i) gb[i] += dy[i] * av[i];
    }
  });
}

template <typename T>
Var<T> scale(Var<T> a, T factor) {
  const auto& av = a.value();
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * factor;
  return a.graph->record(std::move(out), {a}, [a, factor](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
    auto ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < dy.size(); ++i) ga[i] += dy[i] * factor;
  });
}

template <typename T>
Var<T> gelu(Var<T> a) {
  const auto& av = a.value();
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) {
    const T x = av[i];
    const T t = std::tanh(kGeluScale<T> * (x + kGeluCubic<T> * x * x * x));
    out[i] = T(0.5) * x * (T(1) + t);
  }
  return a.graph->record(std::move(out), {a}, [a](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
    const auto& av = g.value(a);
    auto ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      const T x = av[i];
      const T t = std::tanh(kGeluScale<T> * (x + kGeluCubic<T> * x * x * x));
      const T dt = (T(1) - t * t) * kGeluScale<T> * (T(1) + T(3) * kGeluCubic<T> * x * x);
      ga[i] += dy[i] * (T(0.5) * (T(1) + t) + T(0.5) * x * dt);
    }
  });
}

template <typename T>
Var<T> sum(Var<T> a) {
  const auto& av = a.value();
  T total = 0;
  for (auto v : av.data()) total += v;
  return a.graph->record(Tensor<T>::scalar(total), {a}, [a](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
    auto ga = g.grad_buffer(a);
    for (auto& v : ga) v += dy[0];
  });
}

template <typename T>
Var<T> mean(Var<T> a) {
  const T n = static_cast<T>(a.value().size());
  return scale(sum(a), T(1) / n);
}

template <typename T>
Var<T> embedding(Var<T> table, std::span<const std::uint32_t> ids) {
  const auto& tv = table.value();
  require_matrix(tv, "embedding");
  const std::size_t vocab = tv.shape()[0], d = tv.shape()[1];
  if (ids.empty()) throw DimensionError("embedding lookup with no ids");
  std::vector<std::uint32_t> idx(ids.begin(), ids.end());
  Tensor<T> out({idx.size(), d});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= vocab) {
      throw DimensionError("embedding id " + std::to_string(idx[r]) + " outside table of " +
                           std::to_string(vocab) + " rows");
    }
    std::copy_n(tv.data().data() + idx[r] * d, d, out.data().data() + r * d);
  }
  return table.graph->record(std::move(out), {table},
                             [table, idx = std::move(idx), d](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
                               auto gt = g.grad_buffer(table);
                               for (std::size_t r = 0; r < idx.size(); ++r)
                                 for (std::size_t j = 0; j < d; ++j) gt[idx[r] * d + j] += dy[r * d + j];
                             });
}

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows of nothing");
  const std::size_t d = parts.front().value().cols();
  std::size_t rows = 0;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    const auto& pv = p.value();
    if (pv.rank() > 2 || pv.cols() != d) {
      throw DimensionError("concat_rows width mismatch: " + shape_string(pv.shape()) +
                           " vs width " + std::to_string(d));
    }
    offsets.push_back(rows);
    rows += pv.rows();
  }
  Tensor<T> out({rows, d});
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& pv = parts[i].value();
    std::copy(pv.data().begin(), pv.data().end(), out.data().begin() + offsets[i] * d);
  }
  Graph<T>* g0 = parts.front().graph;
  return g0->record(std::move(out), parts,
                    [parts, offsets, d](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
                      for (std::size_t i = 0; i < parts.size(); ++i) {
                        if (!g.requires_grad(parts[i])) continue;
                        auto gp = g.grad_buffer(parts[i]);
                        const T* src = dy.data() + offsets[i] * d;
                        for (std::size_t j = 0; j < gp.size(); ++j) gp[j] += src[j];
                      }
                    });
}

template <typename T>
Var<T> slice_rows(Var<T> a, std::size_t begin, std::size_t end) {
  const auto& av = a.value();
  require_matrix(av, "slice_rows");
  const std::size_t rows = av.shape()[0], d = av.shape()[1];
  if (begin >= end || end > rows) {
    throw DimensionError("slice_rows [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") outside " + shape_string(av.shape()));
  }
  Tensor<T> out({end - begin, d});
  std::copy_n(av.data().data() + begin * d, (end - begin) * d, out.data().data());
  return a.graph->record(std::move(out), {a}, [a, begin, d](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
    auto ga = g.grad_buffer(a);
    for (std::size_t i = 0; i < dy.size(); ++i) ga[begin * d + i] += dy[i];
  });
}

template <typename T>
Var<T> layernorm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  const auto& xv = x.value();
  const std::size_t d = xv.cols();
  if (xv.empty() || d == 0) throw DimensionError("layernorm over an empty axis");
  if (gain.value().size() != d || bias.value().size() != d) {
    throw DimensionError("layernorm affine size mismatch: input " + shape_string(xv.shape()) +
                         ", gain " + shape_string(gain.value().shape()) + ", bias " +
                         shape_string(bias.value().shape()));
  }
  if (!(eps > T(0))) throw ParameterError("layernorm eps must be positive");
  const std::size_t rows = xv.size() / d;
  const auto& gv = gain.value();
  const auto& bv = bias.value();
  Tensor<T> out(xv.shape());
  auto xhat = std::make_shared<std::vector<T>>(xv.size());
  auto inv = std::make_shared<std::vector<T>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data().data() + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(d);
    const T is = T(1) / std::sqrt(var + eps);
    (*inv)[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (row[j] - mu) * is;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  return x.graph->record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, xhat, inv, rows, d](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
        const auto& gv = g.value(gain);
        if (g.requires_grad(gain)) {
          auto gg = g.grad_buffer(gain);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < d; ++j) gg[j] += dy[r * d + j] * (*xhat)[r * d + j];
        }
        if (g.requires_grad(bias)) {
          auto gb = g.grad_buffer(bias);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < d; ++j) gb[j] += dy[r * d + j];
        }
        if (g.requires_grad(x)) {
          auto gx = g.grad_buffer(x);
          for (std::size_t r = 0; r < rows; ++r) {
            T mean_dh = 0, mean_dh_h = 0;
            for (std::size_t j = 0; j < d; ++j) {
              const T dh = dy[r * d + j] * gv[j];
              mean_dh += dh;
              mean_dh_h += dh * (*xhat)[r * d + j];
            }
            mean_dh /= static_cast<T>(d);
            mean_dh_h /= static_cast<T>(d);
            for (std::size_t j = 0; j < d; ++j) {
              const T dh = dy[r * d + j] * gv[j];
              gx[r * d + j] += (*inv)[r] * (dh - mean_dh - (*xhat)[r * d + j] * mean_dh_h);
            }
          }
        }
      });
}

template <typename T>
Var<T> softmax(Var<T> x, T temperature) {
  if (!(temperature > T(0))) throw ParameterError("softmax temperature must be positive");
  const auto& xv = x.value();
  const std::size_t n = xv.cols();
  const std::size_t rows = xv.size() / n;
  Tensor<T> out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data().data() + r * n;
    T* o = out.data().data() + r * n;
    const T mx = *std::max_element(row, row + n);
    T z = 0;
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = std::exp((row[j] - mx) / temperature);
      z += o[j];
    }
    for (std::size_t j = 0; j < n; ++j) o[j] /= z;
  }
  return x.graph->record(std::move(out), {x},
                         [x, rows, n, temperature](Graph<T>& g, std::span<const T> dy, const Tensor<T>& yv) {
                           auto gx = g.grad_buffer(x);
                           for (std::size_t r = 0; r < rows; ++r) {
                             T dot = 0;
                             for (std::size_t j = 0; j < n; ++j) dot += dy[r * n + j] * yv[r * n + j];
                             for (std::size_t j = 0; j < n; ++j)
                               gx[r * n + j] += yv[r * n + j] * (dy[r * n + j] - dot) / temperature;
                           }
                         });
}

template <typename T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, std::size_t heads, bool causal) {
  const auto& qv = q.value();
  const auto& kv = k.value();
  const auto& vv = v.value();
  require_matrix(qv, "attention");
  if (kv.shape() != qv.shape() || vv.shape() != qv.shape()) {
    throw DimensionError("attention q/k/v shapes differ: " + shape_string(qv.shape()) + ", " +
                         shape_string(kv.shape()) + ", " + shape_string(vv.shape()));
  }
  const std::size_t tokens = qv.shape()[0], d = qv.shape()[1];
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("attention width " + std::to_string(d) + " not divisible into " +
                      std::to_string(heads) + " heads");
  }
  const std::size_t dh = d / heads;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  auto probs = std::make_shared<std::vector<T>>(heads * tokens * tokens, T(0));
  Tensor<T> out({tokens, d});
  for (std::size_t h = 0; h < heads; ++h) {
    T* p = probs->data() + h * tokens * tokens;
    for (std::size_t i = 0; i < tokens; ++i) {
      const T* qi = qv.data().data() + i * d + h * dh;
      const std::size_t last = causal ? i + 1 : tokens;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < last; ++j) {
        const T* kj = kv.data().data() + j * d + h * dh;
        T s = 0;
        for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
        s *= inv_sqrt;
        p[i * tokens + j] = s;
        mx = std::max(mx, s);
      }
      T z = 0;
      for (std::size_t j = 0; j < last; ++j) {
        p[i * tokens + j] = std::exp(p[i * tokens + j] - mx);
        z += p[i * tokens + j];
      }
      T* oi = out.data().data() + i * d + h * dh;
      for (std::size_t j = 0; j < last; ++j) {
        p[i * tokens + j] /= z;
        const T w = p[i * tokens + j];
        const T* vj = vv.data().data() + j * d + h * dh;
        for (std::size_t c = 0; c < dh; ++c) oi[c] += w * vj[c];
      }
    }
  }
  // Scores and weighted sum are each tokens²·d multiply-accumulates, counted
  // over the full square even under a causal mask.
  q.graph->add_macs(2ull * tokens * tokens * d);
  return q.graph->record(
      std::move(out), {q, k, v},
      [q, k, v, probs, heads, tokens, d, dh, inv_sqrt](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
        const auto& qv = g.value(q);
        const auto& kv = g.value(k);
        const auto& vv = g.value(v);
        const bool need_q = g.requires_grad(q), need_k = g.requires_grad(k),
                   need_v = g.requires_grad(v);
        std::span<T> gq, gk, gv;
        if (need_q) gq = g.grad_buffer(q);
        if (need_k) gk = g.grad_buffer(k);
        if (need_v) gv = g.grad_buffer(v);
        std::vector<T> dp(tokens);
        for (std::size_t h = 0; h < heads; ++h) {
          const T* p = probs->data() + h * tokens * tokens;
          for (std::size_t i = 0; i < tokens; ++i) {
            const T* dyi = dy.data() + i * d + h * dh;
            T dot = 0;
            for (std::size_t j = 0; j < tokens; ++j) {
              const T w = p[i * tokens + j];
              if (w == T(0)) {
                dp[j] = 0;
                continue;
              }
              const T* vj = vv.data().data() + j * d + h * dh;
              T s = 0;
              for (std::size_t c = 0; c < dh; ++c) s += dyi[c] * vj[c];
              dp[j] = s;
              dot += s * w;
              if (need_v) {
                T* gvj = gv.data() + j * d + h * dh;
                for (std::size_t c = 0; c < dh; ++c) gvj[c] += w * dyi[c];
              }
            }
            if (!need_q && !need_k) continue;
            const T* qi = qv.data().data() + i * d + h * dh;
            for (std::size_t j = 0; j < tokens; ++j) {
              const T w = p[i * tokens + j];
              if (w == T(0)) continue;
              const T ds = w * (dp[j] - dot) * inv_sqrt;
              const T* kj = kv.data().data() + j * d + h * dh;
              if (need_q) {
                T* gqi = gq.data() + i * d + h * dh;
                for (std::size_t c = 0; c < dh; ++c) gqi[c] += ds * kj[c];
              }
              if (need_k) {
                T* gkj = gk.data() + j * d + h * dh;
                for (std::size_t c = 0; c < dh; ++c) gkj[c] += ds * qi[c];
              }
            }
          }
        }
      });
}

template <typename T>
Var<T> l2_normalize(Var<T> x, T eps) {
  const auto& xv = x.value();
  const std::size_t n = xv.cols();
  const std::size_t rows = xv.size() / n;
  Tensor<T> out(xv.shape());
  auto norms = std::make_shared<std::vector<T>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    T ss = 0;
    for (std::size_t j = 0; j < n; ++j) ss += xv[r * n + j] * xv[r * n + j];
    const T norm = std::max(std::sqrt(ss), eps);
    (*norms)[r] = norm;
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = xv[r * n + j] / norm;
  }
  return x.graph->record(std::move(out), {x}, [x, norms, rows, n](Graph<T>& g, std::span<const T> dy, const Tensor<T>& yv) {
    auto gx = g.grad_buffer(x);
    for (std::size_t r = 0; r < rows; ++r) {
      T dot = 0;
      for (std::size_t j = 0; j < n; ++j) dot += yv[r * n + j] * dy[r * n + j];
      for (std::size_t j = 0; j < n; ++j)
        gx[r * n + j] += (dy[r * n + j] - yv[r * n + j] * dot) / (*norms)[r];
    }
  });
}

template <typename T>
Var<T> cross_entropy(Var<T> logits, std::span<const std::uint32_t> labels) {
  const auto& lv = logits.value();
  require_matrix(lv, "cross_entropy");
  const std::size_t batch = lv.shape()[0], classes = lv.shape()[1];
  if (labels.size() != batch) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(batch) + " rows");
  }
  auto probs = std::make_shared<std::vector<T>>(lv.size());
  std::vector<std::uint32_t> lab(labels.begin(), labels.end());
  T total = 0;
  for (std::size_t r = 0; r < batch; ++r) {
    if (lab[r] >= classes) throw DimensionError("cross_entropy label outside class range");
    const T* row = lv.data().data() + r * classes;
    const T mx = *std::max_element(row, row + classes);
    T z = 0;
    for (std::size_t j = 0; j < classes; ++j) {
      (*probs)[r * classes + j] = std::exp(row[j] - mx);
      z += (*probs)[r * classes + j];
    }
    for (std::size_t j = 0; j < classes; ++j) (*probs)[r * classes + j] /= z;
    total += std::log(z) + mx - row[lab[r]];
  }
  total /= static_cast<T>(batch);
  return logits.graph->record(
      Tensor<T>::scalar(total), {logits},
      [logits, probs, lab = std::move(lab), batch, classes](Graph<T>& g, std::span<const T> dy, const Tensor<T>&) {
        auto gl = g.grad_buffer(logits);
        const T s = dy[0] / static_cast<T>(batch);
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t j = 0; j < classes; ++j) {
            const T target = j == lab[r] ? T(1) : T(0);
            gl[r * classes + j] += s * ((*probs)[r * classes + j] - target);
          }
      });
}

#define MAPLE_INSTANTIATE_OPS(T)                                                        \
  template Var<T> matmul(Var<T>, Var<T>);                                               \
  template Var<T> transpose(Var<T>);                                                    \
  template Var<T> add(Var<T>, Var<T>);                                                  \
  template Var<T> add_row(Var<T>, Var<T>);                                              \
  template Var<T> mul(Var<T>, Var<T>);                                                  \
  template Var<T> scale(Var<T>, T);                                                     \
  template Var<T> gelu(Var<T>);                                                         \
  template Var<T> sum(Var<T>);                                                          \
  template Var<T> mean(Var<T>);                                                         \
  template Var<T> embedding(Var<T>, std::span<const std::uint32_t>);                    \
  template Var<T> concat_rows(const std::vector<Var<T>>&);                              \
  template Var<T> slice_rows(Var<T>, std::size_t, std::size_t);                         \
  template Var<T> layernorm(Var<T>, Var<T>, Var<T>, T);                                 \
  template Var<T> softmax(Var<T>, T);                                                   \
  template Var<T> attention(Var<T>, Var<T>, Var<T>, std::size_t, bool);                 \
  template Var<T> l2_normalize(Var<T>, T);                                              \
  template Var<T> cross_entropy(Var<T>, std::span<const std::uint32_t>);

MAPLE_INSTANTIATE_OPS(float)
MAPLE_INSTANTIATE_OPS(double)

}  // namespace maple::diff
