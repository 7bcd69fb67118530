// Copyright 2026 The wsrglow-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wsrglow/ndgrad/ops.hpp"

#include <Eigen/Core>
#include <cmath>

#include "wsrglow/common/error.hpp"

namespace wsrglow::ndgrad {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <typename T>
MatMap<T> as_matrix(Tensor<T>& t, std::size_t rows, std::size_t cols) {
  return MatMap<T>(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
ConstMatMap<T> as_matrix(const Tensor<T>& t, std::size_t rows, std::size_t cols) {
  return ConstMatMap<T>(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
void require_rank(const Var<T>& x, std::size_t rank, const char* op, const char* arg) {
  if (x.shape().size() != rank) {
    throw_shape(std::string(op) + ": " + arg + " must have rank " + std::to_string(rank) + ", got " +
                to_string(x.shape()));
  }
}

template <typename T>
Node<T>& parent(Node<T>& n, std::size_t i) {
  return *n.parents[i];
}

template <typename T>
void accumulate(Node<T>& dst, const Tensor<T>& delta) {
  auto& g = dst.grad_buffer().storage();
  const auto& d = delta.storage();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += d[i];
}

// Shared body for unary pointwise ops: `f` maps the input, `df` gives the
// local derivative from (input, output).
template <typename T, typename F, typename DF>
Var<T> unary(const Var<T>& a, F f, DF df) {
  const auto& in = a.value();
  Tensor<T> out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return a.graph().record(std::move(out), {a}, [df](Node<T>& self) {
    Node<T>& p = parent(self, 0);
    auto& g = p.grad_buffer();
    const auto& x = p.value();
    const auto& y = self.value();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * df(x[i], y[i]);
  });
}

enum class Binary { kAdd, kSub, kMul };

template <typename T>
Var<T> binary(const Var<T>& a, const Var<T>& b, Binary kind, const char* name) {
  const auto& av = a.value();
  const auto& bv = b.value();
  const bool same = av.shape() == bv.shape();
  if (!same && av.size() != 1 && bv.size() != 1) {
    throw_shape(std::string(name) + ": " + to_string(av.shape()) + " vs " + to_string(bv.shape()));
  }
  const bool a_scalar = !same && av.size() == 1;
  const bool b_scalar = !same && bv.size() == 1;
  Tensor<T> out(a_scalar ? bv.shape() : av.shape());
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    const T x = av[a_scalar ? 0 : i];
    const T y = bv[b_scalar ? 0 : i];
    out[i] = kind == Binary::kAdd ? x + y : kind == Binary::kSub ? x - y : x * y;
  }
  return a.graph().record(std::move(out), {a, b}, [kind, a_scalar, b_scalar, n](Node<T>& self) {
    Node<T>& pa = parent(self, 0);
    Node<T>& pb = parent(self, 1);
    const auto& g = self.grad;
    if (pa.requires_grad) {
      auto& ga = pa.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        const T d = kind == Binary::kMul ? g[i] * pb.value()[b_scalar ? 0 : i] : g[i];
        ga[a_scalar ? 0 : i] += d;
      }
    }
    if (pb.requires_grad) {
      auto& gb = pb.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        const T d = kind == Binary::kMul ? g[i] * pa.value()[a_scalar ? 0 : i]
                    : kind == Binary::kSub ? -g[i]
                                           : g[i];
        gb[b_scalar ? 0 : i] += d;
      }
    }
  });
}

// LU factorization with partial pivoting on a row-major n x n copy.
struct LuResult {
  std::vector<double> lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  double log_abs_det = 0.0;
  bool singular = false;
};

template <typename T>
LuResult lu_factor(const Tensor<T>& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1)) throw_shape("LU needs a square matrix, got " + to_string(m.shape()));
  const std::size_t n = m.dim(0);
  LuResult r;
  r.lu.assign(m.values().begin(), m.values().end());
  r.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.perm[i] = i;
  auto a = [&](std::size_t i, std::size_t j) -> double& { return r.lu[i * n + j]; };
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    }
    if (a(piv, k) == 0.0) {
      r.singular = true;
      return r;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(r.perm[k], r.perm[piv]);
      r.sign = -r.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
    r.log_abs_det += std::log(std::abs(a(k, k)));
  }
  return r;
}

void check_det(const LuResult& lu, double min_abs_det) {
  if (lu.singular || lu.log_abs_det < std::log(min_abs_det)) {
    throw NumericError("matrix is near-singular: |det| below " + std::to_string(min_abs_det));
  }
}

// Inverse from an LU factorization; returns row-major n x n.
std::vector<double> lu_inverse(const LuResult& lu, std::size_t n) {
  std::vector<double> inv(n * n, 0.0);
  std::vector<double> col(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = lu.perm[i] == c ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) col[i] -= lu.lu[i * n + j] * col[j];
    }
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) col[i] -= lu.lu[i * n + j] * col[j];
      col[i] /= lu.lu[i * n + i];
    }
    for (std::size_t i = 0; i < n; ++i) inv[i * n + c] = col[i];
  }
  return inv;
}

}  // namespace

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  return binary(a, b, Binary::kAdd, "add");
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  return binary(a, b, Binary::kSub, "sub");
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  return binary(a, b, Binary::kMul, "mul");
}

template <typename T>
Var<T> neg(const Var<T>& a) {
  return unary(a, [](T x) { return -x; }, [](T, T) { return T(-1); });
}

template <typename T>
Var<T> exp(const Var<T>& a) {
  return unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Var<T> log(const Var<T>& a) {
  for (T v : a.value().values()) {
    if (!(v > T(0))) throw DomainError("log of non-positive value " + std::to_string(v));
  }
  return unary(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
  return unary(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return unary(
      a, [](T x) { return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  return unary(a, [factor](T x) { return factor * x; }, [factor](T, T) { return factor; });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  T s = 0;
  for (T v : a.value().values()) s += v;
  return a.graph().record(Tensor<T>::scalar(s), {a}, [](Node<T>& self) {
    auto& g = parent(self, 0).grad_buffer();
    const T d = self.grad[0];
    for (auto& v : g.storage()) v += d;
  });
}

template <typename T>
Var<T> sum_squares(const Var<T>& a) {
  T s = 0;
  for (T v : a.value().values()) s += v * v;
  return a.graph().record(Tensor<T>::scalar(s), {a}, [](Node<T>& self) {
    Node<T>& p = parent(self, 0);
    auto& g = p.grad_buffer();
    const T d = 2 * self.grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += d * p.value()[i];
  });
}

template <typename T>
Var<T> conv1d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias, std::size_t dilation) {
  require_rank(input, 2, "conv1d", "input");
  require_rank(weight, 3, "conv1d", "weight");
  const std::size_t cin = input.dim(0), len = input.dim(1);
  const std::size_t cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin) {
    throw_shape("conv1d: weight C_in " + std::to_string(weight.dim(1)) + " != input channels " +
                std::to_string(cin));
  }
  if (k % 2 == 0) throw_shape("conv1d: kernel size must be odd, got " + std::to_string(k));
  if (dilation == 0) throw DomainError("conv1d: dilation must be positive");
  const bool has_bias = bias.valid();
  if (has_bias && (bias.shape().size() != 1 || bias.dim(0) != cout)) {
    throw_shape("conv1d: bias C_out " + to_string(bias.shape()) + " != " + std::to_string(cout));
  }

  // Per-tap weight slices [C_out, C_in], contiguous.
  auto taps = std::make_shared<std::vector<RowMat<T>>>(k);
  {
    const auto& w = weight.value();
    for (std::size_t tap = 0; tap < k; ++tap) {
      auto& m = (*taps)[tap];
      m.resize(static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(cin));
      for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t i = 0; i < cin; ++i) m(o, i) = w[(o * cin + i) * k + tap];
    }
  }
  // Valid output column range for tap offset `off`.
  const auto range = [len](std::ptrdiff_t off, std::size_t& l0, std::size_t& n) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(len),
                                                       static_cast<std::ptrdiff_t>(len) - off);
    l0 = static_cast<std::size_t>(lo);
    n = hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
  };
  const auto offset = [k, dilation](std::size_t tap) {
    return (static_cast<std::ptrdiff_t>(tap) - static_cast<std::ptrdiff_t>(k - 1) / 2) *
           static_cast<std::ptrdiff_t>(dilation);
  };

  Tensor<T> out({cout, len});
  auto om = as_matrix(out, cout, len);
  auto im = as_matrix(input.value(), cin, len);
  if (has_bias) {
    const auto& b = bias.value();
    for (std::size_t o = 0; o < cout; ++o) om.row(static_cast<Eigen::Index>(o)).setConstant(b[o]);
  } else {
    om.setZero();
  }
  for (std::size_t tap = 0; tap < k; ++tap) {
    std::size_t l0, n;
    const auto off = offset(tap);
    range(off, l0, n);
    if (n == 0) continue;
    om.middleCols(l0, n).noalias() += (*taps)[tap] * im.middleCols(l0 + off, n);
  }

  std::vector<Var<T>> parents{input, weight};
  if (has_bias) parents.push_back(bias);
  return input.graph().record(
      std::move(out), std::move(parents), [=](Node<T>& self) {
        Node<T>& pin = parent(self, 0);
        Node<T>& pw = parent(self, 1);
        auto gm = as_matrix(static_cast<const Tensor<T>&>(self.grad), cout, len);
        auto xm = as_matrix(pin.value(), cin, len);
        if (has_bias && parent(self, 2).requires_grad) {
          auto& gb = parent(self, 2).grad_buffer();
          for (std::size_t o = 0; o < cout; ++o) gb[o] += gm.row(static_cast<Eigen::Index>(o)).sum();
        }
        RowMat<T> dw_tap;
        for (std::size_t tap = 0; tap < k; ++tap) {
          std::size_t l0, n;
          const auto off = offset(tap);
          range(off, l0, n);
          if (n == 0) continue;
          if (pin.requires_grad) {
            auto dx = as_matrix(pin.grad_buffer(), cin, len);
            dx.middleCols(l0 + off, n).noalias() += (*taps)[tap].transpose() * gm.middleCols(l0, n);
          }
          if (pw.requires_grad) {
            dw_tap.noalias() = gm.middleCols(l0, n) * xm.middleCols(l0 + off, n).transpose();
            auto& dw = pw.grad_buffer();
            for (std::size_t o = 0; o < cout; ++o)
              for (std::size_t i = 0; i < cin; ++i)
                dw[(o * cin + i) * k + tap] += dw_tap(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i));
          }
        }
      });
}

template <typename T>
Var<T> channel_mix(const Var<T>& input, const Var<T>& weight) {
  require_rank(input, 2, "channel_mix", "input");
  require_rank(weight, 2, "channel_mix", "W");
  const std::size_t c = input.dim(0), len = input.dim(1);
  if (weight.dim(0) != weight.dim(1)) throw_shape("channel_mix: W must be square, got " + to_string(weight.shape()));
  if (weight.dim(1) != c) {
    throw_shape("channel_mix: W is " + to_string(weight.shape()) + " but input has " + std::to_string(c) +
                " channels");
  }
  Tensor<T> out({c, len});
  as_matrix(out, c, len).noalias() = as_matrix(weight.value(), c, c) * as_matrix(input.value(), c, len);
  return input.graph().record(std::move(out), {input, weight}, [c, len](Node<T>& self) {
    Node<T>& pin = parent(self, 0);
    Node<T>& pw = parent(self, 1);
    auto gm = as_matrix(static_cast<const Tensor<T>&>(self.grad), c, len);
    if (pin.requires_grad) {
      as_matrix(pin.grad_buffer(), c, len).noalias() += as_matrix(pw.value(), c, c).transpose() * gm;
    }
    if (pw.requires_grad) {
      as_matrix(pw.grad_buffer(), c, c).noalias() += gm * as_matrix(pin.value(), c, len).transpose();
    }
  });
}

template <typename T>
Var<T> embedding_lookup(const Var<T>& table, std::span<const int> indices) {
  require_rank(table, 2, "embedding_lookup", "table");
  const std::size_t v = table.dim(0), e = table.dim(1);
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= v) {
      throw DomainError("embedding index " + std::to_string(idx) + " outside [0, " + std::to_string(v) + ")");
    }
  }
  Tensor<T> out({indices.size(), e});
  const auto& tv = table.value();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::copy_n(tv.data() + static_cast<std::size_t>(indices[r]) * e, e, out.data() + r * e);
  }
  std::vector<int> idx(indices.begin(), indices.end());
  return table.graph().record(std::move(out), {table}, [idx = std::move(idx), e](Node<T>& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      T* dst = g.data() + static_cast<std::size_t>(idx[r]) * e;
      const T* src = self.grad.data() + r * e;
      for (std::size_t j = 0; j < e; ++j) dst[j] += src[j];
    }
  });
}

template <typename T>
Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_rows", "x");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (begin > end || end > rows) {
    throw_shape("slice_rows [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " + to_string(x.shape()));
  }
  Tensor<T> out({end - begin, cols});
  std::copy_n(x.value().data() + begin * cols, out.size(), out.data());
  return x.graph().record(std::move(out), {x}, [begin, cols](Node<T>& self) {
    T* dst = parent(self, 0).grad_buffer().data() + begin * cols;
    for (std::size_t i = 0; i < self.grad.size(); ++i) dst[i] += self.grad[i];
  });
}

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw_shape("concat_rows of nothing");
  std::size_t rows = 0;
  const std::size_t cols = parts.front().shape().size() == 2 ? parts.front().dim(1) : 0;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_rows", "part");
    if (p.dim(1) != cols) {
      throw_shape("concat_rows: column count " + std::to_string(p.dim(1)) + " != " + std::to_string(cols));
    }
    rows += p.dim(0);
  }
  Tensor<T> out({rows, cols});
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    std::copy_n(p.value().data(), p.size(), out.data() + at);
    at += p.size();
  }
  return parts.front().graph().record(std::move(out), parts, [offsets](Node<T>& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      Node<T>& p = parent(self, k);
      if (!p.requires_grad) continue;
      auto& g = p.grad_buffer();
      const T* src = self.grad.data() + offsets[k];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += src[i];
    }
  });
}

template <typename T>
Var<T> reshape(const Var<T>& x, Shape shape) {
  Tensor<T> out = x.value().reshaped(std::move(shape));
  return x.graph().record(std::move(out), {x}, [](Node<T>& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

template <typename T>
Var<T> transpose(const Var<T>& x) {
  require_rank(x, 2, "transpose", "x");
  const std::size_t r = x.dim(0), c = x.dim(1);
  Tensor<T> out({c, r});
  as_matrix(out, c, r) = as_matrix(x.value(), r, c).transpose();
  return x.graph().record(std::move(out), {x}, [r, c](Node<T>& self) {
    as_matrix(parent(self, 0).grad_buffer(), r, c) +=
        as_matrix(static_cast<const Tensor<T>&>(self.grad), c, r).transpose();
  });
}

template <typename T>
Var<T> repeat_cols(const Var<T>& x, std::size_t factor) {
  require_rank(x, 2, "repeat_cols", "x");
  if (factor == 0) throw DomainError("repeat_cols: factor must be positive");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor<T> out({rows, cols * factor});
  const auto& in = x.value();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t k = 0; k < factor; ++k) out[(r * cols + c) * factor + k] = in[r * cols + c];
  return x.graph().record(std::move(out), {x}, [rows, cols, factor](Node<T>& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < rows * cols; ++i)
      for (std::size_t k = 0; k < factor; ++k) g[i] += self.grad[i * factor + k];
  });
}

template <typename T>
double log_abs_det(const Tensor<T>& square, double min_abs_det) {
  auto lu = lu_factor(square);
  check_det(lu, min_abs_det);
  return lu.log_abs_det;
}

template <typename T>
Tensor<T> inverse(const Tensor<T>& square, double min_abs_det) {
  auto lu = lu_factor(square);
  check_det(lu, min_abs_det);
  const std::size_t n = square.dim(0);
  const auto inv = lu_inverse(lu, n);
  Tensor<T> out({n, n});
  for (std::size_t i = 0; i < inv.size(); ++i) out[i] = static_cast<T>(inv[i]);
  return out;
}

template <typename T>
Var<T> logabsdet(const Var<T>& w, double min_abs_det) {
  auto lu = lu_factor(w.value());
  check_det(lu, min_abs_det);
  const std::size_t n = w.dim(0);
  return w.graph().record(Tensor<T>::scalar(static_cast<T>(lu.log_abs_det)), {w},
                          [lu = std::move(lu), n](Node<T>& self) {
                            // d log|det W| / dW = W^{-T}.
                            const auto inv = lu_inverse(lu, n);
                            auto& g = parent(self, 0).grad_buffer();
                            const T d = self.grad[0];
                            for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < n; ++j) g[i * n + j] += d * static_cast<T>(inv[j * n + i]);
                          });
}

#define WSRGLOW_INSTANTIATE(T)                                                                      \
  template Var<T> add(const Var<T>&, const Var<T>&);                                              \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                              \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                              \
  template Var<T> neg(const Var<T>&);                                                             \
  template Var<T> exp(const Var<T>&);                                                             \
  template Var<T> log(const Var<T>&);                                                             \
  template Var<T> tanh(const Var<T>&);                                                            \
  template Var<T> sigmoid(const Var<T>&);                                                         \
  template Var<T> scale(const Var<T>&, T);                                                        \
  template Var<T> sum(const Var<T>&);                                                             \
  template Var<T> sum_squares(const Var<T>&);                                                     \
  template Var<T> conv1d(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t);               \
  template Var<T> channel_mix(const Var<T>&, const Var<T>&);                                      \
  template Var<T> embedding_lookup(const Var<T>&, std::span<const int>);                          \
  template Var<T> slice_rows(const Var<T>&, std::size_t, std::size_t);                            \
  template Var<T> concat_rows(const std::vector<Var<T>>&);                                        \
  template Var<T> reshape(const Var<T>&, Shape);                                                  \
  template Var<T> transpose(const Var<T>&);                                                       \
  template Var<T> repeat_cols(const Var<T>&, std::size_t);                                        \
  template Var<T> logabsdet(const Var<T>&, double);                                               \
  template double log_abs_det(const Tensor<T>&, double);                                          \
  template Tensor<T> inverse(const Tensor<T>&, double);

WSRGLOW_INSTANTIATE(float)
WSRGLOW_INSTANTIATE(double)

#undef WSRGLOW_INSTANTIATE

}  // namespace wsrglow::ndgrad
