// ----------------------------------------------------------------------------
// Copyright 2026 The rulprior Authors
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
// ----------------------------------------------------------------------------

#include "rulprior/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rulprior/errors.hpp"

namespace rulprior::nn {
namespace {

std::string shape_str(const Tensor& t) {
  return "[" + std::to_string(t.rows()) + "," + std::to_string(t.cols()) + "]";
}

void require(bool ok, const char* op, const Tensor& a, const Tensor& b) {
  if (!ok) {
    fail(ErrorKind::Domain,
         std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
  }
}

Tensor as_matrix(const Tensor& t) {
  Tensor m = Tensor::matrix(t.rows(), t.cols());
  std::copy(t.values().begin(), t.values().end(), m.values().begin());
  return m;
}

}  // namespace

NodeId Graph::push(Tensor value, bool needs_grad, Backprop backprop) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = needs_grad;
  if (needs_grad) node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

NodeId Graph::constant(Tensor value) { return push(as_matrix(value), false, nullptr); }

NodeId Graph::variable(Tensor value) { return push(as_matrix(value), true, nullptr); }

NodeId Graph::parameter(const Parameter& p) {
  NodeId id = push(as_matrix(p.value), requires_grad_, nullptr);
  nodes_[id.index].param = &p;
  return id;
}

void Graph::backward(NodeId loss, double seed) {
  if (value(loss).size() != 1) {
    fail(ErrorKind::Domain, "backward needs a scalar loss, got " + shape_str(value(loss)));
  }
  for (std::size_t i = 0; i <= loss.index; ++i) {
    Node& n = nodes_[i];
    n.grad = n.needs_grad ? Tensor::matrix(n.value.rows(), n.value.cols()) : Tensor{};
  }
  if (!nodes_[loss.index].needs_grad) return;
  nodes_[loss.index].grad[0] = seed;

  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad) continue;
    if (n.backprop) {
      // The closure may touch other nodes' grads but never this node's.
      n.backprop(*this, n.grad);
    }
  }
}

void Graph::accumulate_into(Parameter& p) const {
  // Ascending node order keeps the summation order fixed.
  for (const Node& n : nodes_) {
    if (n.param != &p || n.grad.size() != p.grad.size()) continue;
    auto dst = p.grad.values();
    auto src = n.grad.values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.cols() == B.rows(), "matmul", A, B);
  const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor C = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* c = &C(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A(i, p);
      const double* brow = &B(p, 0);
      for (std::size_t j = 0; j < m; ++j) c[j] += aip * brow[j];
    }
  }
  return push(std::move(C), needs(a) || needs(b), [a, b, n, k, m](Graph& g, const Tensor& G) {
    const Tensor& A = g.value(a);
    const Tensor& B = g.value(b);
    if (g.needs(a)) {
      Tensor& GA = g.grad_ref(a);
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = &G(i, 0);
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = &B(p, 0);
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
          GA(i, p) += acc;
        }
      }
    }
    if (g.needs(b)) {
      Tensor& GB = g.grad_ref(b);
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = &G(i, 0);
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A(i, p);
          double* gb = &GB(p, 0);
          for (std::size_t j = 0; j < m; ++j) gb[j] += aip * grow[j];
        }
      }
    }
  });
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "add", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] += B[i];
  return push(std::move(C), needs(a) || needs(b), [a, b](Graph& g, const Tensor& G) {
    for (NodeId id : {a, b}) {
      if (!g.needs(id)) continue;
      Tensor& dst = g.grad_ref(id);
      for (std::size_t i = 0; i < G.size(); ++i) dst[i] += G[i];
    }
  });
}

NodeId Graph::sub(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "sub", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] -= B[i];
  return push(std::move(C), needs(a) || needs(b), [a, b](Graph& g, const Tensor& G) {
    if (g.needs(a)) {
      Tensor& dst = g.grad_ref(a);
      for (std::size_t i = 0; i < G.size(); ++i) dst[i] += G[i];
    }
    if (g.needs(b)) {
      Tensor& dst = g.grad_ref(b);
      for (std::size_t i = 0; i < G.size(); ++i) dst[i] -= G[i];
    }
  });
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "mul", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= B[i];
  return push(std::move(C), needs(a) || needs(b), [a, b](Graph& g, const Tensor& G) {
    const Tensor& A = g.value(a);
    const Tensor& B = g.value(b);
    if (g.needs(a)) {
      Tensor& dst = g.grad_ref(a);
      for (std::size_t i = 0; i < G.size(); ++i) dst[i] += G[i] * B[i];
    }
    if (g.needs(b)) {
      Tensor& dst = g.grad_ref(b);
      for (std::size_t i = 0; i < G.size(); ++i) dst[i] += G[i] * A[i];
    }
  });
}

NodeId Graph::add_row(NodeId a, NodeId row) {
  const Tensor& A = value(a);
  const Tensor& R = value(row);
  require(R.rows() == 1 && R.cols() == A.cols(), "add_row", A, R);
  Tensor C = A;
  const std::size_t n = A.rows(), m = A.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) C(i, j) += R[j];
  }
  return push(std::move(C), needs(a) || needs(row), [a, row, n, m](Graph& g, const Tensor& G) {
    if (g.needs(a)) {
      Tensor& dst = g.grad_ref(a);
      for (std::size_t i = 0; i < G.size(); ++i) dst[i] += G[i];
    }
    if (g.needs(row)) {
      Tensor& dst = g.grad_ref(row);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) dst[j] += G(i, j);
      }
    }
  });
}

NodeId Graph::scale(NodeId a, double factor) {
  Tensor C = value(a);
  for (double& v : C.values()) v *= factor;
  return push(std::move(C), needs(a), [a, factor](Graph& g, const Tensor& G) {
    Tensor& dst = g.grad_ref(a);
    for (std::size_t i = 0; i < G.size(); ++i) dst[i] += factor * G[i];
  });
}

NodeId Graph::relu(NodeId a) {
  Tensor C = value(a);
  for (double& v : C.values()) {
    relu_margin_ = std::min(relu_margin_, std::abs(v));
    v = v > 0.0 ? v : 0.0;
  }
  return push(std::move(C), needs(a), [a](Graph& g, const Tensor& G) {
    const Tensor& A = g.value(a);
    Tensor& dst = g.grad_ref(a);
    for (std::size_t i = 0; i < G.size(); ++i) {
      if (A[i] > 0.0) dst[i] += G[i];
    }
  });
}

NodeId Graph::transpose(NodeId a) {
  const Tensor& A = value(a);
  const std::size_t n = A.rows(), m = A.cols();
  Tensor C = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) C(j, i) = A(i, j);
  }
  return push(std::move(C), needs(a), [a, n, m](Graph& g, const Tensor& G) {
    Tensor& dst = g.grad_ref(a);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) dst(i, j) += G(j, i);
    }
  });
}

NodeId Graph::softmax_rows(NodeId a) {
  const Tensor& A = value(a);
  const std::size_t n = A.rows(), m = A.cols();
  Tensor Y = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double peak = A(i, 0);
    for (std::size_t j = 1; j < m; ++j) peak = std::max(peak, A(i, j));
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      Y(i, j) = std::exp(A(i, j) - peak);
      total += Y(i, j);
    }
    for (std::size_t j = 0; j < m; ++j) Y(i, j) /= total;
  }
  const std::size_t self = nodes_.size();
  return push(std::move(Y), needs(a), [a, n, m, self](Graph& g, const Tensor& G) {
    const Tensor& Y = g.nodes_[self].value;
    Tensor& dst = g.grad_ref(a);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += G(i, j) * Y(i, j);
      for (std::size_t j = 0; j < m; ++j) dst(i, j) += Y(i, j) * (G(i, j) - dot);
    }
  });
}

NodeId Graph::layer_norm(NodeId x, NodeId gain, NodeId bias, double eps) {
  const Tensor& X = value(x);
  const Tensor& Gn = value(gain);
  const Tensor& B = value(bias);
  const std::size_t n = X.rows(), d = X.cols();
  require(Gn.rows() == 1 && Gn.cols() == d, "layer_norm gain", X, Gn);
  require(B.rows() == 1 && B.cols() == d, "layer_norm bias", X, B);

  Tensor normalized = Tensor::matrix(n, d);
  std::vector<double> inv_std(n);
  Tensor Y = Tensor::matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += X(i, j);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (X(i, j) - mean) * (X(i, j) - mean);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      normalized(i, j) = (X(i, j) - mean) * inv_std[i];
      Y(i, j) = normalized(i, j) * Gn[j] + B[j];
    }
  }
  const bool any = needs(x) || needs(gain) || needs(bias);
  return push(std::move(Y), any,
              [x, gain, bias, n, d, normalized = std::move(normalized),
               inv_std = std::move(inv_std)](Graph& g, const Tensor& G) {
                const Tensor& Gn = g.value(gain);
                if (g.needs(gain)) {
                  Tensor& dst = g.grad_ref(gain);
                  for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < d; ++j) dst[j] += G(i, j) * normalized(i, j);
                  }
                }
                if (g.needs(bias)) {
                  Tensor& dst = g.grad_ref(bias);
                  for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < d; ++j) dst[j] += G(i, j);
                  }
                }
                if (g.needs(x)) {
                  Tensor& dst = g.grad_ref(x);
                  const double inv_d = 1.0 / static_cast<double>(d);
                  for (std::size_t i = 0; i < n; ++i) {
                    double mean_g = 0.0, mean_gx = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                      const double gx = G(i, j) * Gn[j];
                      mean_g += gx;
                      mean_gx += gx * normalized(i, j);
                    }
                    mean_g *= inv_d;
                    mean_gx *= inv_d;
                    for (std::size_t j = 0; j < d; ++j) {
                      const double gx = G(i, j) * Gn[j];
                      dst(i, j) += inv_std[i] * (gx - mean_g - normalized(i, j) * mean_gx);
                    }
                  }
                }
              });
}

NodeId Graph::slice_cols(NodeId a, std::size_t begin, std::size_t count) {
  const Tensor& A = value(a);
  if (count == 0 || begin + count > A.cols()) {
    fail(ErrorKind::Domain, "slice_cols: range outside " + shape_str(A));
  }
  const std::size_t n = A.rows();
  Tensor C = Tensor::matrix(n, count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < count; ++j) C(i, j) = A(i, begin + j);
  }
  return push(std::move(C), needs(a), [a, begin, count, n](Graph& g, const Tensor& G) {
    Tensor& dst = g.grad_ref(a);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < count; ++j) dst(i, begin + j) += G(i, j);
    }
  });
}

NodeId Graph::concat_cols(std::span<const NodeId> parts) {
  if (parts.empty()) fail(ErrorKind::Domain, "concat_cols: nothing to concatenate");
  const std::size_t n = value(parts[0]).rows();
  std::size_t total = 0;
  bool any = false;
  for (NodeId p : parts) {
    require(value(p).rows() == n, "concat_cols", value(parts[0]), value(p));
    total += value(p).cols();
    any = any || needs(p);
  }
  Tensor C = Tensor::matrix(n, total);
  std::size_t offset = 0;
  for (NodeId p : parts) {
    const Tensor& P = value(p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < P.cols(); ++j) C(i, offset + j) = P(i, j);
    }
    offset += P.cols();
  }
  std::vector<NodeId> inputs(parts.begin(), parts.end());
  return push(std::move(C), any, [inputs = std::move(inputs), n](Graph& g, const Tensor& G) {
    std::size_t offset = 0;
    for (NodeId p : inputs) {
      const std::size_t m = g.value(p).cols();
      if (g.needs(p)) {
        Tensor& dst = g.grad_ref(p);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) dst(i, j) += G(i, offset + j);
        }
      }
      offset += m;
    }
  });
}

NodeId Graph::reshape(NodeId a, std::size_t rows, std::size_t cols) {
  const Tensor& A = value(a);
  if (rows * cols != A.size()) {
    fail(ErrorKind::Domain, "reshape: cannot view " + shape_str(A) + " as [" +
                                std::to_string(rows) + "," + std::to_string(cols) + "]");
  }
  Tensor C({rows, cols}, std::vector<double>(A.values().begin(), A.values().end()));
  return push(std::move(C), needs(a), [a](Graph& g, const Tensor& G) {
    Tensor& dst = g.grad_ref(a);
    for (std::size_t i = 0; i < G.size(); ++i) dst[i] += G[i];
  });
}

NodeId Graph::gather_rows(NodeId a, std::span<const std::size_t> indices) {
  const Tensor& A = value(a);
  const std::size_t m = A.cols();
  Tensor C = Tensor::matrix(indices.size(), m);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= A.rows()) fail(ErrorKind::Domain, "gather_rows: index out of range");
    for (std::size_t j = 0; j < m; ++j) C(i, j) = A(indices[i], j);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return push(std::move(C), needs(a), [a, idx = std::move(idx), m](Graph& g, const Tensor& G) {
    Tensor& dst = g.grad_ref(a);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < m; ++j) dst(idx[i], j) += G(i, j);
    }
  });
}

NodeId Graph::mean_rows(NodeId a) {
  const Tensor& A = value(a);
  const std::size_t n = A.rows(), m = A.cols();
  Tensor C = Tensor::matrix(1, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) C[j] += A(i, j);
  }
  for (double& v : C.values()) v /= static_cast<double>(n);
  return push(std::move(C), needs(a), [a, n, m](Graph& g, const Tensor& G) {
    Tensor& dst = g.grad_ref(a);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) dst(i, j) += w * G[j];
    }
  });
}

NodeId Graph::sum(NodeId a) {
  double total = 0.0;
  for (double v : value(a).values()) total += v;
  return push(Tensor::scalar(total), needs(a), [a](Graph& g, const Tensor& G) {
    Tensor& dst = g.grad_ref(a);
    for (double& v : dst.values()) v += G[0];
  });
}

NodeId Graph::sum_squares(NodeId a) {
  double total = 0.0;
  for (double v : value(a).values()) total += v * v;
  return push(Tensor::scalar(total), needs(a), [a](Graph& g, const Tensor& G) {
    const Tensor& A = g.value(a);
    Tensor& dst = g.grad_ref(a);
    for (std::size_t i = 0; i < A.size(); ++i) dst[i] += 2.0 * A[i] * G[0];
  });
}

NodeId Graph::stop_gradient(NodeId a) { return push(value(a), false, nullptr); }

NodeId Graph::straight_through(NodeId continuous, NodeId quantized) {
  const Tensor& C = value(continuous);
  const Tensor& Q = value(quantized);
  require(C.rows() == Q.rows() && C.cols() == Q.cols(), "straight_through", C, Q);
  return push(Q, needs(continuous), [continuous](Graph& g, const Tensor& G) {
    Tensor& dst = g.grad_ref(continuous);
    for (std::size_t i = 0; i < G.size(); ++i) dst[i] += G[i];
  });
}

}  // namespace rulprior::nn
