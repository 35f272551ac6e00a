// Copyright 2026 The srstereo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "srstereo/autograd.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "srstereo/core_math.hpp"

namespace srstereo::ag {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

Var make(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (any) {
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (const auto& in : inputs) node->parents.push_back(in.node());
    node->backward = std::move(fn);
  }
  return Var(std::move(node));
}

// Gradient buffer of parent i, or nullptr when it does not need one.
Tensor* pgrad(Node& self, std::size_t i) {
  auto& p = self.parents[i];
  return p && p->requires_grad ? &p->grad_buffer() : nullptr;
}

const Tensor& pval(Node& self, std::size_t i) { return self.parents[i]->value; }

void check_same(const Var& a, const Var& b, const char* op) {
  require(a.value().same_shape(b.value()),
          std::string(op) + ": shape mismatch " + a.value().shape_str() + " vs " + b.value().shape_str());
}

template <class Fwd, class Bwd>
Var unary(const Var& a, Fwd fwd, Bwd dfdx) {
  const Tensor& x = a.value();
  Tensor out(x.channels(), x.height(), x.width());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  return make(std::move(out), {a}, [dfdx](Node& self) {
    Tensor* g = pgrad(self, 0);
    if (!g) return;
    const Tensor& x = pval(self, 0);
    for (std::size_t i = 0; i < x.size(); ++i) (*g)[i] += self.grad[i] * dfdx(x[i], self.value[i]);
  });
}

}  // namespace

double Var::item() const {
  require(node_->value.size() == 1, "item: not a scalar");
  return node_->value[0];
}

Var constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var leaf(Tensor value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  return Var(std::move(node));
}

void backward(const Var& root) {
  require(root.value().size() == 1, "backward: root must be a scalar");
  if (!root.requires_grad()) return;
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.node().get(), 0}};
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  root.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  // Interior gradients are not needed after the sweep.
  for (Node* n : order)
    if (n->backward) n->grad = Tensor();
}

Var add(const Var& a, const Var& b) {
  check_same(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k)
      if (Tensor* g = pgrad(self, k))
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
  });
}

Var sub(const Var& a, const Var& b) {
  check_same(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return make(std::move(out), {a, b}, [](Node& self) {
    if (Tensor* g = pgrad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    if (Tensor* g = pgrad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
  });
}

Var mul(const Var& a, const Var& b) {
  check_same(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return make(std::move(out), {a, b}, [](Node& self) {
    const Tensor& x = pval(self, 0);
    const Tensor& y = pval(self, 1);
    if (Tensor* g = pgrad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * y[i];
    if (Tensor* g = pgrad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * x[i];
  });
}

Var scale(const Var& a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var relu(const Var& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var clamp_min(const Var& a, double lo) {
  return unary(
      a, [lo](double x) { return x > lo ? x : lo; }, [lo](double x, double) { return x > lo ? 1.0 : 0.0; });
}

Var detach(const Var& a) { return constant(a.value()); }

Var sum_scalars(const std::vector<Var>& terms) {
  require(!terms.empty(), "sum_scalars: empty list");
  Tensor out(1, 1, 1);
  for (const auto& t : terms) {
    require(t.value().size() == 1, "sum_scalars: non-scalar term");
    out[0] += t.value()[0];
  }
  return make(std::move(out), terms, [](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k)
      if (Tensor* g = pgrad(self, k)) (*g)[0] += self.grad[0];
  });
}

Var concat(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat: no inputs");
  const int H = parts[0].value().height(), W = parts[0].value().width();
  int C = 0;
  for (const auto& p : parts) {
    require(p.value().height() == H && p.value().width() == W, "concat: spatial shape mismatch");
    C += p.value().channels();
  }
  Tensor out(C, H, W);
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + off);
    off += p.value().size();
  }
  return make(std::move(out), parts, [](Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      const std::size_t n = pval(self, k).size();
      if (Tensor* g = pgrad(self, k))
        for (std::size_t i = 0; i < n; ++i) (*g)[i] += self.grad[off + i];
      off += n;
    }
  });
}

Var slice_channels(const Var& a, int first, int count) {
  const Tensor& x = a.value();
  require(first >= 0 && count > 0 && first + count <= x.channels(), "slice_channels: out of range");
  Tensor out(count, x.height(), x.width());
  const std::size_t off = static_cast<std::size_t>(first) * x.plane();
  std::copy(x.data() + off, x.data() + off + out.size(), out.data());
  return make(std::move(out), {a}, [off](Node& self) {
    if (Tensor* g = pgrad(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[off + i] += self.grad[i];
  });
}

Var crop(const Var& a, int height, int width) {
  const Tensor& x = a.value();
  require(height <= x.height() && width <= x.width(), "crop: larger than input");
  if (height == x.height() && width == x.width()) return a;
  Tensor out(x.channels(), height, width);
  for (int c = 0; c < x.channels(); ++c)
    for (int y = 0; y < height; ++y)
      for (int xx = 0; xx < width; ++xx) out.at(c, y, xx) = x.at(c, y, xx);
  return make(std::move(out), {a}, [](Node& self) {
    Tensor* g = pgrad(self, 0);
    if (!g) return;
    const Tensor& go = self.grad;
    for (int c = 0; c < go.channels(); ++c)
      for (int y = 0; y < go.height(); ++y)
        for (int xx = 0; xx < go.width(); ++xx) g->at(c, y, xx) += go.at(c, y, xx);
  });
}

namespace {

struct ConvGeom {
  int cin, h, w, k, stride, pad, ho, wo;
};

void im2col(const Tensor& x, const ConvGeom& g, RowMat& cols) {
  cols.resize(static_cast<Eigen::Index>(g.cin) * g.k * g.k, static_cast<Eigen::Index>(g.ho) * g.wo);
  for (int c = 0; c < g.cin; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        double* row = cols.row((c * g.k + ky) * g.k + kx).data();
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride + ky - g.pad;
          double* r = row + static_cast<std::size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(r, r + g.wo, 0.0);
            continue;
          }
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride + kx - g.pad;
            r[ox] = (ix >= 0 && ix < g.w) ? x.at(c, iy, ix) : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const RowMat& cols, const ConvGeom& g, Tensor& dx) {
  for (int c = 0; c < g.cin; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const double* row = cols.row((c * g.k + ky) * g.k + kx).data();
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride + ky - g.pad;
          if (iy < 0 || iy >= g.h) continue;
          const double* r = row + static_cast<std::size_t>(oy) * g.wo;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride + kx - g.pad;
            if (ix >= 0 && ix < g.w) dx.at(c, iy, ix) += r[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad) {
  const Tensor& in = x.value();
  const Tensor& wt = weight.value();
  const int k = static_cast<int>(std::lround(std::sqrt(wt.width())));
  require(k * k == wt.width(), "conv2d: kernel plane must be square");
  require(wt.height() == in.channels(),
          "conv2d: weight expects " + std::to_string(wt.height()) + " input channels, got " +
              std::to_string(in.channels()));
  require(stride >= 1 && pad >= 0, "conv2d: bad stride/pad");
  ConvGeom g{in.channels(), in.height(), in.width(), k, stride, pad, 0, 0};
  g.ho = (g.h + 2 * pad - k) / stride + 1;
  g.wo = (g.w + 2 * pad - k) / stride + 1;
  require(g.ho >= 1 && g.wo >= 1, "conv2d: empty output");
  const int cout = wt.channels();
  const bool direct = (k == 1 && stride == 1 && pad == 0);
  const bool has_bias = static_cast<bool>(bias);

  Tensor out(cout, g.ho, g.wo);
  ConstMapMat W(wt.data(), cout, static_cast<Eigen::Index>(g.cin) * k * k);
  MapMat O(out.data(), cout, static_cast<Eigen::Index>(g.ho) * g.wo);
  if (direct) {
    O.noalias() = W * ConstMapMat(in.data(), g.cin, static_cast<Eigen::Index>(g.h) * g.w);
  } else {
    RowMat cols;
    im2col(in, g, cols);
    O.noalias() = W * cols;
  }
  if (has_bias) {
    const Tensor& b = bias.value();
    require(static_cast<int>(b.size()) == cout, "conv2d: bias size mismatch");
    for (int c = 0; c < cout; ++c) O.row(c).array() += b[c];
  }

  std::vector<Var> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make(std::move(out), std::move(inputs), [g, cout, direct, has_bias](Node& self) {
    const Tensor& in = pval(self, 0);
    const Tensor& wt = pval(self, 1);
    const Eigen::Index kk = static_cast<Eigen::Index>(g.cin) * g.k * g.k;
    const Eigen::Index npix = static_cast<Eigen::Index>(g.ho) * g.wo;
    ConstMapMat dO(self.grad.data(), cout, npix);
    Tensor* gx = pgrad(self, 0);
    Tensor* gw = pgrad(self, 1);
    if (direct) {
      ConstMapMat X(in.data(), g.cin, npix);
      if (gw) MapMat(gw->data(), cout, kk).noalias() += dO * X.transpose();
      if (gx) MapMat(gx->data(), g.cin, npix).noalias() += ConstMapMat(wt.data(), cout, kk).transpose() * dO;
    } else {
      if (gw) {
        RowMat cols;
        im2col(in, g, cols);
        MapMat(gw->data(), cout, kk).noalias() += dO * cols.transpose();
      }
      if (gx) {
        RowMat dcols = ConstMapMat(wt.data(), cout, kk).transpose() * dO;
        col2im(dcols, g, *gx);
      }
    }
    if (has_bias)
      if (Tensor* gb = pgrad(self, 2))
        for (int c = 0; c < cout; ++c) (*gb)[c] += dO.row(c).sum();
  });
}

Var l2_normalize(const Var& x, double eps) {
  const Tensor& in = x.value();
  const int C = in.channels(), P = in.plane();
  Tensor out(C, in.height(), in.width());
  std::vector<double> norm(P);
  for (int p = 0; p < P; ++p) {
    double s = eps;
    for (int c = 0; c < C; ++c) s += in[static_cast<std::size_t>(c) * P + p] * in[static_cast<std::size_t>(c) * P + p];
    norm[p] = std::sqrt(s);
    for (int c = 0; c < C; ++c)
      out[static_cast<std::size_t>(c) * P + p] = in[static_cast<std::size_t>(c) * P + p] / norm[p];
  }
  return make(std::move(out), {x}, [norm = std::move(norm), C, P](Node& self) {
    Tensor* g = pgrad(self, 0);
    if (!g) return;
    const Tensor& y = self.value;
    for (int p = 0; p < P; ++p) {
      double dot = 0.0;
      for (int c = 0; c < C; ++c) dot += y[static_cast<std::size_t>(c) * P + p] * self.grad[static_cast<std::size_t>(c) * P + p];
      for (int c = 0; c < C; ++c) {
        const std::size_t i = static_cast<std::size_t>(c) * P + p;
        (*g)[i] += (self.grad[i] - y[i] * dot) / norm[p];
      }
    }
  });
}

Var standardize(const Var& x, double eps) {
  const Tensor& in = x.value();
  const int C = in.channels(), P = in.plane();
  Tensor out(C, in.height(), in.width());
  std::vector<double> sigma(C);
  for (int c = 0; c < C; ++c) {
    const double* v = &in[static_cast<std::size_t>(c) * P];
    double mean = 0.0, var = 0.0;
    for (int p = 0; p < P; ++p) mean += v[p];
    mean /= P;
    for (int p = 0; p < P; ++p) var += (v[p] - mean) * (v[p] - mean);
    sigma[c] = std::sqrt(var / P + eps);
    for (int p = 0; p < P; ++p) out[static_cast<std::size_t>(c) * P + p] = (v[p] - mean) / sigma[c];
  }
  return make(std::move(out), {x}, [sigma = std::move(sigma), C, P](Node& self) {
    Tensor* g = pgrad(self, 0);
    if (!g) return;
    const Tensor& y = self.value;
    for (int c = 0; c < C; ++c) {
      const std::size_t base = static_cast<std::size_t>(c) * P;
      double mg = 0.0, mgy = 0.0;
      for (int p = 0; p < P; ++p) mg += self.grad[base + p], mgy += self.grad[base + p] * y[base + p];
      mg /= P;
      mgy /= P;
      for (int p = 0; p < P; ++p) (*g)[base + p] += (self.grad[base + p] - mg - y[base + p] * mgy) / sigma[c];
    }
  });
}

Var correlation(const Var& left, const Var& right, int levels) {
  check_same(left, right, "correlation");
  const Tensor& L = left.value();
  const Tensor& R = right.value();
  const int C = L.channels(), H = L.height(), W = L.width();
  require(levels >= 1 && levels <= W, "correlation: disparity levels exceed feature width");
  Tensor out(levels, H, W);
  for (int d = 0; d < levels; ++d)
    for (int c = 0; c < C; ++c)
      for (int y = 0; y < H; ++y) {
        const double* lr = &L.at(c, y, 0);
        const double* rr = &R.at(c, y, 0);
        double* o = &out.at(d, y, 0);
        for (int x = d; x < W; ++x) o[x] += lr[x] * rr[x - d];
      }
  return make(std::move(out), {left, right}, [levels, C, H, W](Node& self) {
    const Tensor& L = pval(self, 0);
    const Tensor& R = pval(self, 1);
    Tensor* gl = pgrad(self, 0);
    Tensor* gr = pgrad(self, 1);
    for (int d = 0; d < levels; ++d)
      for (int c = 0; c < C; ++c)
        for (int y = 0; y < H; ++y) {
          const double* go = &self.grad.at(d, y, 0);
          if (gl) {
            double* g = &gl->at(c, y, 0);
            const double* rr = &R.at(c, y, 0);
            for (int x = d; x < W; ++x) g[x] += go[x] * rr[x - d];
          }
          if (gr) {
            double* g = &gr->at(c, y, 0);
            const double* lr = &L.at(c, y, 0);
            for (int x = d; x < W; ++x) g[x - d] += go[x] * lr[x];
          }
        }
  });
}

Var pool_disparity(const Var& cost) {
  const Tensor& c = cost.value();
  const int levels = c.channels() / 2;
  require(levels >= 1, "pool_disparity: need at least two levels");
  const int P = c.plane();
  Tensor out(levels, c.height(), c.width());
  for (int l = 0; l < levels; ++l)
    for (int p = 0; p < P; ++p)
      out[static_cast<std::size_t>(l) * P + p] =
          0.5 * (c[static_cast<std::size_t>(2 * l) * P + p] + c[static_cast<std::size_t>(2 * l + 1) * P + p]);
  return make(std::move(out), {cost}, [levels, P](Node& self) {
    Tensor* g = pgrad(self, 0);
    if (!g) return;
    for (int l = 0; l < levels; ++l)
      for (int p = 0; p < P; ++p) {
        const double v = 0.5 * self.grad[static_cast<std::size_t>(l) * P + p];
        (*g)[static_cast<std::size_t>(2 * l) * P + p] += v;
        (*g)[static_cast<std::size_t>(2 * l + 1) * P + p] += v;
      }
  });
}

namespace {

// Linear sample position along an axis of `n` knots, clamped to the ends.
struct AxisSample {
  int i0, i1;
  double f;
  bool inside;  // coordinate strictly within [0, n-1]
};

AxisSample axis_sample(double coord, int n) {
  if (n == 1) return {0, 0, 0.0, false};
  const bool inside = coord > 0.0 && coord < n - 1;
  const double c = std::clamp(coord, 0.0, static_cast<double>(n - 1));
  int i0 = std::min(static_cast<int>(std::floor(c)), n - 2);
  return {i0, i0 + 1, c - i0, inside};
}

}  // namespace

Var lookup(const Var& cost, const Var& pooled, const Var& disparity, int radius) {
  const Tensor& G = cost.value();
  const Tensor& Gp = pooled.value();
  const Tensor& D = disparity.value();
  require(D.channels() == 1 && D.height() == G.height() && D.width() == G.width() &&
              Gp.height() == G.height() && Gp.width() == G.width(),
          "lookup: shape mismatch");
  const int taps = 2 * radius + 1;
  const int P = G.plane();
  Tensor out(2 * taps, G.height(), G.width());
  const Tensor* vols[2] = {&G, &Gp};
  const double rate[2] = {1.0, 0.5};
  for (int lvl = 0; lvl < 2; ++lvl) {
    const Tensor& V = *vols[lvl];
    for (int r = -radius; r <= radius; ++r) {
      const int ch = lvl * taps + r + radius;
      for (int p = 0; p < P; ++p) {
        const AxisSample s = axis_sample(D[p] * rate[lvl] + r, V.channels());
        out[static_cast<std::size_t>(ch) * P + p] =
            (1.0 - s.f) * V[static_cast<std::size_t>(s.i0) * P + p] + s.f * V[static_cast<std::size_t>(s.i1) * P + p];
      }
    }
  }
  return make(std::move(out), {cost, pooled, disparity}, [radius, taps, P](Node& self) {
    const Tensor& D = pval(self, 2);
    Tensor* gd = pgrad(self, 2);
    const double rate[2] = {1.0, 0.5};
    for (int lvl = 0; lvl < 2; ++lvl) {
      const Tensor& V = pval(self, lvl);
      Tensor* gv = pgrad(self, lvl);
      if (!gv && !gd) continue;
      for (int r = -radius; r <= radius; ++r) {
        const int ch = lvl * taps + r + radius;
        for (int p = 0; p < P; ++p) {
          const double go = self.grad[static_cast<std::size_t>(ch) * P + p];
          if (go == 0.0) continue;
          const AxisSample s = axis_sample(D[p] * rate[lvl] + r, V.channels());
          const std::size_t a = static_cast<std::size_t>(s.i0) * P + p;
          const std::size_t b = static_cast<std::size_t>(s.i1) * P + p;
          if (gv) {
            (*gv)[a] += (1.0 - s.f) * go;
            (*gv)[b] += s.f * go;
          }
          if (gd && s.inside) (*gd)[p] += go * rate[lvl] * (V[b] - V[a]);
        }
      }
    }
  });
}

Var soft_argmax(const Var& cost, double temperature) {
  require(temperature > 0.0, "soft_argmax: temperature must be positive");
  const Tensor& G = cost.value();
  const int L = G.channels(), P = G.plane();
  Tensor out(1, G.height(), G.width());
  Tensor prob(L, G.height(), G.width());
  for (int p = 0; p < P; ++p) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < L; ++l) mx = std::max(mx, G[static_cast<std::size_t>(l) * P + p]);
    double z = 0.0;
    for (int l = 0; l < L; ++l) {
      const double e = std::exp((G[static_cast<std::size_t>(l) * P + p] - mx) / temperature);
      prob[static_cast<std::size_t>(l) * P + p] = e;
      z += e;
    }
    double mean = 0.0;
    for (int l = 0; l < L; ++l) {
      double& q = prob[static_cast<std::size_t>(l) * P + p];
      q /= z;
      mean += l * q;
    }
    out[p] = mean;
  }
  return make(std::move(out), {cost}, [prob = std::move(prob), L, P, temperature](Node& self) {
    Tensor* g = pgrad(self, 0);
    if (!g) return;
    for (int p = 0; p < P; ++p) {
      const double go = self.grad[p] / temperature;
      const double mean = self.value[p];
      for (int l = 0; l < L; ++l) {
        const std::size_t i = static_cast<std::size_t>(l) * P + p;
        (*g)[i] += go * prob[i] * (l - mean);
      }
    }
  });
}

namespace {

struct UpTap {
  int i0, i1;
  double f;
};

std::vector<UpTap> up_taps(int in, int factor) {
  std::vector<UpTap> t(static_cast<std::size_t>(in) * factor);
  for (int o = 0; o < in * factor; ++o) {
    double s = (o + 0.5) / factor - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    const int i0 = static_cast<int>(std::floor(s));
    t[o] = {i0, std::min(i0 + 1, in - 1), s - i0};
  }
  return t;
}

}  // namespace

Var upsample_bilinear(const Var& x, int factor, double value_scale) {
  const Tensor& in = x.value();
  require(factor >= 1, "upsample_bilinear: factor must be >= 1");
  const int H = in.height() * factor, W = in.width() * factor;
  auto ty = up_taps(in.height(), factor);
  auto tx = up_taps(in.width(), factor);
  Tensor out(in.channels(), H, W);
  for (int c = 0; c < in.channels(); ++c)
    for (int y = 0; y < H; ++y) {
      const auto& a = ty[y];
      for (int xx = 0; xx < W; ++xx) {
        const auto& b = tx[xx];
        const double top = (1 - b.f) * in.at(c, a.i0, b.i0) + b.f * in.at(c, a.i0, b.i1);
        const double bot = (1 - b.f) * in.at(c, a.i1, b.i0) + b.f * in.at(c, a.i1, b.i1);
        out.at(c, y, xx) = value_scale * ((1 - a.f) * top + a.f * bot);
      }
    }
  return make(std::move(out), {x}, [ty = std::move(ty), tx = std::move(tx), value_scale](Node& self) {
    Tensor* g = pgrad(self, 0);
    if (!g) return;
    const Tensor& go = self.grad;
    for (int c = 0; c < go.channels(); ++c)
      for (int y = 0; y < go.height(); ++y) {
        const auto& a = ty[y];
        for (int xx = 0; xx < go.width(); ++xx) {
          const auto& b = tx[xx];
          const double v = value_scale * go.at(c, y, xx);
          g->at(c, a.i0, b.i0) += v * (1 - a.f) * (1 - b.f);
          g->at(c, a.i0, b.i1) += v * (1 - a.f) * b.f;
          g->at(c, a.i1, b.i0) += v * a.f * (1 - b.f);
          g->at(c, a.i1, b.i1) += v * a.f * b.f;
        }
      }
  });
}

Var upsample_convex(const Var& x, const Var& mask_logits, int factor, double value_scale) {
  const Tensor& in = x.value();
  const Tensor& M = mask_logits.value();
  require(in.channels() == 1, "upsample_convex: single-channel input required");
  require(M.channels() == 9 * factor * factor && M.height() == in.height() && M.width() == in.width(),
          "upsample_convex: mask shape mismatch");
  const int h = in.height(), w = in.width(), F = factor, FF = factor * factor;
  const int P = in.plane();
  Tensor out(1, h * F, w * F);
  Tensor weights(M.channels(), h, w);  // softmax over k for every sub-pixel
  auto nb = [&](int y, int x, int k) {
    return in.at(0, std::clamp(y + k / 3 - 1, 0, h - 1), std::clamp(x + k % 3 - 1, 0, w - 1));
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int s = 0; s < FF; ++s) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < 9; ++k) mx = std::max(mx, M.at(k * FF + s, y, x));
        double z = 0.0;
        for (int k = 0; k < 9; ++k) {
          const double e = std::exp(M.at(k * FF + s, y, x) - mx);
          weights.at(k * FF + s, y, x) = e;
          z += e;
        }
        double acc = 0.0;
        for (int k = 0; k < 9; ++k) {
          double& wk = weights.at(k * FF + s, y, x);
          wk /= z;
          acc += wk * nb(y, x, k);
        }
        out.at(0, y * F + s / F, x * F + s % F) = value_scale * acc;
      }
  (void)P;
  return make(std::move(out), {x, mask_logits}, [weights = std::move(weights), h, w, F, FF, value_scale](Node& self) {
    const Tensor& in = pval(self, 0);
    Tensor* gx = pgrad(self, 0);
    Tensor* gm = pgrad(self, 1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int s = 0; s < FF; ++s) {
          const double go = value_scale * self.grad.at(0, y * F + s / F, x * F + s % F);
          double v[9];
          double mean = 0.0;
          for (int k = 0; k < 9; ++k) {
            const int yy = std::clamp(y + k / 3 - 1, 0, h - 1), xx = std::clamp(x + k % 3 - 1, 0, w - 1);
            v[k] = in.at(0, yy, xx);
            const double wk = weights.at(k * FF + s, y, x);
            mean += wk * v[k];
            if (gx) gx->at(0, yy, xx) += go * wk;
          }
          if (gm)
            for (int k = 0; k < 9; ++k)
              gm->at(k * FF + s, y, x) += go * weights.at(k * FF + s, y, x) * (v[k] - mean);
        }
  });
}

Var prewitt_magnitude(const Var& x) {
  const Tensor& in = x.value();
  auto [gx, gy] = srstereo::prewitt_responses(in);
  Tensor out(1, in.height(), in.width());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::hypot(gx[i], gy[i]);
  return make(std::move(out), {x}, [gx = std::move(gx), gy = std::move(gy)](Node& self) {
    Tensor* g = pgrad(self, 0);
    if (!g) return;
    const int H = self.value.height(), W = self.value.width();
    for (int y = 0; y < H; ++y)
      for (int xx = 0; xx < W; ++xx) {
        const double mag = self.value.at(0, y, xx);
        if (mag == 0.0) continue;
        const double go = self.grad.at(0, y, xx);
        const double ax = go * gx.at(0, y, xx) / mag;
        const double ay = go * gy.at(0, y, xx) / mag;
        for (int k = -1; k <= 1; ++k) {
          const int ry = std::clamp(y + k, 0, H - 1);
          g->at(0, ry, std::clamp(xx + 1, 0, W - 1)) += ax;
          g->at(0, ry, std::clamp(xx - 1, 0, W - 1)) -= ax;
          const int rx = std::clamp(xx + k, 0, W - 1);
          g->at(0, std::clamp(y + 1, 0, H - 1), rx) += ay;
          g->at(0, std::clamp(y - 1, 0, H - 1), rx) -= ay;
        }
      }
  });
}

Var disparity_clip(const Var& raw, const Var& weight, double m) {
  check_same(raw, weight, "disparity_clip");
  require(m > 0.0, "disparity_clip: m must be positive");
  const Tensor& r = raw.value();
  const Tensor& wv = weight.value();
  // Largest double strictly below the asymptote; tanh and the sigmoid weight
  // both round to 1 in floating point long before their true limits.
  const double cap = std::nextafter(1.5 * m, 0.0);
  Tensor out(r.channels(), r.height(), r.width());
  Tensor th(r.channels(), r.height(), r.width());
  for (std::size_t i = 0; i < r.size(); ++i) {
    th[i] = std::tanh(r[i] / m);
    out[i] = std::clamp(th[i] * m * (1.0 + 0.5 * wv[i]), -cap, cap);
  }
  return make(std::move(out), {raw, weight}, [th = std::move(th), m](Node& self) {
    const Tensor& wv = pval(self, 1);
    if (Tensor* g = pgrad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i)
        (*g)[i] += self.grad[i] * (1.0 - th[i] * th[i]) * (1.0 + 0.5 * wv[i]);
    if (Tensor* g = pgrad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * th[i] * m * 0.5;
  });
}

Var masked_loss(const Var& pred, const Tensor& target, const Mask& valid, LossKind kind, double h) {
  const Tensor& p = pred.value();
  require(p.same_shape(target), "masked_loss: target shape mismatch");
  require(p.channels() == 1 && valid.height() == p.height() && valid.width() == p.width(),
          "masked_loss: mask shape mismatch");
  const std::size_t n = valid.count();
  if (n == 0) return constant(Tensor(1, 1, 1));
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!valid[i]) continue;
    const double e = p[i] - target[i];
    acc += kind == LossKind::kL1 ? cb_l1(e, h) : cb_smooth_l1(e, h);
  }
  Tensor out(1, 1, 1);
  out[0] = acc / static_cast<double>(n);
  return make(std::move(out), {pred}, [target, valid, kind, h, n](Node& self) {
    Tensor* g = pgrad(self, 0);
    if (!g) return;
    const Tensor& p = pval(self, 0);
    const double go = self.grad[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!valid[i]) continue;
      const double e = p[i] - target[i];
      (*g)[i] += go * (kind == LossKind::kL1 ? cb_l1_grad(e, h) : cb_smooth_l1_grad(e, h));
    }
  });
}

Var weighted_sum(const Var& x, const Tensor& weights) {
  require(x.value().same_shape(weights), "weighted_sum: weight shape mismatch");
  const Tensor& v = x.value();
  Tensor out(1, 1, 1);
  for (std::size_t i = 0; i < v.size(); ++i) out[0] += v[i] * weights[i];
  return make(std::move(out), {x}, [weights](Node& self) {
    if (Tensor* g = pgrad(self, 0))
      for (std::size_t i = 0; i < weights.size(); ++i) (*g)[i] += self.grad[0] * weights[i];
  });
}

}  // namespace srstereo::ag
