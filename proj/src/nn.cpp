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

#include "srstereo/nn.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace srstereo {

ag::Var ParameterStore::add(const std::string& name, Tensor init) {
  require(!contains(name), "ParameterStore: duplicate name " + name);
  entries_.push_back({name, ag::leaf(std::move(init), true)});
  return entries_.back().var;
}

const ag::Var& ParameterStore::get(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.var;
  throw ContractError("ParameterStore: unknown parameter " + name);
}

bool ParameterStore::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.var.value().size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.var.zero_grad();
}

void ParameterStore::set_trainable(bool trainable) {
  for (auto& e : entries_) e.var.node()->requires_grad = trainable;
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  require(other.size() == size(), "ParameterStore: size mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    require(entries_[i].name == other.entries_[i].name, "ParameterStore: name mismatch");
    require(entries_[i].var.value().same_shape(other.entries_[i].var.value()),
            "ParameterStore: shape mismatch for " + entries_[i].name);
    entries_[i].var.mutable_value() = other.entries_[i].var.value();
  }
}

bool ParameterStore::values_equal(const ParameterStore& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name != other.entries_[i].name || !(entries_[i].var.value() == other.entries_[i].var.value()))
      return false;
  return true;
}

namespace {

Tensor orthogonal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const int n = std::max(rows, cols);
  Eigen::MatrixXd a(n, std::min(rows, cols));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, std::min(rows, cols));
  // Sign fix so the factorisation is unique.
  Eigen::MatrixXd r = qr.matrixQR().topRows(std::min(rows, cols)).triangularView<Eigen::Upper>();
  for (int j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  Tensor out(1, rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out.at(0, i, j) = rows >= cols ? q(i, j) : q(j, i);
  return out;
}

}  // namespace

Conv make_conv(ParameterStore& store, const std::string& name, int in, int out, int kernel, int stride, Rng& rng,
               Init init) {
  Tensor w(out, in, kernel * kernel);
  const int fan_in = in * kernel * kernel;
  switch (init) {
    case Init::kZero:
      break;
    case Init::kFanInUniform: {
      const double bound = std::sqrt(3.0 / fan_in);
      std::uniform_real_distribution<double> u(-bound, bound);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = u(rng);
      break;
    }
    case Init::kOrthogonal: {
      Tensor q = orthogonal(out, fan_in, rng);
      std::copy(q.data(), q.data() + q.size(), w.data());
      break;
    }
  }
  Conv c;
  c.weight = store.add(name + ".weight", std::move(w));
  c.bias = store.add(name + ".bias", Tensor(out, 1, 1));
  c.stride = stride;
  c.pad = kernel / 2;
  return c;
}

ag::Var ResBlock::operator()(const ag::Var& x) const {
  ag::Var y = conv2(ag::relu(conv1(ag::relu(x))));
  return ag::add(y, has_proj ? proj(x) : x);
}

ResBlock make_resblock(ParameterStore& store, const std::string& name, int in, int out, Rng& rng) {
  ResBlock b;
  b.conv1 = make_conv(store, name + ".conv1", in, out, 3, 1, rng);
  b.conv2 = make_conv(store, name + ".conv2", out, out, 3, 1, rng);
  if (in != out) {
    b.has_proj = true;
    b.proj = make_conv(store, name + ".proj", in, out, 1, 1, rng);
  }
  return b;
}

OneCycleSchedule::OneCycleSchedule(double peak, int total_steps)
    : peak_(peak), total_(std::max(total_steps, 1)), warmup_(std::max(1, total_ / 10)) {
  require(peak > 0.0, "OneCycleSchedule: peak learning rate must be positive");
}

double OneCycleSchedule::at(int step) const {
  const double floor_lr = peak_ / 25.0;
  if (step < warmup_) return floor_lr + (peak_ - floor_lr) * step / warmup_;
  const int span = std::max(1, total_ - warmup_);
  const double t = std::min(1.0, static_cast<double>(step - warmup_) / span);
  return floor_lr + 0.5 * (peak_ - floor_lr) * (1.0 + std::cos(std::numbers::pi * t));
}

AdamW::AdamW(ParameterStore& store, AdamWConfig cfg) : store_(store), cfg_(cfg) {
  for (const auto& e : store_.entries()) {
    const Tensor& v = e.var.value();
    m_.emplace_back(v.channels(), v.height(), v.width());
    v_.emplace_back(v.channels(), v.height(), v.width());
  }
}

double AdamW::step(double lr, double grad_scale) {
  auto& entries = store_.entries();
  double sq = 0.0;
  for (const auto& e : entries) {
    if (!e.var.requires_grad() || e.var.grad().empty()) continue;
    for (double g : e.var.grad().span()) sq += g * g;
  }
  const double norm = std::sqrt(sq) * grad_scale;
  double s = grad_scale;
  if (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm) s *= cfg_.clip_norm / norm;
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < entries.size(); ++k) {
    auto& var = entries[k].var;
    if (!var.requires_grad()) continue;
    Tensor& p = var.mutable_value();
    const Tensor& g = var.grad();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i] * s;
      m_[k][i] = cfg_.beta1 * m_[k][i] + (1 - cfg_.beta1) * gi;
      v_[k][i] = cfg_.beta2 * v_[k][i] + (1 - cfg_.beta2) * gi * gi;
      p[i] -= lr * cfg_.weight_decay * p[i];
      p[i] -= lr * (m_[k][i] / bc1) / (std::sqrt(v_[k][i] / bc2) + cfg_.eps);
    }
  }
  return norm;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace srstereo
