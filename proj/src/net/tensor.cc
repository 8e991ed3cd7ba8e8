// Copyright 2026 The CE2P Authors.
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

#include "ce2p/net/tensor.h"

#include <algorithm>
#include <cmath>

#include "ce2p/core/errors.h"
#include "ce2p/data/image.h"

namespace ce2p::net {
namespace {

int PoolBegin(int i, int n, int bins) { return (i * n) / bins; }
int PoolEnd(int i, int n, int bins) { return ((i + 1) * n + bins - 1) / bins; }

}  // namespace

Tensor::Tensor(int n, int c, int h, int w, double fill)
    : n_(n), c_(c), h_(h), w_(w) {
  if (n < 0 || c < 0 || h < 0 || w < 0) {
    throw StructuralError("negative tensor dimension");
  }
  data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
}

std::string Tensor::ShapeString() const {
  return std::to_string(n_) + "x" + std::to_string(c_) + "x" +
         std::to_string(h_) + "x" + std::to_string(w_);
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::Add(const Tensor& other) {
  if (!SameShape(other)) {
    throw StructuralError("cannot add " + other.ShapeString() + " to " +
                          ShapeString());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor Concat(std::initializer_list<const Tensor*> parts) {
  return Concat(std::vector<const Tensor*>(parts));
}

Tensor Concat(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) return {};
  const Tensor& first = *parts.front();
  int channels = 0;
  for (const Tensor* p : parts) {
    if (p->n() != first.n() || p->h() != first.h() || p->w() != first.w()) {
      throw StructuralError("concat of " + p->ShapeString() + " with " +
                            first.ShapeString());
    }
    channels += p->c();
  }
  Tensor out(first.n(), channels, first.h(), first.w());
  for (int i = 0; i < first.n(); ++i) {
    double* dst = out.sample(i);
    for (const Tensor* p : parts) {
      std::copy_n(p->sample(i), p->sample_size(), dst);
      dst += p->sample_size();
    }
  }
  return out;
}

Tensor SliceChannels(const Tensor& t, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > t.c()) {
    throw StructuralError("channel slice out of range");
  }
  Tensor out(t.n(), count, t.h(), t.w());
  for (int i = 0; i < t.n(); ++i) {
    std::copy_n(t.sample(i) + begin * t.plane_size(), out.sample_size(),
                out.sample(i));
  }
  return out;
}

Tensor Resize(const Tensor& t, int h, int w) {
  if (t.h() == h && t.w() == w) return t;
  Tensor out(t.n(), t.c(), h, w);
  for (int i = 0; i < t.n(); ++i) {
    for (int c = 0; c < t.c(); ++c) {
      ResizePlaneBilinear(t.plane(i, c), t.h(), t.w(), out.plane(i, c), h, w);
    }
  }
  return out;
}

Tensor ResizeBackward(const Tensor& grad, int in_h, int in_w) {
  if (grad.h() == in_h && grad.w() == in_w) return grad;
  Tensor out(grad.n(), grad.c(), in_h, in_w);
  for (int i = 0; i < grad.n(); ++i) {
    for (int c = 0; c < grad.c(); ++c) {
      ResizePlaneBilinearAdjoint(grad.plane(i, c), grad.h(), grad.w(),
                                 out.plane(i, c), in_h, in_w);
    }
  }
  return out;
}

Tensor AdaptiveAvgPool(const Tensor& t, int bins) {
  if (bins <= 0) throw StructuralError("pool bins must be positive");
  Tensor out(t.n(), t.c(), bins, bins);
  for (int i = 0; i < t.n(); ++i) {
    for (int c = 0; c < t.c(); ++c) {
      const auto src = t.plane(i, c);
      for (int by = 0; by < bins; ++by) {
        const int y0 = PoolBegin(by, t.h(), bins);
        const int y1 = PoolEnd(by, t.h(), bins);
        for (int bx = 0; bx < bins; ++bx) {
          const int x0 = PoolBegin(bx, t.w(), bins);
          const int x1 = PoolEnd(bx, t.w(), bins);
          double sum = 0.0;
          for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) sum += src[y * t.w() + x];
          }
          out.at(i, c, by, bx) = sum / ((y1 - y0) * (x1 - x0));
        }
      }
    }
  }
  return out;
}

Tensor AdaptiveAvgPoolBackward(const Tensor& grad, int in_h, int in_w) {
  const int bins = grad.h();
  Tensor out(grad.n(), grad.c(), in_h, in_w);
  for (int i = 0; i < grad.n(); ++i) {
    for (int c = 0; c < grad.c(); ++c) {
      auto dst = out.plane(i, c);
      for (int by = 0; by < bins; ++by) {
        const int y0 = PoolBegin(by, in_h, bins);
        const int y1 = PoolEnd(by, in_h, bins);
        for (int bx = 0; bx < bins; ++bx) {
          const int x0 = PoolBegin(bx, in_w, bins);
          const int x1 = PoolEnd(bx, in_w, bins);
          const double g = grad.at(i, c, by, bx) / ((y1 - y0) * (x1 - x0));
          for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) dst[y * in_w + x] += g;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace ce2p::net
