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

#ifndef CE2P_NET_TENSOR_H_
#define CE2P_NET_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ce2p::net {

// Dense N x C x H x W batch of feature maps. A FeatureMap in the network
// contract is one sample of such a batch.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, double fill = 0.0);

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t plane_size() const { return static_cast<std::size_t>(h_) * w_; }
  std::size_t sample_size() const { return c_ * plane_size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* sample(int i) { return data_.data() + i * sample_size(); }
  const double* sample(int i) const {
    return data_.data() + i * sample_size();
  }
  std::span<double> plane(int i, int c) {
    return {data_.data() + i * sample_size() + c * plane_size(), plane_size()};
  }
  std::span<const double> plane(int i, int c) const {
    return {data_.data() + i * sample_size() + c * plane_size(), plane_size()};
  }
  double& at(int i, int c, int y, int x) {
    return data_[((static_cast<std::size_t>(i) * c_ + c) * h_ + y) * w_ + x];
  }
  double at(int i, int c, int y, int x) const {
    return data_[((static_cast<std::size_t>(i) * c_ + c) * h_ + y) * w_ + x];
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool SameShape(const Tensor& other) const {
    return n_ == other.n_ && c_ == other.c_ && h_ == other.h_ &&
           w_ == other.w_;
  }
  std::string ShapeString() const;

  void Fill(double value);
  // Elementwise +=; throws StructuralError on shape mismatch.
  void Add(const Tensor& other);
  bool AllFinite() const;

  bool operator==(const Tensor&) const = default;

 private:
  int n_ = 0;
  int c_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<double> data_;
};

// Channel concatenation of same-sized batches.
Tensor Concat(std::initializer_list<const Tensor*> parts);
Tensor Concat(const std::vector<const Tensor*>& parts);

// Channels [begin, begin + count) of `t`.
Tensor SliceChannels(const Tensor& t, int begin, int count);

// Bilinear corner-aligned resize of every plane, and its adjoint.
Tensor Resize(const Tensor& t, int h, int w);
Tensor ResizeBackward(const Tensor& grad, int in_h, int in_w);

// Adaptive average pooling to bins x bins. Axis interval i covers
// [floor(i * n / bins), ceil((i + 1) * n / bins)), so bins larger than the
// input repeat pixels instead of failing.
Tensor AdaptiveAvgPool(const Tensor& t, int bins);
Tensor AdaptiveAvgPoolBackward(const Tensor& grad, int in_h, int in_w);

}  // namespace ce2p::net

#endif  // CE2P_NET_TENSOR_H_
