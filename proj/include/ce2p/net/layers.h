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

#ifndef CE2P_NET_LAYERS_H_
#define CE2P_NET_LAYERS_H_

#include <random>
#include <string>
#include <vector>

#include "ce2p/net/tensor.h"

namespace ce2p::net {

// A named array owned by a layer. Non-trainable params are statistics
// buffers (batch-norm running moments) that are checkpointed but never
// touched by the optimizer.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor momentum;
  bool trainable = true;
  bool decay = true;
};

enum class Mode { kTrain, kEval };

// Layers below follow one protocol. Forward(x, ..., record) is const; with
// record == true it stores what Backward needs in mutable scratch, and in
// kTrain mode batch norm also updates its running moments. With record ==
// false nothing is written, so frozen models can be shared across threads.
// Backward(grad) consumes the recorded state, accumulates parameter
// gradients and returns the gradient with respect to the input.

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, int in_channels, int out_channels,
         int kernel, int stride = 1, int dilation = 1, bool bias = false);

  Tensor Forward(const Tensor& x, bool record) const;
  Tensor Backward(const Tensor& grad);
  void Collect(std::vector<Param*>& params);
  // He-normal weights scaled by `gain`, zero bias.
  void Init(std::mt19937_64& rng, double gain = 1.0);

  int OutSize(int in) const {
    return (in + 2 * pad_ - dilation_ * (kernel_ - 1) - 1) / stride_ + 1;
  }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }
  const Param& weight() const { return weight_; }
  bool has_bias() const { return has_bias_; }

 private:
  bool IsPointwise() const { return kernel_ == 1 && stride_ == 1; }
  void Im2Col(const double* x, int h, int w, double* cols) const;
  void Col2Im(const double* cols, int h, int w, double* x) const;

  int in_ = 0;
  int out_ = 0;
  int kernel_ = 1;
  int stride_ = 1;
  int dilation_ = 1;
  int pad_ = 0;
  bool has_bias_ = false;
  Param weight_;
  Param bias_;

  mutable int cached_h_ = 0;
  mutable int cached_w_ = 0;
  mutable std::vector<std::vector<double>> cached_cols_;
};

class BatchNorm2d {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

  BatchNorm2d() = default;
  BatchNorm2d(const std::string& name, int channels);

  Tensor Forward(const Tensor& x, Mode mode, bool record) const;
  Tensor Backward(const Tensor& grad);
  void Collect(std::vector<Param*>& params);

  Param& gamma() { return gamma_; }
  Param& beta() { return beta_; }

 private:
  int channels_ = 0;
  Param gamma_;
  Param beta_;
  mutable Param running_mean_;
  mutable Param running_var_;

  mutable Mode cached_mode_ = Mode::kEval;
  mutable Tensor cached_xhat_;
  mutable std::vector<double> cached_inv_std_;
};

// Convolution, batch norm and an optional rectifier.
class ConvBnRelu {
 public:
  ConvBnRelu() = default;
  ConvBnRelu(const std::string& name, int in_channels, int out_channels,
             int kernel, int stride = 1, int dilation = 1, bool relu = true);

  Tensor Forward(const Tensor& x, Mode mode, bool record) const;
  Tensor Backward(const Tensor& grad);
  void Collect(std::vector<Param*>& params);
  void Init(std::mt19937_64& rng);

  Conv2d& conv() { return conv_; }
  BatchNorm2d& bn() { return bn_; }
  int OutSize(int in) const { return conv_.OutSize(in); }

 private:
  Conv2d conv_;
  BatchNorm2d bn_;
  bool relu_ = true;
  mutable Tensor cached_out_;
};

// Two 3x3 conv-bn pairs with an identity or projected shortcut.
class BasicBlock {
 public:
  BasicBlock() = default;
  BasicBlock(const std::string& name, int in_channels, int out_channels,
             int stride, int dilation);

  Tensor Forward(const Tensor& x, Mode mode, bool record) const;
  Tensor Backward(const Tensor& grad);
  void Collect(std::vector<Param*>& params);
  void Init(std::mt19937_64& rng);

 private:
  ConvBnRelu first_;
  ConvBnRelu second_;  // no rectifier; applied after the sum
  bool projected_ = false;
  ConvBnRelu shortcut_;
  mutable Tensor cached_out_;
};

// Zeroes entries of `grad` where `activation` is not positive.
void ReluBackwardInPlace(const Tensor& activation, Tensor& grad);

}  // namespace ce2p::net

#endif  // CE2P_NET_LAYERS_H_
