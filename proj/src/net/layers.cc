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

#include "ce2p/net/layers.h"

#include <Eigen/Core>
#include <cmath>

#include "ce2p/core/errors.h"

namespace ce2p::net {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutableMap = Eigen::Map<RowMatrix>;

Param MakeParam(const std::string& name, int n, int c, int h, int w,
                bool trainable, bool decay, double fill = 0.0) {
  Param p;
  p.name = name;
  p.value = Tensor(n, c, h, w, fill);
  if (trainable) {
    p.grad = Tensor(n, c, h, w);
    p.momentum = Tensor(n, c, h, w);
  }
  p.trainable = trainable;
  p.decay = decay;
  return p;
}

}  // namespace

Conv2d::Conv2d(const std::string& name, int in_channels, int out_channels,
               int kernel, int stride, int dilation, bool bias)
    : in_(in_channels), out_(out_channels), kernel_(kernel), stride_(stride),
      dilation_(dilation), pad_(dilation * (kernel - 1) / 2),
      has_bias_(bias) {
  if (in_channels <= 0 || out_channels <= 0 || kernel <= 0 || stride <= 0 ||
      dilation <= 0) {
    throw StructuralError("invalid convolution geometry for " + name);
  }
  weight_ = MakeParam(name + ".weight", out_, in_, kernel_, kernel_, true,
                      true);
  if (has_bias_) bias_ = MakeParam(name + ".bias", 1, out_, 1, 1, true, false);
}

void Conv2d::Collect(std::vector<Param*>& params) {
  params.push_back(&weight_);
  if (has_bias_) params.push_back(&bias_);
}

void Conv2d::Init(std::mt19937_64& rng, double gain) {
  const double fan_in = static_cast<double>(in_) * kernel_ * kernel_;
  std::normal_distribution<double> normal(0.0, gain * std::sqrt(2.0 / fan_in));
  for (double& v : weight_.value.values()) v = normal(rng);
  if (has_bias_) bias_.value.Fill(0.0);
}

void Conv2d::Im2Col(const double* x, int h, int w, double* cols) const {
  const int oh = OutSize(h);
  const int ow = OutSize(w);
  const std::size_t opix = static_cast<std::size_t>(oh) * ow;
  for (int c = 0; c < in_; ++c) {
    const double* plane = x + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < kernel_; ++ky) {
      for (int kx = 0; kx < kernel_; ++kx) {
        double* row = cols + ((c * kernel_ + ky) * kernel_ + kx) * opix;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride_ - pad_ + ky * dilation_;
          double* dst = row + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::fill_n(dst, ow, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride_ - pad_ + kx * dilation_;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void Conv2d::Col2Im(const double* cols, int h, int w, double* x) const {
  const int oh = OutSize(h);
  const int ow = OutSize(w);
  const std::size_t opix = static_cast<std::size_t>(oh) * ow;
  for (int c = 0; c < in_; ++c) {
    double* plane = x + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < kernel_; ++ky) {
      for (int kx = 0; kx < kernel_; ++kx) {
        const double* row = cols + ((c * kernel_ + ky) * kernel_ + kx) * opix;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride_ - pad_ + ky * dilation_;
          if (iy < 0 || iy >= h) continue;
          const double* src = row + static_cast<std::size_t>(oy) * ow;
          double* dst = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride_ - pad_ + kx * dilation_;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

Tensor Conv2d::Forward(const Tensor& x, bool record) const {
  if (x.c() != in_) {
    throw StructuralError(weight_.name + " expects " + std::to_string(in_) +
                          " channels, got " + x.ShapeString());
  }
  const int oh = OutSize(x.h());
  const int ow = OutSize(x.w());
  if (oh <= 0 || ow <= 0) {
    throw StructuralError(weight_.name + " input too small: " +
                          x.ShapeString());
  }
  const int patch = in_ * kernel_ * kernel_;
  const std::size_t opix = static_cast<std::size_t>(oh) * ow;
  Tensor y(x.n(), out_, oh, ow);
  ConstMap weight(weight_.value.data(), out_, patch);
  if (record) {
    cached_h_ = x.h();
    cached_w_ = x.w();
    cached_cols_.assign(x.n(), {});
  }
  std::vector<double> scratch;
  for (int i = 0; i < x.n(); ++i) {
    const double* cols = x.sample(i);
    if (!IsPointwise()) {
      std::vector<double>& buffer = record ? cached_cols_[i] : scratch;
      buffer.resize(patch * opix);
      Im2Col(x.sample(i), x.h(), x.w(), buffer.data());
      cols = buffer.data();
    } else if (record) {
      cached_cols_[i].assign(x.sample(i), x.sample(i) + x.sample_size());
    }
    MutableMap out(y.sample(i), out_, opix);
    out.noalias() = weight * ConstMap(cols, patch, opix);
    if (has_bias_) {
      for (int o = 0; o < out_; ++o) {
        out.row(o).array() += bias_.value.data()[o];
      }
    }
  }
  return y;
}

Tensor Conv2d::Backward(const Tensor& grad) {
  const int h = cached_h_;
  const int w = cached_w_;
  const int patch = in_ * kernel_ * kernel_;
  const std::size_t opix = grad.plane_size();
  if (grad.c() != out_ || static_cast<int>(cached_cols_.size()) != grad.n()) {
    throw StructuralError(weight_.name + " backward without matching forward");
  }
  Tensor dx(grad.n(), in_, h, w);
  ConstMap weight(weight_.value.data(), out_, patch);
  MutableMap dweight(weight_.grad.data(), out_, patch);
  std::vector<double> dcols(patch * opix);
  for (int i = 0; i < grad.n(); ++i) {
    ConstMap g(grad.sample(i), out_, opix);
    ConstMap cols(cached_cols_[i].data(), patch, opix);
    dweight.noalias() += g * cols.transpose();
    if (has_bias_) {
      for (int o = 0; o < out_; ++o) bias_.grad.data()[o] += g.row(o).sum();
    }
    if (IsPointwise()) {
      MutableMap(dx.sample(i), patch, opix).noalias() = weight.transpose() * g;
    } else {
      MutableMap(dcols.data(), patch, opix).noalias() = weight.transpose() * g;
      Col2Im(dcols.data(), h, w, dx.sample(i));
    }
  }
  return dx;
}

BatchNorm2d::BatchNorm2d(const std::string& name, int channels)
    : channels_(channels) {
  gamma_ = MakeParam(name + ".gamma", 1, channels, 1, 1, true, false, 1.0);
  beta_ = MakeParam(name + ".beta", 1, channels, 1, 1, true, false, 0.0);
  running_mean_ =
      MakeParam(name + ".running_mean", 1, channels, 1, 1, false, false, 0.0);
  running_var_ =
      MakeParam(name + ".running_var", 1, channels, 1, 1, false, false, 1.0);
}

void BatchNorm2d::Collect(std::vector<Param*>& params) {
  params.push_back(&gamma_);
  params.push_back(&beta_);
  params.push_back(&running_mean_);
  params.push_back(&running_var_);
}

Tensor BatchNorm2d::Forward(const Tensor& x, Mode mode, bool record) const {
  if (x.c() != channels_) {
    throw StructuralError(gamma_.name + " expects " +
                          std::to_string(channels_) + " channels, got " +
                          x.ShapeString());
  }
  Tensor y(x.n(), x.c(), x.h(), x.w());
  const std::size_t plane = x.plane_size();
  const double count = static_cast<double>(x.n()) * plane;
  if (record) {
    cached_mode_ = mode;
    cached_xhat_ = Tensor(x.n(), x.c(), x.h(), x.w());
    cached_inv_std_.assign(channels_, 0.0);
  }
  for (int c = 0; c < channels_; ++c) {
    double mean = running_mean_.value.data()[c];
    double var = running_var_.value.data()[c];
    if (mode == Mode::kTrain) {
      double sum = 0.0;
      for (int i = 0; i < x.n(); ++i) {
        for (double v : x.plane(i, c)) sum += v;
      }
      mean = sum / count;
      double sq = 0.0;
      for (int i = 0; i < x.n(); ++i) {
        for (double v : x.plane(i, c)) sq += (v - mean) * (v - mean);
      }
      var = sq / count;
      if (record) {
        const double unbiased = count > 1 ? sq / (count - 1) : var;
        double& rm = running_mean_.value.data()[c];
        double& rv = running_var_.value.data()[c];
        rm = (1.0 - kMomentum) * rm + kMomentum * mean;
        rv = (1.0 - kMomentum) * rv + kMomentum * unbiased;
      }
    }
    const double inv_std = 1.0 / std::sqrt(var + kEpsilon);
    const double g = gamma_.value.data()[c];
    const double b = beta_.value.data()[c];
    if (record) cached_inv_std_[c] = inv_std;
    for (int i = 0; i < x.n(); ++i) {
      const auto src = x.plane(i, c);
      auto dst = y.plane(i, c);
      for (std::size_t p = 0; p < plane; ++p) {
        const double xhat = (src[p] - mean) * inv_std;
        dst[p] = g * xhat + b;
        if (record) cached_xhat_.plane(i, c)[p] = xhat;
      }
    }
  }
  return y;
}

Tensor BatchNorm2d::Backward(const Tensor& grad) {
  if (!grad.SameShape(cached_xhat_)) {
    throw StructuralError(gamma_.name + " backward without matching forward");
  }
  Tensor dx(grad.n(), grad.c(), grad.h(), grad.w());
  const std::size_t plane = grad.plane_size();
  const double count = static_cast<double>(grad.n()) * plane;
  for (int c = 0; c < channels_; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (int i = 0; i < grad.n(); ++i) {
      const auto g = grad.plane(i, c);
      const auto xh = cached_xhat_.plane(i, c);
      for (std::size_t p = 0; p < plane; ++p) {
        sum_g += g[p];
        sum_gx += g[p] * xh[p];
      }
    }
    beta_.grad.data()[c] += sum_g;
    gamma_.grad.data()[c] += sum_gx;
    const double scale = gamma_.value.data()[c] * cached_inv_std_[c];
    for (int i = 0; i < grad.n(); ++i) {
      const auto g = grad.plane(i, c);
      const auto xh = cached_xhat_.plane(i, c);
      auto d = dx.plane(i, c);
      if (cached_mode_ == Mode::kTrain) {
        for (std::size_t p = 0; p < plane; ++p) {
          d[p] = scale * (g[p] - sum_g / count - xh[p] * sum_gx / count);
        }
      } else {
        for (std::size_t p = 0; p < plane; ++p) d[p] = scale * g[p];
      }
    }
  }
  return dx;
}

ConvBnRelu::ConvBnRelu(const std::string& name, int in_channels,
                       int out_channels, int kernel, int stride, int dilation,
                       bool relu)
    : conv_(name + ".conv", in_channels, out_channels, kernel, stride,
            dilation, false),
      bn_(name + ".bn", out_channels), relu_(relu) {}

Tensor ConvBnRelu::Forward(const Tensor& x, Mode mode, bool record) const {
  Tensor y = bn_.Forward(conv_.Forward(x, record), mode, record);
  if (relu_) {
    for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  }
  if (record) cached_out_ = y;
  return y;
}

Tensor ConvBnRelu::Backward(const Tensor& grad) {
  Tensor g = grad;
  if (relu_) ReluBackwardInPlace(cached_out_, g);
  return conv_.Backward(bn_.Backward(g));
}

void ConvBnRelu::Collect(std::vector<Param*>& params) {
  conv_.Collect(params);
  bn_.Collect(params);
}

void ConvBnRelu::Init(std::mt19937_64& rng) { conv_.Init(rng); }

BasicBlock::BasicBlock(const std::string& name, int in_channels,
                       int out_channels, int stride, int dilation)
    : first_(name + ".a", in_channels, out_channels, 3, stride, dilation),
      second_(name + ".b", out_channels, out_channels, 3, 1, dilation, false),
      projected_(in_channels != out_channels || stride != 1) {
  if (projected_) {
    shortcut_ = ConvBnRelu(name + ".proj", in_channels, out_channels, 1,
                           stride, 1, false);
  }
}

Tensor BasicBlock::Forward(const Tensor& x, Mode mode, bool record) const {
  Tensor y = second_.Forward(first_.Forward(x, mode, record), mode, record);
  if (projected_) {
    y.Add(shortcut_.Forward(x, mode, record));
  } else {
    y.Add(x);
  }
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  if (record) cached_out_ = y;
  return y;
}

Tensor BasicBlock::Backward(const Tensor& grad) {
  Tensor g = grad;
  ReluBackwardInPlace(cached_out_, g);
  Tensor dx = first_.Backward(second_.Backward(g));
  dx.Add(projected_ ? shortcut_.Backward(g) : g);
  return dx;
}

void BasicBlock::Collect(std::vector<Param*>& params) {
  first_.Collect(params);
  second_.Collect(params);
  if (projected_) shortcut_.Collect(params);
}

void BasicBlock::Init(std::mt19937_64& rng) {
  first_.Init(rng);
  second_.Init(rng);
  if (projected_) shortcut_.Init(rng);
}

void ReluBackwardInPlace(const Tensor& activation, Tensor& grad) {
  if (!activation.SameShape(grad)) {
    throw StructuralError("relu backward shape mismatch");
  }
  const double* a = activation.data();
  double* g = grad.data();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(a[i] > 0.0)) g[i] = 0.0;
  }
}

}  // namespace ce2p::net
