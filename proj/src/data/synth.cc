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

#include "ce2p/data/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <random>
#include <thread>

#include "ce2p/core/errors.h"

namespace ce2p::data {
namespace {

// Synthetic class ids.
constexpr int kHair = 1;
constexpr int kFace = 2;
constexpr int kUpper = 3;
constexpr int kLeftArm = 4;
constexpr int kRightArm = 5;
constexpr int kLeftLeg = 6;
constexpr int kRightLeg = 7;

constexpr int kMinCanvas = 32;
constexpr int kMinSlot = 16;

using Rgb = std::array<double, 3>;

struct Ellipse {
  double cy, cx, ry, rx;
  double angle = 0.0;  // radians, rotation of the ry axis from vertical

  bool Contains(double y, double x) const {
    const double dy = y - cy;
    const double dx = x - cx;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double v = c * dy + s * dx;
    const double u = -s * dy + c * dx;
    return (v * v) / (ry * ry) + (u * u) / (rx * rx) <= 1.0;
  }
};

class Canvas {
 public:
  Canvas(int side, const Rgb& top, const Rgb& bottom)
      : image_(3, side, side), parsing_(side, side, 0),
        instances_(side, side, 0) {
    for (int y = 0; y < side; ++y) {
      const double t = side > 1 ? static_cast<double>(y) / (side - 1) : 0.0;
      for (int x = 0; x < side; ++x) {
        for (int c = 0; c < 3; ++c) {
          image_.at(c, y, x) = (1 - t) * top[c] + t * bottom[c];
        }
      }
    }
  }

  void Paint(const Ellipse& e, const Rgb& color, int label, int person) {
    const int side = parsing_.height();
    const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - e.ry - e.rx)));
    const int y1 =
        std::min(side - 1, static_cast<int>(std::ceil(e.cy + e.ry + e.rx)));
    const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - e.ry - e.rx)));
    const int x1 =
        std::min(side - 1, static_cast<int>(std::ceil(e.cx + e.ry + e.rx)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!e.Contains(y + 0.5, x + 0.5)) continue;
        for (int c = 0; c < 3; ++c) image_.at(c, y, x) = color[c];
        parsing_.at(y, x) = label;
        instances_.at(y, x) = person;
      }
    }
  }

  Image& image() { return image_; }
  ParsingMap& parsing() { return parsing_; }
  Grid<std::int32_t>& instances() { return instances_; }

 private:
  Image image_;
  ParsingMap parsing_;
  Grid<std::int32_t> instances_;
};

Rgb RandomColor(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng), d(rng), d(rng)};
}

// Draws one person whose bounding extent is roughly `h` tall and 0.45 h wide,
// with the top of the head at (top, cx).
void DrawPerson(Canvas& canvas, std::mt19937_64& rng, double top, double cx,
                double h, bool front, int person) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Rgb skin = {0.75 + 0.2 * u(rng), 0.55 + 0.2 * u(rng),
                    0.4 + 0.2 * u(rng)};
  const Rgb hair = RandomColor(rng, 0.05, 0.3);
  const Rgb shirt = RandomColor(rng, 0.1, 0.95);
  const Rgb pants = RandomColor(rng, 0.1, 0.8);
  const double swing_l = 0.1 + 0.25 * u(rng);
  const double swing_r = 0.1 + 0.25 * u(rng);
  const double stance = 0.05 + 0.1 * u(rng);

  // Front-facing persons show their right side on the image left.
  const int image_left_arm = front ? kRightArm : kLeftArm;
  const int image_right_arm = front ? kLeftArm : kRightArm;
  const int image_left_leg = front ? kRightLeg : kLeftLeg;
  const int image_right_leg = front ? kLeftLeg : kRightLeg;

  const double arm_len = 0.17 * h;
  const double arm_w = std::max(1.5, 0.055 * h);
  const double leg_w = std::max(1.5, 0.07 * h);
  const double shoulder_y = top + 0.26 * h;
  const double shoulder_dx = 0.17 * h;

  canvas.Paint({top + 0.74 * h, cx - 0.075 * h, 0.22 * h, leg_w, -stance},
               pants, image_left_leg, person);
  canvas.Paint({top + 0.74 * h, cx + 0.075 * h, 0.22 * h, leg_w, stance},
               pants, image_right_leg, person);
  canvas.Paint({top + 0.39 * h, cx, 0.19 * h, 0.15 * h}, shirt, kUpper,
               person);
  // Arms hang from the shoulders, swung outwards.
  canvas.Paint({shoulder_y + arm_len * std::cos(swing_l),
                cx - shoulder_dx - arm_len * std::sin(swing_l), arm_len, arm_w,
                -swing_l},
               skin, image_left_arm, person);
  canvas.Paint({shoulder_y + arm_len * std::cos(swing_r),
                cx + shoulder_dx + arm_len * std::sin(swing_r), arm_len, arm_w,
                swing_r},
               skin, image_right_arm, person);
  canvas.Paint({top + 0.11 * h, cx, 0.11 * h, 0.1 * h}, hair, kHair,
               person);
  if (front) {
    canvas.Paint({top + 0.15 * h, cx, 0.085 * h, 0.08 * h}, skin, kFace,
                 person);
  }
}

}  // namespace

void SynthOptions::Validate() const {
  if (n < 0) throw ParameterError("n must be nonnegative");
  if (max_persons < 1) throw ParameterError("max_persons must be at least 1");
  if (canvas < kMinCanvas) {
    throw ParameterError("canvas must be at least " +
                         std::to_string(kMinCanvas) + " pixels");
  }
  if (canvas / max_persons < kMinSlot) {
    throw ParameterError("canvas of " + std::to_string(canvas) +
                         " pixels is too small for " +
                         std::to_string(max_persons) + " persons");
  }
  if (workers < 1) throw ParameterError("workers must be at least 1");
}

std::string SynthId(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "synth_%06d", index);
  return buf;
}

SynthImage GenerateSynthImage(int index, const SynthOptions& options) {
  options.Validate();
  std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                    static_cast<std::uint32_t>(options.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int side = options.canvas;

  Canvas canvas(side, RandomColor(rng, 0.0, 1.0), RandomColor(rng, 0.0, 1.0));
  const int persons =
      1 + std::uniform_int_distribution<int>(0, options.max_persons - 1)(rng);
  const double slot = static_cast<double>(side) / persons;

  struct Placement {
    double top, cx, h;
    bool front;
  };
  std::vector<Placement> placements(persons);
  std::vector<int> slots(persons);
  for (int j = 0; j < persons; ++j) slots[j] = j;
  std::shuffle(slots.begin(), slots.end(), rng);
  for (int j = 0; j < persons; ++j) {
    Placement& p = placements[j];
    const double max_h = std::min(0.92 * side, 2.0 * slot);
    p.h = max_h * (0.65 + 0.35 * u(rng));
    const double half_w = 0.28 * p.h;
    const double lo = slots[j] * slot + 0.5 * slot - 0.2 * slot;
    const double hi = slots[j] * slot + 0.5 * slot + 0.2 * slot;
    p.cx = std::clamp(lo + (hi - lo) * u(rng), half_w, side - half_w);
    p.top = (side - 0.96 * p.h) * u(rng);
    // Person 1 of every even image faces the camera, so every class shows up
    // in at least half of the images.
    p.front = j == 0 ? index % 2 == 0 : u(rng) < 0.5;
  }
  // Person 1 is painted last and therefore fully visible.
  for (int j = persons - 1; j >= 0; --j) {
    const Placement& p = placements[j];
    DrawPerson(canvas, rng, p.top, p.cx, p.h, p.front, j + 1);
  }

  SynthImage out;
  out.id = SynthId(index);
  out.image = std::move(canvas.image());
  std::normal_distribution<double> noise(0.0, 0.03);
  for (double& v : out.image.values()) {
    // Quantize so the in-memory image equals its PNG.
    v = std::round(std::clamp(v + noise(rng), 0.0, 1.0) * 255.0) / 255.0;
  }
  out.parsing = std::move(canvas.parsing());
  out.instance_ids = std::move(canvas.instances());
  return out;
}

std::vector<Sample> GenerateSynthSamples(const SynthOptions& options,
                                         const EdgeOptions& edges) {
  options.Validate();
  std::vector<Sample> samples(options.n);
  for (int i = 0; i < options.n; ++i) {
    SynthImage s = GenerateSynthImage(i, options);
    Sample& out = samples[i];
    out.id = s.id;
    out.image = std::move(s.image);
    out.edge = GenerateEdgeLabels(s.parsing, edges);
    out.parsing = std::move(s.parsing);
    out.instances = MasksFromInstanceIds(s.instance_ids);
  }
  return samples;
}

Manifest WriteSynthDataset(const std::filesystem::path& root,
                           const SynthOptions& options) {
  options.Validate();
  std::filesystem::create_directories(root / "images");
  std::filesystem::create_directories(root / "categories");
  std::filesystem::create_directories(root / "instances");

  // Per-image channel sums, merged in index order so the statistics do not
  // depend on the worker count.
  const int workers = std::max(1, std::min(options.workers, options.n));
  std::vector<std::array<double, 6>> sums(options.n, std::array<double, 6>{});
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](int w) {
    try {
      for (int i = w; i < options.n; i += workers) {
        const SynthImage s = GenerateSynthImage(i, options);
        WriteImagePng(root / "images" / (s.id + ".png"), s.image);
        WriteLabelPng(root / "categories" / (s.id + ".png"), s.parsing);
        WriteLabelPng(root / "instances" / (s.id + ".png"), s.instance_ids);
        for (int c = 0; c < 3; ++c) {
          for (double v : s.image.plane(c)) {
            sums[i][c] += v;
            sums[i][3 + c] += v * v;
          }
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Manifest m;
  m.split = options.split;
  m.label_space = LabelSpace::Synthetic();
  m.has_instances = true;
  for (int i = 0; i < options.n; ++i) m.ids.push_back(SynthId(i));
  if (options.n > 0) {
    std::array<double, 6> total{};
    for (const auto& s : sums) {
      for (int k = 0; k < 6; ++k) total[k] += s[k];
    }
    const double count =
        static_cast<double>(options.n) * options.canvas * options.canvas;
    for (int c = 0; c < 3; ++c) {
      const double mean = total[c] / count;
      const double var = std::max(0.0, total[3 + c] / count - mean * mean);
      m.pixel_mean[c] = mean;
      m.pixel_std[c] = std::max(1e-3, std::sqrt(var));
    }
  }
  WriteManifest(root / "manifest.json", m);
  return m;
}

}  // namespace ce2p::data
