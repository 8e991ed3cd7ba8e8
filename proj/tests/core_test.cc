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

#include <cmath>
#include <random>

#include "ce2p/core/label_ops.h"
#include "ce2p/core/types.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace ce2p {
namespace {

using testing::MakeGrid;
using testing::RandomLabels;
using testing::RandomVolume;

TEST(GridTest, RejectsNegativeDimensions) {
  EXPECT_THROW(Grid<int>(-1, 2), StructuralError);
}

TEST(GridTest, RowMajorAccess) {
  Grid<int> g(2, 3, 7);
  g.at(1, 2) = 5;
  EXPECT_EQ(g[5], 5);
  EXPECT_EQ(g[0], 7);
  EXPECT_TRUE(g.Contains(1, 2));
  EXPECT_FALSE(g.Contains(2, 0));
  EXPECT_FALSE(g.Contains(0, -1));
}

TEST(LabelSpaceTest, BuiltinSpacesAreValid) {
  EXPECT_NO_THROW(LabelSpace::Lip().Validate());
  EXPECT_NO_THROW(LabelSpace::Synthetic().Validate());
  EXPECT_EQ(LabelSpace::Lip().num_classes, 20);
}

TEST(LabelSpaceTest, RejectsBrokenSpaces) {
  LabelSpace s = LabelSpace::Synthetic();
  s.lr_pairs.push_back({6, 8});
  EXPECT_THROW(s.Validate(), StructuralError);

  s = LabelSpace::Synthetic();
  s.lr_pairs.push_back({4, 6});  // 4 already paired
  EXPECT_THROW(s.Validate(), StructuralError);

  s = LabelSpace::Synthetic();
  s.ignore_id = 3;
  EXPECT_THROW(s.Validate(), StructuralError);

  s = LabelSpace::Synthetic();
  s.lr_pairs.push_back({0, 1});  // background cannot be mirrored
  EXPECT_THROW(s.Validate(), StructuralError);
}

TEST(LabelSpaceTest, MirrorTableSwapsPairs) {
  const auto t = LabelSpace::Synthetic().MirrorTable();
  EXPECT_EQ(t, (std::vector<int>{0, 1, 2, 3, 5, 4, 7, 6}));
}

TEST(ConfidenceVolumeTest, RejectsWrongScoreCount) {
  EXPECT_THROW(ConfidenceVolume(2, 2, 2, std::vector<double>(7)),
               StructuralError);
}

TEST(ConfidenceVolumeTest, ProbabilityCheck) {
  ConfidenceVolume v(2, 1, 2, std::vector<double>{0.3, 1.0, 0.7, 0.0});
  EXPECT_TRUE(v.IsProbability());
  v.at(0, 0, 0) = 0.31;
  EXPECT_FALSE(v.IsProbability());
  v.at(0, 0, 0) = NAN;
  EXPECT_FALSE(v.AllFinite());
}

TEST(ArgmaxLabelsTest, TiesGoToLowestIndex) {
  ConfidenceVolume v(3, 1, 3,
                     std::vector<double>{1, 0, 2,   // class 0
                                         1, 5, 2,   // class 1
                                         0, 5, 2});  // class 2
  EXPECT_EQ(ArgmaxLabels(v), MakeGrid<std::int32_t>(1, 3, {0, 1, 0}));
}

TEST(SoftmaxTest, UniformLogitsGiveUniformProbabilities) {
  const ConfidenceVolume p = SoftmaxNormalize(ConfidenceVolume(5, 2, 2, 3.0));
  EXPECT_TRUE(p.normalized());
  for (double v : p.scores()) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(SoftmaxTest, StableForLargeLogits) {
  ConfidenceVolume v(2, 1, 1, std::vector<double>{1000.0, 0.0});
  const ConfidenceVolume p = SoftmaxNormalize(v);
  EXPECT_TRUE(p.AllFinite());
  EXPECT_NEAR(p.at(0, 0, 0), 1.0, 1e-12);
}

TEST(SoftmaxTest, RandomVolumesAreNormalized) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    EXPECT_TRUE(SoftmaxNormalize(RandomVolume(6, 3, 4, rng, -20, 20))
                    .IsProbability(1e-12));
  }
}

TEST(HflipTest, VolumeMirrorsWidthAndSwapsPairs) {
  const LabelSpace s = LabelSpace::Synthetic();
  ConfidenceVolume v(8, 1, 2, 0.0);
  v.at(4, 0, 0) = 1.0;  // left-arm score at x = 0
  v.at(1, 0, 1) = 2.0;  // hair score at x = 1
  const ConfidenceVolume f = HflipVolume(v, s);
  EXPECT_EQ(f.at(5, 0, 1), 1.0);
  EXPECT_EQ(f.at(4, 0, 1), 0.0);
  EXPECT_EQ(f.at(1, 0, 0), 2.0);
}

TEST(HflipTest, VolumeFlipIsAnInvolution) {
  const LabelSpace s = LabelSpace::Lip();
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const ConfidenceVolume v = RandomVolume(20, 3, 5, rng);
    const ConfidenceVolume back = HflipVolume(HflipVolume(v, s), s);
    EXPECT_TRUE(std::equal(v.scores().begin(), v.scores().end(),
                           back.scores().begin()));
  }
}

TEST(HflipTest, LabelFlipMatchesArgmaxOfFlippedVolume) {
  const LabelSpace s = LabelSpace::Synthetic();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ConfidenceVolume v = RandomVolume(8, 4, 7, rng);
    EXPECT_EQ(ArgmaxLabels(HflipVolume(v, s)),
              HflipLabels(ArgmaxLabels(v), s));
  }
}

TEST(HflipTest, LabelFlipKeepsIgnoreAndIsAnInvolution) {
  const LabelSpace s = LabelSpace::Synthetic();
  std::mt19937_64 rng(4);
  ParsingMap m = RandomLabels(5, 6, 8, rng);
  m.at(2, 0) = kIgnoreId;
  const ParsingMap f = HflipLabels(m, s);
  EXPECT_EQ(f.at(2, 5), kIgnoreId);
  EXPECT_EQ(HflipLabels(f, s), m);
}

TEST(HflipTest, RejectsVolumeWithoutPairedChannels) {
  EXPECT_THROW(HflipVolume(ConfidenceVolume(4, 1, 1), LabelSpace::Synthetic()),
               StructuralError);
}

TEST(MaskTest, TightBoxAndInstanceIds) {
  const Grid<std::int32_t> ids =
      MakeGrid<std::int32_t>(3, 4, {0, 2, 2, 0,  //
                                    0, 0, 2, 0,  //
                                    5, 0, 0, 0});
  const InstanceMaskSet masks = MasksFromInstanceIds(ids);
  ASSERT_EQ(masks.size(), 2u);
  EXPECT_EQ(masks[0].bbox, (BoundingBox{1, 0, 2, 1}));
  EXPECT_EQ(masks[1].bbox, (BoundingBox{0, 2, 0, 2}));
  EXPECT_EQ(masks[0].score, 1.0);
  EXPECT_FALSE(TightBox(Grid<std::uint8_t>(2, 2, 0)).has_value());
}

TEST(ValidateParsingTest, RejectsUnknownLabels) {
  ParsingMap m(1, 2, 0);
  m.at(0, 1) = kIgnoreId;
  EXPECT_NO_THROW(ValidateParsing(m, LabelSpace::Synthetic()));
  m.at(0, 0) = 8;
  EXPECT_THROW(ValidateParsing(m, LabelSpace::Synthetic()), StructuralError);
}

}  // namespace
}  // namespace ce2p
