#include "optimatch/errors.hpp"
#include "optimatch/metrics.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

namespace optimatch {
namespace {

OrientedBox car(double x, double y) { return {{x, y, 0.8}, 0.0, {4.0, 2.0, 1.6}}; }

FramedDetection fd(int frame, const OrientedBox& box, double confidence) {
  return {frame, {box, confidence}};
}

TEST(Rre, AnalyticCases) {
  const Mat3 r = testing::rz(0.7);
  EXPECT_NEAR(rre(r, r), 0.0, 1e-12);
  EXPECT_NEAR(rre(Mat3::Identity(), testing::rz(0.5)), 0.5, 1e-9);
}

TEST(Rre, SymmetricAndTriangle) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 500; ++k) {
    const Mat3 a = testing::random_transform(rng).rotation;
    const Mat3 b = testing::random_transform(rng).rotation;
    const Mat3 c = testing::random_transform(rng).rotation;
    EXPECT_NEAR(rre(a, b), rre(b, a), 1e-12);
    EXPECT_NEAR(rre(a, b), log_rotation(a.transpose() * b), 1e-15);
    EXPECT_LE(rre(a, c), rre(a, b) + rre(b, c) + 1e-9);
    EXPECT_GE(rre(a, b), 0.0);
    EXPECT_LE(rre(a, b), std::numbers::pi);
  }
}

TEST(Rte, AnalyticCases) {
  EXPECT_EQ(rte({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_NEAR(rte({0, 0, 0}, {3, 4, 0}), 5.0, 1e-12);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const Vec3 a = testing::random_vec(rng, -10, 10), b = testing::random_vec(rng, -10, 10);
    const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
    EXPECT_NEAR(rte(a, b), std::sqrt(dx * dx + dy * dy + dz * dz), 1e-12);
  }
}

TEST(TransformError, CombinesBoth) {
  const TransformError e = transform_error({Mat3::Identity(), {0, 0, 0}}, {testing::rz(0.25), {3, 4, 0}});
  EXPECT_NEAR(e.rre, 0.25, 1e-9);
  EXPECT_NEAR(e.rte, 5.0, 1e-12);
}

TEST(AveragePrecision, PerfectDetections) {
  const std::vector<FramedBox> gts{{0, car(0, 0)}, {0, car(10, 0)}, {1, car(0, 0)}};
  std::vector<FramedDetection> dets;
  for (const FramedBox& g : gts) dets.push_back(fd(g.frame, g.box, 1.0));
  EXPECT_DOUBLE_EQ(average_precision(dets, gts, 0.7).ap, 1.0);
}

TEST(AveragePrecision, NoDetections) {
  const std::vector<FramedBox> gts{{0, car(0, 0)}};
  const PrecisionRecallCurve c = average_precision({}, gts, 0.7);
  EXPECT_EQ(c.ap, 0.0);
  EXPECT_TRUE(c.points.empty());
}

TEST(AveragePrecision, HitThenMiss) {
  const std::vector<FramedBox> gts{{0, car(0, 0)}};
  OrientedBox shifted = car(0, 0);
  shifted.center.x() += 4.0 * (1.0 - 0.8) / (1.0 + 0.8);  // IoU 0.8 along the length
  const std::vector<FramedDetection> dets{fd(0, shifted, 0.9), fd(0, car(20, 0), 0.8)};
  ASSERT_NEAR(box_iou_3d(shifted, gts[0].box), 0.8, 1e-12);
  const PrecisionRecallCurve c = average_precision(dets, gts, 0.7);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_DOUBLE_EQ(c.points[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(c.points[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(c.points[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(c.points[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(c.ap, 1.0);
}

TEST(AveragePrecision, EnvelopeArea) {
  // Ranks: TP, FP, TP, FP over 3 ground truths. Precision envelope is
  // 1 up to recall 1/3 and 2/3 up to recall 2/3.
  const std::vector<FramedBox> gts{{0, car(0, 0)}, {0, car(10, 0)}, {0, car(20, 0)}};
  const std::vector<FramedDetection> dets{fd(0, car(0, 0), 0.9), fd(0, car(40, 0), 0.8),
                                          fd(0, car(10, 0), 0.7), fd(0, car(50, 0), 0.6)};
  const PrecisionRecallCurve c = average_precision(dets, gts, 0.7);
  EXPECT_NEAR(c.ap, 1.0 / 3.0 + (2.0 / 3.0) * (1.0 / 3.0), 1e-12);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    EXPECT_GE(c.points[k].recall, c.points[k - 1].recall);
  }
}

TEST(AveragePrecision, FramesDoNotCrossMatch) {
  const std::vector<FramedBox> gts{{0, car(0, 0)}};
  const std::vector<FramedDetection> dets{fd(1, car(0, 0), 0.9)};
  EXPECT_EQ(average_precision(dets, gts, 0.7).ap, 0.0);
}

TEST(AveragePrecision, GroundTruthClaimedOnce) {
  const std::vector<FramedBox> gts{{0, car(0, 0)}};
  const std::vector<FramedDetection> dets{fd(0, car(0, 0), 0.9), fd(0, car(0, 0), 0.8)};
  const PrecisionRecallCurve c = average_precision(dets, gts, 0.7);
  EXPECT_DOUBLE_EQ(c.points[1].precision, 0.5);
}

TEST(AveragePrecision, PicksHighestIouGroundTruth) {
  // The detection overlaps both; it must claim the closer one so the second
  // detection can take the other.
  const std::vector<FramedBox> gts{{0, car(0, 0)}, {0, car(0.8, 0)}};
  const std::vector<FramedDetection> dets{fd(0, car(0.6, 0), 0.9), fd(0, car(-0.3, 0), 0.8)};
  EXPECT_DOUBLE_EQ(average_precision(dets, gts, 0.7).ap, 1.0);
}

TEST(AveragePrecision, Errors) {
  EXPECT_THROW(average_precision({}, {}, 0.7), EmptyGroundTruth);
  const std::vector<FramedBox> gts{{0, car(0, 0)}};
  EXPECT_THROW(average_precision({}, gts, 0.0), InvalidArgument);
  EXPECT_THROW(average_precision({}, gts, 1.0), InvalidArgument);
}

TEST(AveragePrecision, BoundedAndDuplicationNeverHelps) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<FramedBox> gts;
    std::vector<FramedDetection> dets;
    for (int k = 0; k < 8; ++k) {
      const int frame = k % 3;
      const OrientedBox g = car(10.0 * k, 0);
      gts.push_back({frame, g});
      if (testing::uniform(rng, 0, 1) < 0.8) {
        OrientedBox d = g;
        d.center.x() += testing::uniform(rng, -0.6, 0.6);
        dets.push_back(fd(frame, d, testing::uniform(rng, 0, 1)));
      }
      if (testing::uniform(rng, 0, 1) < 0.3) {
        dets.push_back(fd(frame, car(10.0 * k + 5.0, 4.0), testing::uniform(rng, 0, 1)));
      }
    }
    const double ap = average_precision(dets, gts, 0.7).ap;
    EXPECT_GE(ap, 0.0);
    EXPECT_LE(ap, 1.0);
    std::vector<FramedDetection> doubled;
    for (const auto& d : dets) {
      doubled.push_back(d);
      doubled.push_back(d);
    }
    EXPECT_LE(average_precision(doubled, gts, 0.7).ap, ap + 1e-12);
  }
}

TEST(AveragePrecision, EqualConfidenceTieFollowsInputOrder) {
  const std::vector<FramedBox> gts{{0, car(0, 0)}};
  const std::vector<FramedDetection> hit_first{fd(0, car(0, 0), 0.5), fd(0, car(30, 0), 0.5)};
  const std::vector<FramedDetection> miss_first{fd(0, car(30, 0), 0.5), fd(0, car(0, 0), 0.5)};
  EXPECT_DOUBLE_EQ(average_precision(hit_first, gts, 0.7).ap, 1.0);
  EXPECT_DOUBLE_EQ(average_precision(miss_first, gts, 0.7).ap, 0.5);
}

TEST(Bandwidth, PaperLateFusionBudget) {
  EXPECT_EQ(bandwidth({10, 20, 8, 32}), 51200.0);
  EXPECT_EQ(bandwidth({10, 20, 8, 32}) / 1000.0, 51.2);
}

TEST(Bandwidth, UnitAndEarlyFusionScale) {
  EXPECT_EQ(bandwidth({1, 1, 1, 1}), 1.0);
  EXPECT_EQ(bandwidth({10, 60000, 4, 32}), 76.8e6);
  EXPECT_EQ(bandwidth({10, 240000, 4, 8}), 76.8e6);
}

TEST(Bandwidth, NonPositiveFactorThrows) {
  EXPECT_THROW(bandwidth({0, 20, 8, 32}), InvalidArgument);
  EXPECT_THROW(bandwidth({10, -1, 8, 32}), InvalidArgument);
}

}  // namespace
}  // namespace optimatch
