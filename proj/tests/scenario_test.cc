#include "optimatch/errors.hpp"
#include "optimatch/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace optimatch {
namespace {

constexpr double kPi = std::numbers::pi;

SensorSpec exact_sensor() {
  SensorSpec s;
  s.miss_rate = 0.0;
  s.center_jitter = 0.0;
  s.yaw_jitter = 0.0;
  s.false_positive_rate = 0.0;
  return s;
}

bool same_scene(const Scene& a, const Scene& b) {
  if (a.objects.size() != b.objects.size()) return false;
  for (std::size_t k = 0; k < a.objects.size(); ++k) {
    if (a.objects[k].center != b.objects[k].center || a.objects[k].yaw != b.objects[k].yaw ||
        a.objects[k].extent != b.objects[k].extent) {
      return false;
    }
  }
  return a.ego_pose.position == b.ego_pose.position && a.ego_pose.angles == b.ego_pose.angles &&
         a.cav_pose.position == b.cav_pose.position && a.cav_pose.angles == b.cav_pose.angles;
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  double sum = 0.0, sq = 0.0;
  for (const double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  for (const double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(xs.size() - 1))};
}

TEST(Layout, NamesRoundTrip) {
  EXPECT_EQ(parse_layout(to_string(Layout::Lane)), Layout::Lane);
  EXPECT_EQ(parse_layout(to_string(Layout::Uniform)), Layout::Uniform);
  EXPECT_THROW(parse_layout("spiral"), InvalidArgument);
}

TEST(GenerateScene, ZeroObjects) {
  const Scene s = generate_scene(0, Layout::Lane, 1);
  EXPECT_TRUE(s.objects.empty());
  EXPECT_TRUE(s.bounds.contains(s.ego_pose.position));
  EXPECT_TRUE(s.bounds.contains(s.cav_pose.position));
}

TEST(GenerateScene, NegativeCountThrows) {
  EXPECT_THROW(generate_scene(-1, Layout::Lane, 1), InvalidArgument);
}

TEST(GenerateScene, DeterministicPerSeed) {
  for (const Layout layout : {Layout::Lane, Layout::Uniform}) {
    EXPECT_TRUE(same_scene(generate_scene(20, layout, 42), generate_scene(20, layout, 42)));
    EXPECT_FALSE(same_scene(generate_scene(20, layout, 42), generate_scene(20, layout, 43)));
  }
}

TEST(GenerateScene, SeparationExtentsAndBounds) {
  for (const Layout layout : {Layout::Lane, Layout::Uniform}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Scene s = generate_scene(20, layout, seed);
      ASSERT_EQ(s.objects.size(), 20u);
      for (std::size_t i = 0; i < s.objects.size(); ++i) {
        const OrientedBox& o = s.objects[i];
        EXPECT_TRUE(s.bounds.contains(o.center));
        EXPECT_GE(o.extent.x(), 3.5);
        EXPECT_LE(o.extent.x(), 5.5);
        EXPECT_GE(o.extent.y(), 1.6);
        EXPECT_LE(o.extent.y(), 2.2);
        EXPECT_GE(o.extent.z(), 1.4);
        EXPECT_LE(o.extent.z(), 1.9);
        for (std::size_t j = i + 1; j < s.objects.size(); ++j) {
          EXPECT_GE((o.center - s.objects[j].center).head<2>().norm(), kMinSeparation);
        }
        EXPECT_GE((o.center - s.ego_pose.position).head<2>().norm(), kMinSeparation);
        EXPECT_GE((o.center - s.cav_pose.position).head<2>().norm(), kMinSeparation);
      }
    }
  }
}

TEST(GenerateScene, OvercrowdedSceneFailsPlacement) {
  EXPECT_THROW(generate_scene(400, Layout::Lane, 1), PlacementFailure);
}

TEST(GenerateScene, LaneLayoutHasSharedCoverage) {
  const SensorSpec sensor;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene s = generate_scene(20, Layout::Lane, seed);
    int shared = 0;
    for (const OrientedBox& o : s.objects) {
      shared += (in_view(s.ego_pose, sensor, o.center) && in_view(s.cav_pose, sensor, o.center)) ? 1 : 0;
    }
    EXPECT_GE(shared, 5) << "seed " << seed;
  }
}

TEST(PerturbPose, ZeroNoiseLeavesPose) {
  const Pose p{{1, 2, 3}, {0.1, 0.2, 0.3}};
  const Pose q = perturb_pose(p, {0.0, 0.0, 9});
  EXPECT_EQ(q.position, p.position);
  EXPECT_EQ(q.angles, p.angles);
}

TEST(PerturbPose, PositionMoments) {
  const Pose p{{10, -5, 0.5}, {0.02, -0.01, 1.0}};
  Stream stream(1, "moments");
  const int n = 100000;
  std::vector<std::vector<double>> axes(3);
  for (int k = 0; k < n; ++k) {
    const Pose q = perturb_pose(p, {1.0, 0.0, 0}, stream);
    for (int a = 0; a < 3; ++a) axes[a].push_back(q.position[a] - p.position[a]);
    ASSERT_EQ(q.angles.x(), p.angles.x());
    ASSERT_EQ(q.angles.y(), p.angles.y());
  }
  for (int a = 0; a < 3; ++a) {
    const Moments m = moments(axes[a]);
    EXPECT_GE(m.stddev, 0.99);
    EXPECT_LE(m.stddev, 1.01);
    EXPECT_LE(std::abs(m.mean), 3.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST(PerturbPose, HeadingMoments) {
  const Pose p{{0, 0, 0}, {0, 0, 0.3}};
  const double sigma = 2.5 * kPi / 180.0;
  Stream stream(2, "moments");
  const int n = 100000;
  std::vector<double> yaw;
  for (int k = 0; k < n; ++k) {
    const Pose q = perturb_pose(p, {0.0, sigma, 0}, stream);
    yaw.push_back(q.angles.z() - p.angles.z());
    ASSERT_EQ(q.position, p.position);
  }
  const Moments m = moments(yaw);
  EXPECT_NEAR(m.stddev, sigma, 0.01 * sigma);
  EXPECT_LE(std::abs(m.mean), 3.0 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST(PerturbPose, NegativeSigmaThrows) {
  EXPECT_THROW(perturb_pose(Pose{}, {-1.0, 0.0, 0}), InvalidArgument);
}

TEST(Observe, ObjectAheadIsDetectedInLocalFrame) {
  Scene s;
  s.objects.push_back({{1, 0, 0}, 0.0, {4, 2, 1.5}});
  Stream stream(3, "observe");
  const auto dets = observe(s, Pose{}, exact_sensor(), stream);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_LT((dets[0].box.center - Vec3(1, 0, 0)).norm(), 1e-12);
  EXPECT_EQ(dets[0].box.extent, Vec3(4, 2, 1.5));
  EXPECT_GE(dets[0].confidence, 0.5);
  EXPECT_LE(dets[0].confidence, 1.0);
}

TEST(Observe, ObjectBehindNarrowFovIsMissed) {
  Scene s;
  s.objects.push_back({{-10, 0, 0}, 0.0, {4, 2, 1.5}});
  SensorSpec sensor = exact_sensor();
  sensor.fov = kPi;
  Stream stream(4, "observe");
  EXPECT_TRUE(observe(s, Pose{}, sensor, stream).empty());
}

TEST(Observe, OutOfRangeIsMissed) {
  Scene s;
  s.objects.push_back({{60, 0, 0}, 0.0, {4, 2, 1.5}});
  Stream stream(5, "observe");
  EXPECT_TRUE(observe(s, Pose{}, exact_sensor(), stream).empty());
}

TEST(Observe, MissRateMoment) {
  Scene s;
  for (int k = 0; k < 10; ++k) s.objects.push_back({{8.0 * k - 36.0, 3.0, 0.8}, 0.0, {4, 2, 1.5}});
  SensorSpec sensor = exact_sensor();
  sensor.miss_rate = 0.2;
  Stream stream(6, "observe");
  const int trials = 10000;
  long detected = 0;
  for (int t = 0; t < trials; ++t) detected += static_cast<long>(observe(s, Pose{}, sensor, stream).size());
  EXPECT_NEAR(static_cast<double>(detected) / (10.0 * trials), 0.8, 0.01);
}

TEST(Observe, FalsePositivesFollowRateAndStayInView) {
  Scene s;
  SensorSpec sensor = exact_sensor();
  sensor.false_positive_rate = 0.5;
  sensor.fov = kPi / 2;
  Stream stream(7, "observe");
  const int trials = 20000;
  long count = 0;
  for (int t = 0; t < trials; ++t) {
    for (const Detection& d : observe(s, Pose{}, sensor, stream)) {
      ++count;
      EXPECT_LE(d.box.center.head<2>().norm(), sensor.range + 1e-9);
      EXPECT_LE(std::abs(std::atan2(d.box.center.y(), d.box.center.x())), sensor.fov / 2 + 1e-9);
      EXPECT_GE(d.confidence, 0.3);
      EXPECT_LE(d.confidence, 0.7);
    }
  }
  EXPECT_NEAR(static_cast<double>(count) / trials, 0.5, 0.02);
}

TEST(Observe, ExactDetectionsInvertToWorld) {
  const SensorSpec sensor = exact_sensor();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene s = generate_scene(20, Layout::Uniform, seed);
    Stream stream(seed, "observe");
    const Observation obs = observe_labeled(s, s.cav_pose, sensor, stream);
    const RigidTransform world = world_from_local(s.cav_pose);
    for (std::size_t k = 0; k < obs.detections.size(); ++k) {
      const OrientedBox back = apply(world, obs.detections[k].box);
      const OrientedBox& truth = s.objects[obs.object_ids[k]];
      EXPECT_LT((back.center - truth.center).norm(), 1e-9);
      EXPECT_NEAR(wrap_angle(back.yaw - truth.yaw), 0.0, 1e-9);
    }
  }
}

TEST(Observe, SameStreamGivesSameDetections) {
  const Scene s = generate_scene(20, Layout::Lane, 8);
  const SensorSpec sensor;
  Stream a(8, "observe"), b(8, "observe");
  const auto da = observe(s, s.ego_pose, sensor, a);
  const auto db = observe(s, s.ego_pose, sensor, b);
  ASSERT_EQ(da.size(), db.size());
  for (std::size_t k = 0; k < da.size(); ++k) {
    EXPECT_EQ(da[k].box.center, db[k].box.center);
    EXPECT_EQ(da[k].confidence, db[k].confidence);
  }
}

TEST(SensorSpec, ValidateRejectsBadRates) {
  SensorSpec s;
  s.miss_rate = 1.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = {};
  s.range = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = {};
  s.center_jitter = -0.1;
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(VisibleGroundTruth, UnionOfBothViewsInEgoFrame) {
  SensorSpec sensor;
  sensor.range = 30.0;
  Scene s;
  s.ego_pose = {{0, 0, 0}, {0, 0, kPi / 2}};
  s.cav_pose = {{40, 0, 0}, {0, 0, 0}};
  s.objects = {{{10, 0, 0}, 0.0, {4, 2, 1.5}},
               {{60, 0, 0}, 0.0, {4, 2, 1.5}},
               {{0, 100, 0}, 0.0, {4, 2, 1.5}}};
  const auto gt = visible_ground_truth(s, sensor);
  ASSERT_EQ(gt.size(), 2u);
  EXPECT_LT((gt[0].center - Vec3(0, -10, 0)).norm(), 1e-9);
  EXPECT_LT((gt[1].center - Vec3(0, -60, 0)).norm(), 1e-9);
  EXPECT_NEAR(gt[0].yaw, -kPi / 2, 1e-12);
}

TEST(Rng, DerivedStreamsAreReproducibleAndDistinct) {
  Stream a(1, "x", 2, 3), b(1, "x", 2, 3), c(1, "x", 2, 4), d(1, "y", 2, 3);
  const double va = a.uniform(0, 1);
  EXPECT_EQ(va, b.uniform(0, 1));
  EXPECT_NE(va, c.uniform(0, 1));
  EXPECT_NE(va, d.uniform(0, 1));
  EXPECT_NE(derive_seed(1, "x"), derive_seed(2, "x"));
}

}  // namespace
}  // namespace optimatch
