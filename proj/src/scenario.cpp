#include "optimatch/scenario.hpp"

#include "optimatch/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace optimatch {

std::string_view to_string(Layout layout) {
  return layout == Layout::Lane ? "lane" : "uniform";
}

Layout parse_layout(std::string_view name) {
  if (name == "lane") return Layout::Lane;
  if (name == "uniform") return Layout::Uniform;
  throw InvalidArgument("unknown layout '" + std::string(name) + "'");
}

void SensorSpec::validate() const {
  if (!(range > 0.0)) throw InvalidArgument("sensor range must be > 0");
  if (!(fov > 0.0)) throw InvalidArgument("sensor fov must be > 0");
  if (!(miss_rate >= 0.0 && miss_rate < 1.0)) throw InvalidArgument("miss rate must lie in [0, 1)");
  if (!(false_positive_rate >= 0.0 && false_positive_rate < 1.0)) {
    throw InvalidArgument("false positive rate must lie in [0, 1)");
  }
  if (!(center_jitter >= 0.0) || !(yaw_jitter >= 0.0)) {
    throw InvalidArgument("jitter must be >= 0");
  }
  if (!(true_confidence_min <= true_confidence_max) ||
      !(false_confidence_min <= false_confidence_max)) {
    throw InvalidArgument("confidence range is inverted");
  }
}

namespace {

// Two carriageways of two lanes each, running along x.
constexpr std::array<double, 4> kLaneCenters{-5.25, -1.75, 1.75, 5.25};
constexpr double kRoadHalfLength = 65.0;

Vec3 sample_extent(Stream& stream) {
  return {stream.uniform(3.5, 5.5), stream.uniform(1.6, 2.2), stream.uniform(1.4, 1.9)};
}

double lane_heading(double lane_y) { return lane_y < 0.0 ? 0.0 : std::numbers::pi; }

}  // namespace

Scene generate_scene(int n_objects, Layout layout, std::uint64_t seed) {
  if (n_objects < 0) throw InvalidArgument("object count must be >= 0");
  Stream stream(seed, "scene");

  Scene scene;
  if (layout == Layout::Lane) {
    scene.bounds = {-kRoadHalfLength, kRoadHalfLength, -7.0, 7.0};
    scene.ego_pose.position = {stream.uniform(-25.0, -10.0), kLaneCenters[1], 0.0};
    const double cav_lane = kLaneCenters[stream.index_below(kLaneCenters.size())];
    scene.cav_pose.position = {stream.uniform(10.0, 25.0), cav_lane, 0.0};
    scene.cav_pose.angles.z() = lane_heading(cav_lane);
  } else {
    scene.bounds = {-50.0, 50.0, -50.0, 50.0};
    scene.ego_pose.position = {-15.0, 0.0, 0.0};
    scene.ego_pose.angles.z() = stream.uniform(-std::numbers::pi, std::numbers::pi);
    scene.cav_pose.position = {15.0, 0.0, 0.0};
    scene.cav_pose.angles.z() = stream.uniform(-std::numbers::pi, std::numbers::pi);
  }

  const auto far_enough = [&](const Vec3& c) {
    const auto clear = [&](const Vec3& other) {
      return (c.head<2>() - other.head<2>()).norm() >= kMinSeparation;
    };
    if (!clear(scene.ego_pose.position) || !clear(scene.cav_pose.position)) return false;
    for (const OrientedBox& o : scene.objects) {
      if (!clear(o.center)) return false;
    }
    return true;
  };

  int attempts = 0;
  while (static_cast<int>(scene.objects.size()) < n_objects) {
    if (++attempts > kMaxPlacementAttempts) {
      throw PlacementFailure("could not place " + std::to_string(n_objects) +
                             " objects with " + std::to_string(kMinSeparation) +
                             " m separation");
    }
    OrientedBox box;
    box.extent = sample_extent(stream);
    if (layout == Layout::Lane) {
      const double lane = kLaneCenters[stream.index_below(kLaneCenters.size())];
      box.center = {stream.uniform(scene.bounds.x_min, scene.bounds.x_max),
                    lane + stream.uniform(-0.3, 0.3), 0.0};
      box.yaw = wrap_angle(lane_heading(lane) + stream.uniform(-0.05, 0.05));
    } else {
      box.center = {stream.uniform(scene.bounds.x_min, scene.bounds.x_max),
                    stream.uniform(scene.bounds.y_min, scene.bounds.y_max), 0.0};
      box.yaw = stream.uniform(-std::numbers::pi, std::numbers::pi);
    }
    box.center.z() = 0.5 * box.extent.z();
    if (far_enough(box.center)) scene.objects.push_back(box);
  }
  return scene;
}

Pose perturb_pose(const Pose& pose, const NoiseSpec& spec, Stream& stream) {
  if (!(spec.sigma_p >= 0.0) || !(spec.sigma_phi >= 0.0)) {
    throw InvalidArgument("noise standard deviations must be >= 0");
  }
  Pose out = pose;
  for (int k = 0; k < 3; ++k) out.position[k] += stream.normal(0.0, spec.sigma_p);
  out.angles.z() = wrap_angle(out.angles.z() + stream.normal(0.0, spec.sigma_phi));
  return out;
}

Pose perturb_pose(const Pose& pose, const NoiseSpec& spec) {
  Stream stream(spec.seed, "pose-noise");
  return perturb_pose(pose, spec, stream);
}

bool in_view(const Pose& observer, const SensorSpec& sensor, const Vec3& world_point) {
  const Vec3 local = world_from_local(observer).inverse()(world_point);
  if (local.norm() > sensor.range) return false;
  if (sensor.fov >= 2.0 * std::numbers::pi) return true;
  return std::abs(std::atan2(local.y(), local.x())) <= 0.5 * sensor.fov;
}

Observation observe_labeled(const Scene& scene, const Pose& observer,
                            const SensorSpec& sensor, Stream& stream) {
  sensor.validate();
  const RigidTransform local_from_world = world_from_local(observer).inverse();

  Observation out;
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const OrientedBox& object = scene.objects[k];
    if (!in_view(observer, sensor, object.center)) continue;
    if (stream.bernoulli(sensor.miss_rate)) continue;

    Detection det;
    det.box = apply(local_from_world, object);
    for (int a = 0; a < 3; ++a) det.box.center[a] += stream.normal(0.0, sensor.center_jitter);
    det.box.yaw = wrap_angle(det.box.yaw + stream.normal(0.0, sensor.yaw_jitter));
    det.confidence = stream.uniform(sensor.true_confidence_min, sensor.true_confidence_max);
    out.detections.push_back(det);
    out.object_ids.push_back(static_cast<int>(k));
  }

  const int spurious = stream.poisson(sensor.false_positive_rate);
  const double half_fov = std::min(sensor.fov, 2.0 * std::numbers::pi) / 2.0;
  for (int s = 0; s < spurious; ++s) {
    // Uniform over the sensor's sector area.
    const double r = sensor.range * std::sqrt(stream.uniform(0.0, 1.0));
    const double bearing = stream.uniform(-half_fov, half_fov);
    Detection det;
    det.box.extent = sample_extent(stream);
    det.box.center = {r * std::cos(bearing), r * std::sin(bearing),
                      0.5 * det.box.extent.z() - observer.position.z()};
    det.box.yaw = stream.uniform(-std::numbers::pi, std::numbers::pi);
    det.confidence = stream.uniform(sensor.false_confidence_min, sensor.false_confidence_max);
    out.detections.push_back(det);
    out.object_ids.push_back(-1);
  }
  return out;
}

std::vector<Detection> observe(const Scene& scene, const Pose& observer,
                               const SensorSpec& sensor, Stream& stream) {
  return observe_labeled(scene, observer, sensor, stream).detections;
}

std::vector<OrientedBox> visible_ground_truth(const Scene& scene,
                                              const SensorSpec& sensor) {
  const RigidTransform ego_from_world = world_from_local(scene.ego_pose).inverse();
  std::vector<OrientedBox> out;
  for (const OrientedBox& object : scene.objects) {
    if (in_view(scene.ego_pose, sensor, object.center) ||
        in_view(scene.cav_pose, sensor, object.center)) {
      out.push_back(apply(ego_from_world, object));
    }
  }
  return out;
}

}  // namespace optimatch
