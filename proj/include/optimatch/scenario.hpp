#pragma once

#include "optimatch/fusion.hpp"
#include "optimatch/geometry.hpp"
#include "optimatch/rng.hpp"

#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace optimatch {

enum class Layout { Lane, Uniform };

std::string_view to_string(Layout layout);
Layout parse_layout(std::string_view name);  // throws InvalidArgument

// Axis-aligned world extent on the ground plane, meters.
struct Bounds {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;

  bool contains(const Vec3& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
};

struct Scene {
  std::vector<OrientedBox> objects;  // world frame
  Pose ego_pose;
  Pose cav_pose;
  Bounds bounds;
};

// Zero-mean Gaussian pose noise: sigma_p on x, y, z and sigma_phi on yaw.
struct NoiseSpec {
  double sigma_p = 0.0;    // meters
  double sigma_phi = 0.0;  // radians
  std::uint64_t seed = 0;
};

struct SensorSpec {
  double range = 50.0;                      // meters
  double fov = 2.0 * std::numbers::pi;      // full angular width, radians
  double miss_rate = 0.1;
  double center_jitter = 0.05;              // meters, per axis
  double yaw_jitter = 0.5 * std::numbers::pi / 180.0;
  double false_positive_rate = 0.2;         // expected spurious boxes per frame
  double true_confidence_min = 0.5;
  double true_confidence_max = 1.0;
  double false_confidence_min = 0.3;
  double false_confidence_max = 0.7;

  void validate() const;
};

// Detections plus the index of the scene object each one came from
// (-1 for false positives).
struct Observation {
  std::vector<Detection> detections;
  std::vector<int> object_ids;
};

// Minimum distance between object centers (and between objects and the two
// vehicles) enforced during scene generation.
inline constexpr double kMinSeparation = 6.0;
inline constexpr int kMaxPlacementAttempts = 10000;

// Throws InvalidArgument on negative counts and PlacementFailure when
// rejection sampling runs out of attempts.
Scene generate_scene(int n_objects, Layout layout, std::uint64_t seed);

Pose perturb_pose(const Pose& pose, const NoiseSpec& spec, Stream& stream);
Pose perturb_pose(const Pose& pose, const NoiseSpec& spec);

// True when the world point lies inside the observer's range and FOV.
bool in_view(const Pose& observer, const SensorSpec& sensor, const Vec3& world_point);

Observation observe_labeled(const Scene& scene, const Pose& observer,
                            const SensorSpec& sensor, Stream& stream);

// Detections in the observer's local frame.
std::vector<Detection> observe(const Scene& scene, const Pose& observer,
                               const SensorSpec& sensor, Stream& stream);

// Objects in view of the Ego or the CAV (true poses), in the Ego frame.
std::vector<OrientedBox> visible_ground_truth(const Scene& scene,
                                              const SensorSpec& sensor);

}  // namespace optimatch
