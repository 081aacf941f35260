#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <vector>

namespace optimatch {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Wraps an angle in radians into (-pi, pi].
double wrap_angle(double radians);

double deg_to_rad(double degrees);
double rad_to_deg(double radians);

// Vehicle state in the world frame. angles = (pitch, roll, yaw), radians,
// composed as Rx(pitch) * Ry(roll) * Rz(yaw).
struct Pose {
  Vec3 position = Vec3::Zero();
  Vec3 angles = Vec3::Zero();

  double yaw() const { return angles.z(); }
};

// Maps points x to rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 operator()(const Vec3& point) const {
    return rotation * point + translation;
  }

  RigidTransform inverse() const;

  // Heading contributed by the rotation: atan2(R(1,0), R(0,0)).
  double yaw() const;
};

// outer ∘ inner: applies `inner` first.
RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner);

// True when R^T R = I and det R = +1 within `tolerance`.
bool is_rotation(const Mat3& rotation, double tolerance = 1e-9);

// Gravity-aligned 3D box. extent = (length, width, height), all > 0.
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  double yaw = 0.0;
  Vec3 extent = Vec3::Ones();

  double volume() const { return extent.prod(); }
};

Mat3 rotation_x(double angle);
Mat3 rotation_y(double angle);
Mat3 rotation_z(double angle);

// Rx(angles[0]) * Ry(angles[1]) * Rz(angles[2]).
Mat3 rotation_from_euler(const Vec3& angles);

// Transform taking a vehicle's local frame to the world frame.
RigidTransform world_from_local(const Pose& pose);

// Transform taking CAV-local coordinates into the Ego frame, built from the
// Euler-angle difference of the two poses. The position difference is
// rotated into the Ego frame.
RigidTransform relative_transform(const Pose& ego, const Pose& cav);

OrientedBox apply(const RigidTransform& transform, const OrientedBox& box);

// Rotation angle of R in [0, pi], equal to arccos(0.5 * tr(R) - 0.5).
double log_rotation(const Mat3& rotation);

// Bird's-eye-view corners of the box footprint, counter-clockwise.
std::vector<Vec2> footprint(const OrientedBox& box);

// Signed shoelace area; positive for counter-clockwise polygons.
double polygon_area(const std::vector<Vec2>& polygon);

// Intersection of two convex counter-clockwise polygons
// (Sutherland-Hodgman clipping).
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject,
                              const std::vector<Vec2>& clip);

// Rotated-box IoU: BEV footprint intersection times vertical overlap over
// union volume. Symmetric, in [0, 1].
double box_iou_3d(const OrientedBox& a, const OrientedBox& b);

}  // namespace optimatch
