#include "optimatch/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace optimatch {

double wrap_angle(double radians) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (radians > -std::numbers::pi && radians <= std::numbers::pi) return radians;
  double shifted = std::fmod(radians + std::numbers::pi, kTwoPi);
  if (shifted <= 0.0) shifted += kTwoPi;
  return shifted - std::numbers::pi;
}

double deg_to_rad(double degrees) { return degrees * std::numbers::pi / 180.0; }
double rad_to_deg(double radians) { return radians * 180.0 / std::numbers::pi; }

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

double RigidTransform::yaw() const {
  return std::atan2(rotation(1, 0), rotation(0, 0));
}

RigidTransform compose(const RigidTransform& outer,
                       const RigidTransform& inner) {
  RigidTransform out;
  out.rotation = outer.rotation * inner.rotation;
  out.translation = outer.rotation * inner.translation + outer.translation;
  return out;
}

bool is_rotation(const Mat3& rotation, double tolerance) {
  const double orth = (rotation.transpose() * rotation - Mat3::Identity())
                          .cwiseAbs()
                          .maxCoeff();
  return orth <= tolerance && std::abs(rotation.determinant() - 1.0) <= tolerance;
}

Mat3 rotation_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rotation_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rotation_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Mat3 rotation_from_euler(const Vec3& angles) {
  return rotation_x(angles.x()) * rotation_y(angles.y()) *
         rotation_z(angles.z());
}

RigidTransform world_from_local(const Pose& pose) {
  return {rotation_from_euler(pose.angles), pose.position};
}

RigidTransform relative_transform(const Pose& ego, const Pose& cav) {
  Vec3 delta;
  for (int k = 0; k < 3; ++k) delta[k] = wrap_angle(cav.angles[k] - ego.angles[k]);
  RigidTransform out;
  out.rotation = rotation_from_euler(delta);
  out.translation = rotation_from_euler(ego.angles).transpose() *
                    (cav.position - ego.position);
  return out;
}

OrientedBox apply(const RigidTransform& transform, const OrientedBox& box) {
  OrientedBox out = box;
  out.center = transform(box.center);
  out.yaw = wrap_angle(box.yaw + transform.yaw());
  return out;
}

double log_rotation(const Mat3& rotation) {
  // atan2 of the sine and cosine parts; same value as the clamped arccos of
  // the trace but without its loss of precision near 0 and pi.
  const Vec3 axis(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                  rotation(1, 0) - rotation(0, 1));
  return std::atan2(0.5 * axis.norm(), 0.5 * rotation.trace() - 0.5);
}

std::vector<Vec2> footprint(const OrientedBox& box) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const Vec2 along(c, s), across(-s, c);
  const Vec2 mid(box.center.x(), box.center.y());
  const Vec2 hl = 0.5 * box.extent.x() * along;
  const Vec2 hw = 0.5 * box.extent.y() * across;
  return {mid - hl - hw, mid + hl - hw, mid + hl + hw, mid - hl + hw};
}

double polygon_area(const std::vector<Vec2>& polygon) {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = polygon[i];
    const Vec2& q = polygon[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject,
                              const std::vector<Vec2>& clip) {
  std::vector<Vec2> output = subject;
  const std::size_t n = clip.size();
  for (std::size_t e = 0; e < n && !output.empty(); ++e) {
    const Vec2 a = clip[e];
    const Vec2 edge = clip[(e + 1) % n] - a;
    const auto side = [&](const Vec2& p) { return cross(edge, p - a); };

    std::vector<Vec2> input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + input.size() - 1) % input.size()];
      const double s_cur = side(cur), s_prev = side(prev);
      if (s_cur >= 0.0) {
        if (s_prev < 0.0) {
          output.push_back(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
        }
        output.push_back(cur);
      } else if (s_prev >= 0.0) {
        output.push_back(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
      }
    }
  }
  return output;
}

namespace {

bool box_less(const OrientedBox& a, const OrientedBox& b) {
  const auto key = [](const OrientedBox& x) {
    return std::array<double, 7>{x.center.x(), x.center.y(), x.center.z(), x.yaw,
                                 x.extent.x(), x.extent.y(), x.extent.z()};
  };
  return key(a) < key(b);
}

}  // namespace

double box_iou_3d(const OrientedBox& first, const OrientedBox& second) {
  // Canonical argument order makes the result bit-symmetric.
  const bool swap = box_less(second, first);
  const OrientedBox& a = swap ? second : first;
  const OrientedBox& b = swap ? first : second;

  const double a_lo = a.center.z() - 0.5 * a.extent.z();
  const double a_hi = a.center.z() + 0.5 * a.extent.z();
  const double b_lo = b.center.z() - 0.5 * b.extent.z();
  const double b_hi = b.center.z() + 0.5 * b.extent.z();
  const double height = std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
  if (height <= 0.0) return 0.0;

  // Footprints farther apart than their half-diagonals cannot touch.
  const double reach = 0.5 * (a.extent.head<2>().norm() + b.extent.head<2>().norm());
  if ((a.center.head<2>() - b.center.head<2>()).norm() > reach) return 0.0;

  const double area = polygon_area(clip_convex(footprint(a), footprint(b)));
  if (area <= 0.0) return 0.0;

  const double inter = area * height;
  const double uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace optimatch
