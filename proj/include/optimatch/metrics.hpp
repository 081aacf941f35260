#pragma once

#include "optimatch/fusion.hpp"
#include "optimatch/geometry.hpp"

#include <span>
#include <vector>

namespace optimatch {

struct PrecisionRecallPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PrecisionRecallCurve {
  std::vector<PrecisionRecallPoint> points;  // one per detection, rank order
  double ap = 0.0;
};

struct TransformError {
  double rre = 0.0;  // radians
  double rte = 0.0;  // meters
};

// Link budget factors; bandwidth() multiplies them.
struct BandwidthSpec {
  double frame_rate = 0.0;  // Hz
  double items = 0.0;       // per frame
  double dims = 0.0;        // per item
  double bits = 0.0;        // per dim
};

struct FramedDetection {
  int frame = 0;
  Detection detection;
};

struct FramedBox {
  int frame = 0;
  OrientedBox box;
};

// Rotation angle of true^T * estimated.
double rre(const Mat3& rotation_true, const Mat3& rotation_est);
double rte(const Vec3& translation_true, const Vec3& translation_est);
TransformError transform_error(const RigidTransform& truth, const RigidTransform& estimate);

// All-point interpolated AP. Detections are ranked by confidence (ties keep
// input order); each claims the highest-IoU unclaimed ground truth of its
// frame with IoU >= iou_min. Throws EmptyGroundTruth when gts is empty and
// InvalidArgument unless iou_min lies in (0, 1).
PrecisionRecallCurve average_precision(std::span<const FramedDetection> detections,
                                       std::span<const FramedBox> ground_truth,
                                       double iou_min);

// Bits per second. Throws InvalidArgument unless every factor is positive.
double bandwidth(const BandwidthSpec& spec);

}  // namespace optimatch
