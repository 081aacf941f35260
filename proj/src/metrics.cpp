#include "optimatch/metrics.hpp"

#include "optimatch/errors.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace optimatch {

double rre(const Mat3& rotation_true, const Mat3& rotation_est) {
  return log_rotation(rotation_true.transpose() * rotation_est);
}

double rte(const Vec3& translation_true, const Vec3& translation_est) {
  return (translation_true - translation_est).norm();
}

TransformError transform_error(const RigidTransform& truth, const RigidTransform& estimate) {
  return {rre(truth.rotation, estimate.rotation), rte(truth.translation, estimate.translation)};
}

PrecisionRecallCurve average_precision(std::span<const FramedDetection> detections,
                                       std::span<const FramedBox> ground_truth,
                                       double iou_min) {
  if (!(iou_min > 0.0 && iou_min < 1.0)) throw InvalidArgument("iou_min must lie in (0, 1)");
  if (ground_truth.empty()) throw EmptyGroundTruth("average precision needs ground truth");

  std::map<int, std::vector<std::size_t>> gt_by_frame;
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    gt_by_frame[ground_truth[g].frame].push_back(g);
  }

  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].detection.confidence > detections[b].detection.confidence;
  });

  std::vector<bool> claimed(ground_truth.size(), false);
  PrecisionRecallCurve curve;
  const double total = static_cast<double>(ground_truth.size());
  double tp = 0.0, fp = 0.0;
  for (const std::size_t d : order) {
    const FramedDetection& det = detections[d];
    double best_iou = -1.0;
    std::size_t best = 0;
    if (const auto it = gt_by_frame.find(det.frame); it != gt_by_frame.end()) {
      for (const std::size_t g : it->second) {
        if (claimed[g]) continue;
        const double iou = box_iou_3d(det.detection.box, ground_truth[g].box);
        if (iou > best_iou) {
          best_iou = iou;
          best = g;
        }
      }
    }
    if (best_iou >= iou_min) {
      claimed[best] = true;
      tp += 1.0;
    } else {
      fp += 1.0;
    }
    curve.points.push_back({tp / total, tp / (tp + fp)});
  }

  // Area under the monotone precision envelope.
  double envelope = 0.0;
  std::vector<double> best_after(curve.points.size());
  for (std::size_t k = curve.points.size(); k-- > 0;) {
    envelope = std::max(envelope, curve.points[k].precision);
    best_after[k] = envelope;
  }
  double previous_recall = 0.0;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    curve.ap += (curve.points[k].recall - previous_recall) * best_after[k];
    previous_recall = curve.points[k].recall;
  }
  curve.ap = std::clamp(curve.ap, 0.0, 1.0);
  return curve;
}

double bandwidth(const BandwidthSpec& spec) {
  if (!(spec.frame_rate > 0.0 && spec.items > 0.0 && spec.dims > 0.0 && spec.bits > 0.0)) {
    throw InvalidArgument("bandwidth factors must all be positive");
  }
  return spec.frame_rate * spec.items * spec.dims * spec.bits;
}

}  // namespace optimatch
