#include "optimatch/fusion.hpp"

#include "optimatch/errors.hpp"

#include <algorithm>
#include <numeric>

namespace optimatch {

std::string_view to_string(DrivingMode mode) {
  switch (mode) {
    case DrivingMode::SingleVehicle:
      return "single-vehicle";
    case DrivingMode::UncorrectedCooperative:
      return "uncorrected-cooperative";
    case DrivingMode::CorrectedCooperative:
      return "corrected-cooperative";
  }
  return "unknown";
}

void PipelineConfig::validate() const {
  if (!(nms_iou_threshold > 0.0 && nms_iou_threshold < 1.0)) {
    throw InvalidArgument("NMS IoU threshold must lie in (0, 1)");
  }
  if (min_pairs_for_correction < 0) {
    throw InvalidArgument("min_pairs_for_correction must be >= 0");
  }
  if (!(association.dustbin_cost > 0.0)) throw InvalidArgument("dustbin cost must be > 0");
  if (!(association.epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (association.iterations < 1) throw InvalidArgument("Sinkhorn iterations must be >= 1");
  registration.validate();
}

std::vector<Detection> nms(std::span<const Detection> detections,
                           double iou_threshold) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  std::vector<bool> suppressed(detections.size(), false);
  std::vector<Detection> kept;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (suppressed[r]) continue;
    const Detection& keep = detections[order[r]];
    kept.push_back(keep);
    for (std::size_t s = r + 1; s < order.size(); ++s) {
      if (!suppressed[s] && box_iou_3d(keep.box, detections[order[s]].box) >= iou_threshold) {
        suppressed[s] = true;
      }
    }
  }
  return kept;
}

DrivingMode cooperative_mode(const AssignmentResult& association, int min_pairs,
                             int sample_size) {
  const auto pairs = static_cast<int>(association.pairs.size());
  if (pairs == 0) return DrivingMode::SingleVehicle;
  if (pairs >= std::max(min_pairs, sample_size)) return DrivingMode::CorrectedCooperative;
  return DrivingMode::UncorrectedCooperative;
}

std::vector<Detection> transform_detections(const RigidTransform& transform,
                                            std::span<const Detection> detections) {
  std::vector<Detection> out;
  out.reserve(detections.size());
  for (const Detection& d : detections) out.push_back({apply(transform, d.box), d.confidence});
  return out;
}

namespace {

std::vector<Detection> merged(std::span<const Detection> ego,
                              const std::vector<Detection>& cav) {
  std::vector<Detection> all(ego.begin(), ego.end());
  all.insert(all.end(), cav.begin(), cav.end());
  return all;
}

std::vector<OrientedBox> boxes_of(std::span<const Detection> detections) {
  std::vector<OrientedBox> out;
  out.reserve(detections.size());
  for (const Detection& d : detections) out.push_back(d.box);
  return out;
}

}  // namespace

std::vector<Detection> late_fusion(const Pose& ego_pose, const Pose& cav_pose,
                                   std::span<const Detection> ego_detections,
                                   std::span<const Detection> cav_detections,
                                   double iou_threshold) {
  const RigidTransform pose_transform = relative_transform(ego_pose, cav_pose);
  return nms(merged(ego_detections, transform_detections(pose_transform, cav_detections)),
             iou_threshold);
}

FusionOutput fuse_frame(const Pose& ego_pose, const Pose& cav_pose,
                        std::span<const Detection> ego_detections,
                        std::span<const Detection> cav_detections,
                        const PipelineConfig& config) {
  config.validate();

  FusionOutput out;
  out.pose_transform = relative_transform(ego_pose, cav_pose);
  out.applied_transform = out.pose_transform;

  const std::vector<Detection> cav_in_ego =
      transform_detections(out.pose_transform, cav_detections);
  const std::vector<OrientedBox> ego_boxes = boxes_of(ego_detections);
  const std::vector<OrientedBox> cav_boxes = boxes_of(cav_in_ego);

  out.association = associate(ego_boxes, cav_boxes, config.association);
  out.mode = cooperative_mode(out.association, config.min_pairs_for_correction,
                              config.registration.sample_size);

  if (out.mode == DrivingMode::SingleVehicle) {
    out.objects.assign(ego_detections.begin(), ego_detections.end());
    out.fallback_reason = "no co-visible objects";
    return out;
  }

  std::vector<Detection> cav_final = cav_in_ego;
  if (out.mode == DrivingMode::CorrectedCooperative) {
    MatchedSet matched;
    for (const IndexPair& p : out.association.pairs) {
      matched.push_back({ego_boxes[p.ego].center, cav_boxes[p.cav].center});
    }
    try {
      RegistrationResult reg = estimate_correction(matched, config.registration);
      if (reg.inlier_ratio > 0.0) {
        out.applied_transform = compose_final(out.pose_transform, reg.correction);
        cav_final = transform_detections(reg.correction, cav_in_ego);
        out.correction_applied = true;
      } else {
        out.fallback_reason = "no pair aligned within the inlier threshold";
      }
      out.registration = std::move(reg);
    } catch (const Error& e) {
      out.fallback_reason = e.what();
    }
  } else {
    out.fallback_reason = "too few pairs to determine a rigid transform";
  }

  out.objects = nms(merged(ego_detections, cav_final), config.nms_iou_threshold);
  return out;
}

}  // namespace optimatch
