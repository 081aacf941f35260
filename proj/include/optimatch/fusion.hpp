#pragma once

#include "optimatch/association.hpp"
#include "optimatch/geometry.hpp"
#include "optimatch/registration.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace optimatch {

struct Detection {
  OrientedBox box;
  double confidence = 1.0;  // [0, 1]
};

enum class DrivingMode {
  SingleVehicle,
  UncorrectedCooperative,
  CorrectedCooperative,
};

std::string_view to_string(DrivingMode mode);

struct PipelineConfig {
  double nms_iou_threshold = 0.15;
  int min_pairs_for_correction = 3;
  AssociationConfig association;
  RansacConfig registration;

  void validate() const;
};

struct FusionOutput {
  std::vector<Detection> objects;
  RigidTransform pose_transform;    // from the reported poses
  RigidTransform applied_transform;  // correction ∘ pose_transform
  bool correction_applied = false;
  DrivingMode mode = DrivingMode::SingleVehicle;
  AssignmentResult association;
  std::optional<RegistrationResult> registration;
  std::string fallback_reason;  // why correction was skipped, if it was
};

// Greedy hard NMS. Visits detections by (confidence desc, input index asc),
// keeps each survivor and drops later ones with IoU >= threshold against it.
std::vector<Detection> nms(std::span<const Detection> detections,
                           double iou_threshold);

DrivingMode cooperative_mode(const AssignmentResult& association, int min_pairs,
                             int sample_size);

// Maps CAV detections through `transform` into the Ego frame.
std::vector<Detection> transform_detections(const RigidTransform& transform,
                                            std::span<const Detection> detections);

// Plain late fusion: NMS over Ego detections and CAV detections mapped by the
// pose-derived transform, with no association or correction.
std::vector<Detection> late_fusion(const Pose& ego_pose, const Pose& cav_pose,
                                   std::span<const Detection> ego_detections,
                                   std::span<const Detection> cav_detections,
                                   double iou_threshold);

// Full pipeline for one Ego/CAV frame. Never throws for registration
// failures; those fall back to the pose-derived transform.
FusionOutput fuse_frame(const Pose& ego_pose, const Pose& cav_pose,
                        std::span<const Detection> ego_detections,
                        std::span<const Detection> cav_detections,
                        const PipelineConfig& config);

}  // namespace optimatch
