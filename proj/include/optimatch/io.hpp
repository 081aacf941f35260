#pragma once

#include "optimatch/experiment.hpp"
#include "optimatch/fusion.hpp"
#include "optimatch/scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <string_view>
#include <vector>

namespace optimatch {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kSceneSchemaId = "optimatch.scene/1";
inline constexpr std::string_view kFrameSchemaId = "optimatch.frame/1";
inline constexpr std::string_view kFusionReportSchemaId = "optimatch.fusion-report/1";
inline constexpr std::string_view kSweepSchemaId = "optimatch.sweep/1";

Json to_json(const Pose& pose);
Json to_json(const OrientedBox& box);
Json to_json(const Detection& detection);
Json to_json(const RigidTransform& transform);
Json to_json(const Bounds& bounds);
Json to_json(const SensorSpec& sensor);
Json to_json(const PipelineConfig& config);
Json to_json(const SweepConfig& config);
Json to_json(const ExperimentRecord& record);

// Scene document; `provenance` (may be null) is stored alongside.
Json scene_document(const Scene& scene, const Json& provenance = nullptr);

// One observer's detections in its local frame.
Json frame_document(const Pose& observer, const std::vector<Detection>& detections,
                    const Json& provenance = nullptr);

Json sweep_document(const std::vector<ExperimentRecord>& records, const SweepConfig& config);

// Parsers throw MalformedInput naming the offending field path.
Pose parse_pose(const Json& j, const std::string& path);
OrientedBox parse_box(const Json& j, const std::string& path);
Detection parse_detection(const Json& j, const std::string& path);
Scene parse_scene(const Json& document);
std::vector<Detection> parse_frame(const Json& document, Pose* observer = nullptr);

Scene load_scene(const std::filesystem::path& path);

// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& document);

}  // namespace optimatch
