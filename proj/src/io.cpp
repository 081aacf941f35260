#include "optimatch/io.hpp"

#include "optimatch/errors.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace optimatch {
namespace {

Json vec3(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

const Json& member(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) throw MalformedInput(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw MalformedInput(path + "." + key, "missing field");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw MalformedInput(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw MalformedInput(path, "expected a finite number");
  return v;
}

double number_field(const Json& j, const std::string& path, const char* key) {
  return number(member(j, path, key), path + "." + key);
}

Vec3 vec3_field(const Json& j, const std::string& path, const char* key) {
  const Json& v = member(j, path, key);
  const std::string here = path + "." + key;
  if (!v.is_array() || v.size() != 3) throw MalformedInput(here, "expected an array of 3 numbers");
  return {number(v[0], here + "[0]"), number(v[1], here + "[1]"), number(v[2], here + "[2]")};
}

void check_schema(const Json& document, std::string_view expected) {
  const Json& s = member(document, "$", "schema");
  if (!s.is_string() || s.get<std::string>() != expected) {
    throw MalformedInput("$.schema", "expected \"" + std::string(expected) + "\"");
  }
}

}  // namespace

Json to_json(const Pose& pose) {
  return {{"position", vec3(pose.position)}, {"angles", vec3(pose.angles)}};
}

Json to_json(const OrientedBox& box) {
  return {{"center", vec3(box.center)}, {"yaw", box.yaw}, {"extent", vec3(box.extent)}};
}

Json to_json(const Detection& detection) {
  return {{"box", to_json(detection.box)}, {"confidence", detection.confidence}};
}

Json to_json(const RigidTransform& transform) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back({transform.rotation(r, 0), transform.rotation(r, 1), transform.rotation(r, 2)});
  }
  return {{"rotation", rows}, {"translation", vec3(transform.translation)}};
}

Json to_json(const Bounds& bounds) {
  return {{"x_min", bounds.x_min}, {"x_max", bounds.x_max},
          {"y_min", bounds.y_min}, {"y_max", bounds.y_max}};
}

Json to_json(const SensorSpec& s) {
  return {{"range_m", s.range},
          {"fov_rad", s.fov},
          {"miss_rate", s.miss_rate},
          {"center_jitter_m", s.center_jitter},
          {"yaw_jitter_rad", s.yaw_jitter},
          {"false_positive_rate", s.false_positive_rate},
          {"true_confidence", {s.true_confidence_min, s.true_confidence_max}},
          {"false_confidence", {s.false_confidence_min, s.false_confidence_max}}};
}

Json to_json(const PipelineConfig& c) {
  return {{"nms_iou_threshold", c.nms_iou_threshold},
          {"min_pairs_for_correction", c.min_pairs_for_correction},
          {"association",
           {{"dustbin_cost_m", c.association.dustbin_cost},
            {"epsilon_m", c.association.epsilon},
            {"iterations", c.association.iterations}}},
          {"registration",
           {{"rounds", c.registration.rounds},
            {"sample_size", c.registration.sample_size},
            {"inlier_threshold_m", c.registration.inlier_threshold},
            {"seed", c.registration.seed},
            {"refit", c.registration.refit},
            {"max_resamples", c.registration.max_resamples}}}};
}

Json to_json(const SweepConfig& c) {
  Json methods = Json::array();
  for (const Method m : c.methods) methods.push_back(std::string(to_string(m)));
  return {{"sigma_p_grid_m", c.sigma_p_grid},
          {"sigma_phi_grid_deg", c.sigma_phi_grid_deg},
          {"mode", std::string(to_string(c.mode))},
          {"trials_per_cell", c.trials_per_cell},
          {"objects", c.n_objects},
          {"layout", std::string(to_string(c.layout))},
          {"ap_iou", c.ap_iou},
          {"methods", methods},
          {"master_seed", c.master_seed},
          {"sensor", to_json(c.sensor)},
          {"pipeline", to_json(c.pipeline)}};
}

Json to_json(const ExperimentRecord& r) {
  return {{"method", r.method},
          {"sigma_p_m", r.sigma_p_m},
          {"sigma_phi_deg", r.sigma_phi_deg},
          {"ap", r.ap},
          {"mean_rre_deg", rad_to_deg(r.mean_rre)},
          {"mean_rte_m", r.mean_rte},
          {"mean_inlier_ratio", r.mean_inlier_ratio},
          {"trials", r.trials}};
}

Json scene_document(const Scene& scene, const Json& provenance) {
  Json objects = Json::array();
  for (const OrientedBox& b : scene.objects) objects.push_back(to_json(b));
  Json doc = {{"schema", kSceneSchemaId},
              {"ego_pose", to_json(scene.ego_pose)},
              {"cav_pose", to_json(scene.cav_pose)},
              {"bounds", to_json(scene.bounds)},
              {"objects", objects}};
  if (!provenance.is_null()) doc["provenance"] = provenance;
  return doc;
}

Json frame_document(const Pose& observer, const std::vector<Detection>& detections,
                    const Json& provenance) {
  Json list = Json::array();
  for (const Detection& d : detections) list.push_back(to_json(d));
  Json doc = {{"schema", kFrameSchemaId}, {"observer", to_json(observer)}, {"detections", list}};
  if (!provenance.is_null()) doc["provenance"] = provenance;
  return doc;
}

Json sweep_document(const std::vector<ExperimentRecord>& records, const SweepConfig& config) {
  Json list = Json::array();
  for (const ExperimentRecord& r : records) list.push_back(to_json(r));
  return {{"schema", kSweepSchemaId}, {"config", to_json(config)}, {"records", list}};
}

Pose parse_pose(const Json& j, const std::string& path) {
  Pose p;
  p.position = vec3_field(j, path, "position");
  p.angles = vec3_field(j, path, "angles");
  for (int k = 0; k < 3; ++k) {
    if (p.angles[k] <= -std::numbers::pi || p.angles[k] > std::numbers::pi) {
      throw MalformedInput(path + ".angles[" + std::to_string(k) + "]", "angle outside (-pi, pi]");
    }
  }
  return p;
}

OrientedBox parse_box(const Json& j, const std::string& path) {
  OrientedBox b;
  b.center = vec3_field(j, path, "center");
  b.yaw = number_field(j, path, "yaw");
  if (b.yaw <= -std::numbers::pi || b.yaw > std::numbers::pi) {
    throw MalformedInput(path + ".yaw", "angle outside (-pi, pi]");
  }
  b.extent = vec3_field(j, path, "extent");
  for (int k = 0; k < 3; ++k) {
    if (!(b.extent[k] > 0.0)) {
      throw MalformedInput(path + ".extent[" + std::to_string(k) + "]", "extent must be positive");
    }
  }
  return b;
}

Detection parse_detection(const Json& j, const std::string& path) {
  Detection d;
  d.box = parse_box(member(j, path, "box"), path + ".box");
  d.confidence = number_field(j, path, "confidence");
  if (d.confidence < 0.0 || d.confidence > 1.0) {
    throw MalformedInput(path + ".confidence", "confidence must lie in [0, 1]");
  }
  return d;
}

Scene parse_scene(const Json& document) {
  check_schema(document, kSceneSchemaId);
  Scene scene;
  scene.ego_pose = parse_pose(member(document, "$", "ego_pose"), "$.ego_pose");
  scene.cav_pose = parse_pose(member(document, "$", "cav_pose"), "$.cav_pose");
  const Json& bounds = member(document, "$", "bounds");
  scene.bounds = {number_field(bounds, "$.bounds", "x_min"), number_field(bounds, "$.bounds", "x_max"),
                  number_field(bounds, "$.bounds", "y_min"), number_field(bounds, "$.bounds", "y_max")};
  const Json& objects = member(document, "$", "objects");
  if (!objects.is_array()) throw MalformedInput("$.objects", "expected an array");
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const std::string path = "$.objects[" + std::to_string(k) + "]";
    scene.objects.push_back(parse_box(objects[k], path));
    if (!scene.bounds.contains(scene.objects.back().center)) {
      throw MalformedInput(path + ".center", "object lies outside the scene bounds");
    }
  }
  return scene;
}

std::vector<Detection> parse_frame(const Json& document, Pose* observer) {
  check_schema(document, kFrameSchemaId);
  const Pose pose = parse_pose(member(document, "$", "observer"), "$.observer");
  if (observer != nullptr) *observer = pose;
  const Json& list = member(document, "$", "detections");
  if (!list.is_array()) throw MalformedInput("$.detections", "expected an array");
  std::vector<Detection> out;
  for (std::size_t k = 0; k < list.size(); ++k) {
    out.push_back(parse_detection(list[k], "$.detections[" + std::to_string(k) + "]"));
  }
  return out;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("$", "cannot open " + path.string());
  Json document;
  try {
    document = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedInput("$", e.what());
  }
  return parse_scene(document);
}

void write_json(const std::filesystem::path& path, const Json& document) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << document.dump(2) << '\n';
}

}  // namespace optimatch
