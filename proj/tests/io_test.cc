#include "optimatch/errors.hpp"
#include "optimatch/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

namespace optimatch {
namespace {

std::string malformed_field(const Json& doc) {
  try {
    parse_scene(doc);
  } catch (const MalformedInput& e) {
    return e.field();
  }
  return "<accepted>";
}

TEST(SceneDocument, RoundTripIsExact) {
  const Scene scene = generate_scene(20, Layout::Lane, 5);
  const Json doc = scene_document(scene, {{"seed", 5}});
  const Scene back = parse_scene(Json::parse(doc.dump()));
  ASSERT_EQ(back.objects.size(), scene.objects.size());
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    EXPECT_EQ(back.objects[k].center, scene.objects[k].center);
    EXPECT_EQ(back.objects[k].yaw, scene.objects[k].yaw);
    EXPECT_EQ(back.objects[k].extent, scene.objects[k].extent);
  }
  EXPECT_EQ(back.ego_pose.position, scene.ego_pose.position);
  EXPECT_EQ(back.cav_pose.angles, scene.cav_pose.angles);
  EXPECT_EQ(back.bounds.x_max, scene.bounds.x_max);
  EXPECT_EQ(doc["schema"], std::string(kSceneSchemaId));
  EXPECT_EQ(doc["provenance"]["seed"], 5);
}

TEST(SceneDocument, MalformedFieldsAreNamed) {
  const Json good = scene_document(generate_scene(3, Layout::Lane, 1));

  Json doc = good;
  doc["schema"] = "optimatch.scene/0";
  EXPECT_EQ(malformed_field(doc), "$.schema");

  doc = good;
  doc.erase("ego_pose");
  EXPECT_EQ(malformed_field(doc), "$.ego_pose");

  doc = good;
  doc["objects"][2]["extent"][0] = -1.0;
  EXPECT_EQ(malformed_field(doc), "$.objects[2].extent[0]");

  doc = good;
  doc["objects"][1]["yaw"] = "north";
  EXPECT_EQ(malformed_field(doc), "$.objects[1].yaw");

  doc = good;
  doc["objects"][0]["center"] = Json::array({1.0, 2.0});
  EXPECT_EQ(malformed_field(doc), "$.objects[0].center");

  doc = good;
  doc["objects"][0]["center"][0] = 1000.0;
  EXPECT_EQ(malformed_field(doc), "$.objects[0].center");

  doc = good;
  doc["cav_pose"]["angles"][2] = 4.0;
  EXPECT_EQ(malformed_field(doc), "$.cav_pose.angles[2]");

  doc = good;
  doc["bounds"].erase("y_max");
  EXPECT_EQ(malformed_field(doc), "$.bounds.y_max");

  doc = good;
  doc["objects"] = 3;
  EXPECT_EQ(malformed_field(doc), "$.objects");
}

TEST(FrameDocument, RoundTrip) {
  const Pose observer{{1, 2, 0}, {0, 0, 0.5}};
  const std::vector<Detection> dets{{{{3, 4, 0.8}, 0.1, {4, 2, 1.6}}, 0.75},
                                    {{{-3, 1, 0.7}, -2.0, {5, 2.1, 1.4}}, 0.4}};
  Pose parsed_observer;
  const auto back = parse_frame(Json::parse(frame_document(observer, dets).dump()), &parsed_observer);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].box.center, dets[1].box.center);
  EXPECT_EQ(back[1].confidence, 0.4);
  EXPECT_EQ(parsed_observer.angles, observer.angles);
}

TEST(FrameDocument, ConfidenceOutOfRangeIsNamed) {
  Json doc = frame_document(Pose{}, {{{{3, 4, 0.8}, 0.1, {4, 2, 1.6}}, 0.75}});
  doc["detections"][0]["confidence"] = 1.5;
  try {
    parse_frame(doc);
    FAIL();
  } catch (const MalformedInput& e) {
    EXPECT_EQ(e.field(), "$.detections[0].confidence");
  }
}

TEST(SweepDocument, CarriesConfigAndRecords) {
  SweepConfig cfg;
  ExperimentRecord r;
  r.method = "corrected";
  r.mean_rre = deg_to_rad(1.0);
  const Json doc = sweep_document({r}, cfg);
  EXPECT_EQ(doc["schema"], std::string(kSweepSchemaId));
  EXPECT_EQ(doc["config"]["master_seed"], cfg.master_seed);
  EXPECT_EQ(doc["config"]["methods"].size(), 3u);
  EXPECT_NEAR(doc["records"][0]["mean_rre_deg"].get<double>(), 1.0, 1e-12);
}

TEST(Files, WriteThenLoadScene) {
  const auto dir = std::filesystem::temp_directory_path() / "optimatch_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "scene.json";
  const Scene scene = generate_scene(7, Layout::Uniform, 3);
  write_json(path, scene_document(scene));
  EXPECT_EQ(load_scene(path).objects.size(), 7u);

  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_THROW(load_scene(dir / "broken.json"), MalformedInput);
  EXPECT_THROW(load_scene(dir / "missing.json"), MalformedInput);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace optimatch
