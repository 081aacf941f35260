// optimatch: scene generation, single-frame fusion, noise sweeps and
// bandwidth estimates for object-level cooperative perception.

#include "optimatch/errors.hpp"
#include "optimatch/experiment.hpp"
#include "optimatch/fusion.hpp"
#include "optimatch/io.hpp"
#include "optimatch/metrics.hpp"
#include "optimatch/scenario.hpp"

#include <CLI11.hpp>

#include <omp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

namespace om = optimatch;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kGenerationFailure = 3,
  kMalformedInput = 4,
};

// User-facing units (degrees) for the sensor and pipeline sub-configs.
struct SensorFlags {
  double range_m = 50.0;
  double fov_deg = 360.0;
  double miss_rate = 0.1;
  double center_jitter_m = 0.05;
  double yaw_jitter_deg = 0.5;
  double false_positive_rate = 0.2;

  om::SensorSpec spec() const {
    om::SensorSpec s;
    s.range = range_m;
    s.fov = om::deg_to_rad(fov_deg);
    s.miss_rate = miss_rate;
    s.center_jitter = center_jitter_m;
    s.yaw_jitter = om::deg_to_rad(yaw_jitter_deg);
    s.false_positive_rate = false_positive_rate;
    return s;
  }
};

void add_sensor_flags(CLI::App& cmd, SensorFlags& f) {
  cmd.add_option("--range-m", f.range_m, "Sensor range (m)")->group("Sensor");
  cmd.add_option("--fov-deg", f.fov_deg, "Sensor field of view, full width (deg)")->group("Sensor");
  cmd.add_option("--miss-rate", f.miss_rate, "Probability a visible object is missed")->group("Sensor");
  cmd.add_option("--center-jitter-m", f.center_jitter_m, "Detection center noise std (m)")->group("Sensor");
  cmd.add_option("--yaw-jitter-deg", f.yaw_jitter_deg, "Detection yaw noise std (deg)")->group("Sensor");
  cmd.add_option("--false-positive-rate", f.false_positive_rate,
                 "Expected spurious detections per frame")->group("Sensor");
}

void add_pipeline_flags(CLI::App& cmd, om::PipelineConfig& c) {
  const char* g = "Pipeline";
  cmd.add_option("--nms-iou", c.nms_iou_threshold, "NMS IoU suppression threshold")->group(g);
  cmd.add_option("--min-pairs", c.min_pairs_for_correction,
                 "Matched pairs required before estimating a correction")->group(g);
  cmd.add_option("--dustbin-m", c.association.dustbin_cost, "Dustbin cost alpha (m)")->group(g);
  cmd.add_option("--epsilon-m", c.association.epsilon, "Sinkhorn entropic regularization (m)")->group(g);
  cmd.add_option("--sinkhorn-iters", c.association.iterations, "Sinkhorn sweeps")->group(g);
  cmd.add_option("--rounds", c.registration.rounds, "Random-sampling rounds n_s")->group(g);
  cmd.add_option("--sample-size", c.registration.sample_size, "Pairs per sample w")->group(g);
  cmd.add_option("--tau-m", c.registration.inlier_threshold, "Inlier threshold tau (m)")->group(g);
  cmd.add_flag("!--no-refit", c.registration.refit,
               "Return the winning sample's transform without the least-squares refit")->group(g);
}

void print_scene_summary(const std::filesystem::path& path, const om::Scene& scene) {
  std::cout << path.string() << '\n' << "objects: " << scene.objects.size() << '\n';
}

int cmd_generate(int objects, const std::string& layout, std::uint64_t seed,
                 const std::filesystem::path& out) {
  const om::Scene scene = om::generate_scene(objects, om::parse_layout(layout), seed);
  const om::Json provenance = {{"command", "generate"},
                               {"objects", objects},
                               {"layout", layout},
                               {"seed", seed}};
  om::write_json(out, om::scene_document(scene, provenance));
  print_scene_summary(out, scene);
  return kOk;
}

struct FuseArgs {
  std::filesystem::path scene;
  std::filesystem::path out = "fusion.json";
  std::filesystem::path frames_dir;
  double sigma_p_m = 0.0;
  double sigma_phi_deg = 0.0;
  std::uint64_t seed = 7;
  SensorFlags sensor;
  om::PipelineConfig pipeline;
};

int cmd_fuse(const FuseArgs& a, int verbosity) {
  const om::Scene scene = om::load_scene(a.scene);
  const om::SensorSpec sensor = a.sensor.spec();

  om::Stream ego_stream(a.seed, "observe-ego");
  om::Stream cav_stream(a.seed, "observe-cav");
  const auto ego_dets = om::observe(scene, scene.ego_pose, sensor, ego_stream);
  const auto cav_dets = om::observe(scene, scene.cav_pose, sensor, cav_stream);
  const om::NoiseSpec noise{a.sigma_p_m, om::deg_to_rad(a.sigma_phi_deg), a.seed};
  const om::Pose cav_reported = om::perturb_pose(scene.cav_pose, noise);

  om::PipelineConfig pipeline = a.pipeline;
  pipeline.registration.seed = om::derive_seed(a.seed, "ransac");
  const om::FusionOutput fused =
      om::fuse_frame(scene.ego_pose, cav_reported, ego_dets, cav_dets, pipeline);

  const om::RigidTransform truth = om::relative_transform(scene.ego_pose, scene.cav_pose);
  const om::TransformError err = om::transform_error(truth, fused.applied_transform);
  const om::TransformError pose_err = om::transform_error(truth, fused.pose_transform);

  om::Json report = {
      {"mode", std::string(om::to_string(fused.mode))},
      {"pairs", fused.association.pairs.size()},
      {"correction_applied", fused.correction_applied},
      {"inlier_ratio", fused.registration ? fused.registration->inlier_ratio : 0.0},
      {"rre_deg", om::rad_to_deg(err.rre)},
      {"rte_m", err.rte},
      {"pose_only_rre_deg", om::rad_to_deg(pose_err.rre)},
      {"pose_only_rte_m", pose_err.rte},
      {"ego_detections", ego_dets.size()},
      {"cav_detections", cav_dets.size()},
      {"fused_detections", fused.objects.size()},
      {"fallback_reason", fused.fallback_reason},
      {"applied_transform", om::to_json(fused.applied_transform)},
      {"pose_transform", om::to_json(fused.pose_transform)},
      {"true_transform", om::to_json(truth)}};
  om::Json config = {{"scene", a.scene.string()},
                     {"seed", a.seed},
                     {"sigma_p_m", a.sigma_p_m},
                     {"sigma_phi_deg", a.sigma_phi_deg},
                     {"sensor", om::to_json(sensor)},
                     {"pipeline", om::to_json(pipeline)}};
  om::Json fused_list = om::Json::array();
  for (const om::Detection& d : fused.objects) fused_list.push_back(om::to_json(d));

  om::write_json(a.out, {{"schema", om::kFusionReportSchemaId},
                         {"config", config},
                         {"report", report},
                         {"fused", fused_list}});

  if (!a.frames_dir.empty()) {
    std::filesystem::create_directories(a.frames_dir);
    om::write_json(a.frames_dir / "ego_frame.json", om::frame_document(scene.ego_pose, ego_dets, config));
    om::write_json(a.frames_dir / "cav_frame.json", om::frame_document(cav_reported, cav_dets, config));
  }

  std::cout << std::setprecision(6) << "mode: " << report["mode"].get<std::string>() << '\n'
            << "pairs: " << fused.association.pairs.size() << '\n'
            << "inlier ratio: " << report["inlier_ratio"].get<double>() << '\n'
            << "RRE: " << report["rre_deg"].get<double>() << " deg\n"
            << "RTE: " << err.rte << " m\n"
            << "fused detections: " << fused.objects.size() << '\n';
  if (verbosity > 0 && !fused.fallback_reason.empty()) {
    std::cout << "fallback: " << fused.fallback_reason << '\n';
  }
  std::cout << "report: " << a.out.string() << '\n';
  return kOk;
}

struct SweepArgs {
  std::filesystem::path out = "sweep.csv";
  std::filesystem::path json_out;
  std::vector<std::string> methods{"no-fusion", "uncorrected", "corrected"};
  std::string mode = "separate";
  std::string layout = "lane";
  std::uint64_t seed = 2024;
  SensorFlags sensor;
  om::SweepConfig config;
};

int cmd_sweep(SweepArgs a, int verbosity) {
  om::SweepConfig& cfg = a.config;
  cfg.methods.clear();
  for (const std::string& m : a.methods) cfg.methods.push_back(om::parse_method(m));
  cfg.mode = om::parse_sweep_mode(a.mode);
  cfg.layout = om::parse_layout(a.layout);
  cfg.master_seed = a.seed;
  cfg.sensor = a.sensor.spec();
  cfg.validate();

  if (verbosity > 0) {
    std::cerr << "running " << om::sweep_cells(cfg).size() << " cells x " << cfg.trials_per_cell
              << " trials on " << (cfg.threads > 0 ? cfg.threads : omp_get_max_threads())
              << " threads\n";
  }
  const auto records = om::run_sweep(cfg);

  {
    std::ofstream out(a.out);
    if (!out) throw om::InvalidArgument("cannot write " + a.out.string());
    om::write_csv(out, records);
  }
  std::filesystem::path config_path = a.out;
  config_path += ".config.json";
  om::write_json(config_path, om::to_json(cfg));
  if (!a.json_out.empty()) om::write_json(a.json_out, om::sweep_document(records, cfg));

  std::cout << om::compare_methods(records).render();
  std::cout << "results: " << a.out.string() << " (" << records.size() << " rows)\n";
  return kOk;
}

struct BandwidthArgs {
  double frame_rate_hz = 10.0;
  double items = 20.0;
  double dims = 8.0;
  double bits = 32.0;
};

int cmd_bandwidth(const BandwidthArgs& a) {
  const double bps = om::bandwidth({a.frame_rate_hz, a.items, a.dims, a.bits});
  std::cout << std::setprecision(12) << "bandwidth: " << bps << " bps\n"
            << "           " << bps / 1e3 << " Kbps\n"
            << "           " << bps / 1e6 << " Mbps\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-level cooperative perception with optimal-transport pose correction"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Read options from a TOML/INI file (flags take precedence)");
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Increase output detail");

  std::uint64_t generate_seed = 7;
  int generate_objects = 20;
  std::string generate_layout = "lane";
  std::filesystem::path generate_out = "scene.json";
  auto* generate = app.add_subcommand("generate", "Generate a synthetic scene document");
  generate->add_option("--objects", generate_objects, "Number of objects")->check(CLI::NonNegativeNumber);
  generate->add_option("--layout", generate_layout, "Scene layout")->check(CLI::IsMember({"lane", "uniform"}));
  generate->add_option("--seed", generate_seed, "Random seed")->envname("OPTIMATCH_SEED");
  generate->add_option("--out", generate_out, "Output scene file");

  FuseArgs fuse_args;
  auto* fuse = app.add_subcommand("fuse", "Observe a scene from both vehicles and fuse one frame");
  fuse->add_option("--scene", fuse_args.scene, "Scene document")->required()->check(CLI::ExistingFile);
  fuse->add_option("--out", fuse_args.out, "Output fusion report");
  fuse->add_option("--frames-dir", fuse_args.frames_dir, "Also write both detection frames here");
  fuse->add_option("--sigma-p-m", fuse_args.sigma_p_m, "CAV position noise std (m)")->check(CLI::NonNegativeNumber);
  fuse->add_option("--sigma-phi-deg", fuse_args.sigma_phi_deg, "CAV heading noise std (deg)")
      ->check(CLI::NonNegativeNumber);
  fuse->add_option("--seed", fuse_args.seed, "Random seed")->envname("OPTIMATCH_SEED");
  add_sensor_flags(*fuse, fuse_args.sensor);
  add_pipeline_flags(*fuse, fuse_args.pipeline);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo noise sweep comparing fusion methods");
  sweep->add_option("--out", sweep_args.out, "Output CSV");
  sweep->add_option("--json", sweep_args.json_out, "Optional JSON mirror of the records");
  sweep->add_option("--sigma-p-grid-m", sweep_args.config.sigma_p_grid, "Position noise grid (m)")
      ->delimiter(',');
  sweep->add_option("--sigma-phi-grid-deg", sweep_args.config.sigma_phi_grid_deg,
                    "Heading noise grid (deg)")->delimiter(',');
  sweep->add_option("--mode", sweep_args.mode, "Cells to visit")
      ->check(CLI::IsMember({"position", "heading", "separate", "joint"}));
  sweep->add_option("--trials", sweep_args.config.trials_per_cell, "Frames per noise cell")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--objects", sweep_args.config.n_objects, "Objects per scene")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--layout", sweep_args.layout, "Scene layout")->check(CLI::IsMember({"lane", "uniform"}));
  sweep->add_option("--methods", sweep_args.methods, "Methods to compare")
      ->delimiter(',')
      ->check(CLI::IsMember({"no-fusion", "uncorrected", "corrected"}));
  sweep->add_option("--ap-iou", sweep_args.config.ap_iou, "IoU for a true positive");
  sweep->add_option("--seed", sweep_args.seed, "Master seed")->envname("OPTIMATCH_SEED");
  sweep->add_option("--threads", sweep_args.config.threads, "Worker threads (0 = all available)")
      ->check(CLI::NonNegativeNumber);
  add_sensor_flags(*sweep, sweep_args.sensor);
  add_pipeline_flags(*sweep, sweep_args.config.pipeline);

  BandwidthArgs bw;
  auto* bandwidth = app.add_subcommand("bandwidth", "Bandwidth of a periodic object or point stream");
  bandwidth->add_option("--frame-rate-hz", bw.frame_rate_hz, "Frames per second")->check(CLI::PositiveNumber);
  bandwidth->add_option("--items", bw.items, "Items (boxes or points) per frame")->check(CLI::PositiveNumber);
  bandwidth->add_option("--dims", bw.dims, "Dimensions per item")->check(CLI::PositiveNumber);
  bandwidth->add_option("--bits", bw.bits, "Bits per dimension")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << '\n' << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(generate_objects, generate_layout, generate_seed, generate_out);
    if (fuse->parsed()) return cmd_fuse(fuse_args, verbosity);
    if (sweep->parsed()) return cmd_sweep(sweep_args, verbosity);
    if (bandwidth->parsed()) return cmd_bandwidth(bw);
  } catch (const om::PlacementFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kGenerationFailure;
  } catch (const om::MalformedInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMalformedInput;
  } catch (const om::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
