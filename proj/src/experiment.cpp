#include "optimatch/experiment.hpp"

#include "optimatch/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace optimatch {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::NoFusion:
      return "no-fusion";
    case Method::Uncorrected:
      return "uncorrected";
    case Method::Corrected:
      return "corrected";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "no-fusion") return Method::NoFusion;
  if (name == "uncorrected") return Method::Uncorrected;
  if (name == "corrected") return Method::Corrected;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::Position:
      return "position";
    case SweepMode::Heading:
      return "heading";
    case SweepMode::Separate:
      return "separate";
    case SweepMode::Joint:
      return "joint";
  }
  return "unknown";
}

SweepMode parse_sweep_mode(std::string_view name) {
  if (name == "position") return SweepMode::Position;
  if (name == "heading") return SweepMode::Heading;
  if (name == "separate") return SweepMode::Separate;
  if (name == "joint") return SweepMode::Joint;
  throw InvalidArgument("unknown sweep mode '" + std::string(name) + "'");
}

void SweepConfig::validate() const {
  if (sigma_p_grid.empty() || sigma_phi_grid_deg.empty()) {
    throw InvalidArgument("noise grids must be nonempty");
  }
  for (const double s : sigma_p_grid)
    if (!(s >= 0.0)) throw InvalidArgument("sigma_p values must be >= 0");
  for (const double s : sigma_phi_grid_deg)
    if (!(s >= 0.0)) throw InvalidArgument("sigma_phi values must be >= 0");
  if (trials_per_cell < 1) throw InvalidArgument("trials_per_cell must be >= 1");
  if (n_objects < 0) throw InvalidArgument("object count must be >= 0");
  if (methods.empty()) throw InvalidArgument("method list must be nonempty");
  if (!(ap_iou > 0.0 && ap_iou < 1.0)) throw InvalidArgument("AP IoU must lie in (0, 1)");
  sensor.validate();
  pipeline.validate();
}

std::vector<NoiseCell> sweep_cells(const SweepConfig& config) {
  std::vector<NoiseCell> cells;
  const auto add = [&](NoiseCell c) {
    if (std::find(cells.begin(), cells.end(), c) == cells.end()) cells.push_back(c);
  };
  switch (config.mode) {
    case SweepMode::Position:
      for (const double p : config.sigma_p_grid) add({p, 0.0});
      break;
    case SweepMode::Heading:
      for (const double h : config.sigma_phi_grid_deg) add({0.0, h});
      break;
    case SweepMode::Separate:
      for (const double p : config.sigma_p_grid) add({p, 0.0});
      for (const double h : config.sigma_phi_grid_deg) add({0.0, h});
      break;
    case SweepMode::Joint:
      for (const double p : config.sigma_p_grid)
        for (const double h : config.sigma_phi_grid_deg) add({p, h});
      break;
  }
  return cells;
}

Frame simulate_frame(const SweepConfig& config, const NoiseCell& cell, int trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  Frame frame;
  frame.scene = generate_scene(config.n_objects, config.layout,
                               derive_seed(config.master_seed, "scene", t));

  Stream noise(config.master_seed, "pose-noise", t);
  const NoiseSpec spec{cell.sigma_p_m, deg_to_rad(cell.sigma_phi_deg), 0};
  frame.cav_reported = perturb_pose(frame.scene.cav_pose, spec, noise);

  Stream ego_stream(config.master_seed, "observe-ego", t);
  Stream cav_stream(config.master_seed, "observe-cav", t);
  const Observation ego = observe_labeled(frame.scene, frame.scene.ego_pose, config.sensor, ego_stream);
  const Observation cav = observe_labeled(frame.scene, frame.scene.cav_pose, config.sensor, cav_stream);
  frame.ego_detections = ego.detections;
  frame.cav_detections = cav.detections;
  for (const int id : ego.object_ids) {
    if (id >= 0 && std::find(cav.object_ids.begin(), cav.object_ids.end(), id) != cav.object_ids.end()) {
      ++frame.co_visible;
    }
  }

  frame.ground_truth = visible_ground_truth(frame.scene, config.sensor);
  frame.true_transform = relative_transform(frame.scene.ego_pose, frame.scene.cav_pose);
  return frame;
}

MethodOutcome run_method(Method method, const Frame& frame, const SweepConfig& config,
                         int trial) {
  MethodOutcome out;
  const Pose& ego_pose = frame.scene.ego_pose;
  switch (method) {
    case Method::NoFusion:
      out.detections = frame.ego_detections;
      break;
    case Method::Uncorrected:
      out.detections = late_fusion(ego_pose, frame.cav_reported, frame.ego_detections,
                                   frame.cav_detections, config.pipeline.nms_iou_threshold);
      out.error = transform_error(frame.true_transform,
                                  relative_transform(ego_pose, frame.cav_reported));
      break;
    case Method::Corrected: {
      PipelineConfig pipeline = config.pipeline;
      pipeline.registration.seed =
          derive_seed(config.master_seed, "ransac", static_cast<std::uint64_t>(trial));
      FusionOutput fused = fuse_frame(ego_pose, frame.cav_reported, frame.ego_detections,
                                      frame.cav_detections, pipeline);
      out.detections = std::move(fused.objects);
      out.error = transform_error(frame.true_transform, fused.applied_transform);
      out.registered = fused.registration.has_value();
      out.correction_applied = fused.correction_applied;
      if (fused.registration) out.inlier_ratio = fused.registration->inlier_ratio;
      break;
    }
  }
  return out;
}

namespace {

struct TrialSlot {
  std::vector<OrientedBox> ground_truth;
  std::vector<MethodOutcome> outcomes;  // indexed like config.methods
};

// grid[cell][trial]
using OutcomeGrid = std::vector<std::vector<TrialSlot>>;

OutcomeGrid allocate(std::size_t cells, const SweepConfig& config) {
  TrialSlot empty;
  empty.outcomes.resize(config.methods.size());
  return OutcomeGrid(cells, std::vector<TrialSlot>(config.trials_per_cell, empty));
}

void run_task(const SweepConfig& config, const std::vector<NoiseCell>& cells,
              std::size_t task, OutcomeGrid& grid) {
  const std::size_t c = task / config.trials_per_cell;
  const int trial = static_cast<int>(task % config.trials_per_cell);
  try {
    const Frame frame = simulate_frame(config, cells[c], trial);
    TrialSlot& slot = grid[c][trial];
    slot.ground_truth = frame.ground_truth;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      slot.outcomes[m] = run_method(config.methods[m], frame, config, trial);
    }
  } catch (const PlacementFailure& e) {
    std::ostringstream msg;
    msg << e.what() << " (cell sigma_p=" << cells[c].sigma_p_m
        << " m, sigma_phi=" << cells[c].sigma_phi_deg << " deg, trial " << trial << ")";
    throw PlacementFailure(msg.str());
  }
}

std::vector<ExperimentRecord> fold(const SweepConfig& config,
                                   const std::vector<NoiseCell>& cells,
                                   const OutcomeGrid& grid) {
  std::vector<ExperimentRecord> records;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::vector<FramedDetection> detections;
      std::vector<FramedBox> truth;
      double rre_sum = 0.0, rte_sum = 0.0, inlier_sum = 0.0;
      int registered = 0;
      for (int t = 0; t < config.trials_per_cell; ++t) {
        const MethodOutcome& o = grid[c][t].outcomes[m];
        for (const Detection& d : o.detections) detections.push_back({t, d});
        for (const OrientedBox& b : grid[c][t].ground_truth) truth.push_back({t, b});
        rre_sum += o.error.rre;
        rte_sum += o.error.rte;
        if (o.registered) {
          inlier_sum += o.inlier_ratio;
          ++registered;
        }
      }
      ExperimentRecord r;
      r.method = std::string(to_string(config.methods[m]));
      r.sigma_p_m = cells[c].sigma_p_m;
      r.sigma_phi_deg = cells[c].sigma_phi_deg;
      r.ap = truth.empty() ? 0.0 : average_precision(detections, truth, config.ap_iou).ap;
      r.mean_rre = rre_sum / config.trials_per_cell;
      r.mean_rte = rte_sum / config.trials_per_cell;
      r.mean_inlier_ratio = registered > 0 ? inlier_sum / registered : 0.0;
      r.trials = config.trials_per_cell;
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace

std::vector<ExperimentRecord> run_sweep_serial(const SweepConfig& config) {
  config.validate();
  const std::vector<NoiseCell> cells = sweep_cells(config);
  OutcomeGrid grid = allocate(cells.size(), config);
  const std::size_t tasks = cells.size() * config.trials_per_cell;
  for (std::size_t task = 0; task < tasks; ++task) run_task(config, cells, task, grid);
  return fold(config, cells, grid);
}

std::vector<ExperimentRecord> run_sweep(const SweepConfig& config) {
  config.validate();
  const std::vector<NoiseCell> cells = sweep_cells(config);
  OutcomeGrid grid = allocate(cells.size(), config);
  const auto tasks = static_cast<long>(cells.size() * config.trials_per_cell);
  const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();

  // Exceptions cannot cross the parallel region; rethrow the first by task
  // index so the error matches the serial run.
  std::vector<std::exception_ptr> failures(tasks);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long task = 0; task < tasks; ++task) {
    try {
      run_task(config, cells, static_cast<std::size_t>(task), grid);
    } catch (...) {
      failures[task] = std::current_exception();
    }
  }
  for (const std::exception_ptr& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return fold(config, cells, grid);
}

SummaryTable compare_methods(const std::vector<ExperimentRecord>& records) {
  SummaryTable table;
  for (const ExperimentRecord& r : records) {
    if (std::find(table.methods.begin(), table.methods.end(), r.method) == table.methods.end()) {
      table.methods.push_back(r.method);
    }
  }
  for (const ExperimentRecord& r : records) {
    if (r.method != table.methods.front()) continue;
    table.cells.push_back({r.sigma_p_m, r.sigma_phi_deg});
  }

  table.ap.assign(table.methods.size(), std::vector<double>(table.cells.size(), 0.0));
  std::vector<std::vector<bool>> seen(table.methods.size(),
                                      std::vector<bool>(table.cells.size(), false));
  for (const ExperimentRecord& r : records) {
    const auto m = std::find(table.methods.begin(), table.methods.end(), r.method) - table.methods.begin();
    const NoiseCell cell{r.sigma_p_m, r.sigma_phi_deg};
    const auto c = std::find(table.cells.begin(), table.cells.end(), cell) - table.cells.begin();
    if (c == static_cast<long>(table.cells.size()) || seen[m][c]) {
      throw GridMismatch("method '" + r.method + "' does not share the noise grid");
    }
    seen[m][c] = true;
    table.ap[m][c] = r.ap;
  }
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    for (std::size_t c = 0; c < table.cells.size(); ++c) {
      if (!seen[m][c]) throw GridMismatch("method '" + table.methods[m] + "' is missing a cell");
    }
  }

  const auto noiseless =
      std::find(table.cells.begin(), table.cells.end(), NoiseCell{0.0, 0.0});
  const std::size_t base = noiseless == table.cells.end() ? 0 : noiseless - table.cells.begin();
  table.degradation.assign(table.methods.size(), std::vector<double>(table.cells.size(), 0.0));
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    const double ap0 = table.ap[m][base];
    for (std::size_t c = 0; c < table.cells.size(); ++c) {
      table.degradation[m][c] = ap0 > 0.0 ? (ap0 - table.ap[m][c]) / ap0 : 0.0;
    }
  }
  return table;
}

std::string SummaryTable::render() const {
  std::ostringstream out;
  out << std::fixed;
  out << std::left << std::setw(14) << "sigma_p(m)" << std::setw(16) << "sigma_phi(deg)";
  for (const std::string& m : methods) out << std::setw(24) << (m + " AP (drop%)");
  out << '\n';
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out << std::setw(14) << std::setprecision(2) << cells[c].sigma_p_m << std::setw(16)
        << cells[c].sigma_phi_deg;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3) << ap[m][c] << " (" << std::setprecision(1)
           << 100.0 * degradation[m][c] << ")";
      out << std::setw(24) << cell.str();
    }
    out << '\n';
  }
  return out.str();
}

void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  out << kCsvHeader << '\n';
  std::ostringstream line;
  line.imbue(std::locale::classic());
  line << std::setprecision(12);
  for (const ExperimentRecord& r : records) {
    line.str("");
    line << r.method << ',' << r.sigma_p_m << ',' << r.sigma_phi_deg << ',' << r.ap << ','
         << rad_to_deg(r.mean_rre) << ',' << r.mean_rte << ',' << r.mean_inlier_ratio << ','
         << r.trials << '\n';
    out << line.str();
  }
}

}  // namespace optimatch
