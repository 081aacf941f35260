#pragma once

#include "optimatch/fusion.hpp"
#include "optimatch/metrics.hpp"
#include "optimatch/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace optimatch {

enum class Method {
  NoFusion,     // Ego detections only
  Uncorrected,  // late fusion with the pose-derived transform
  Corrected,    // association + registration + NMS
};

std::string_view to_string(Method method);
Method parse_method(std::string_view name);  // throws InvalidArgument

// Which noise cells a sweep visits. Separate = the position sweep (sigma_phi
// = 0) followed by the heading sweep (sigma_p = 0), sharing the noiseless
// cell. Joint = the full grid product.
enum class SweepMode { Position, Heading, Separate, Joint };

std::string_view to_string(SweepMode mode);
SweepMode parse_sweep_mode(std::string_view name);

struct NoiseCell {
  double sigma_p_m = 0.0;
  double sigma_phi_deg = 0.0;

  friend bool operator==(const NoiseCell&, const NoiseCell&) = default;
};

struct SweepConfig {
  std::vector<double> sigma_p_grid{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> sigma_phi_grid_deg{0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
  SweepMode mode = SweepMode::Separate;
  int trials_per_cell = 50;
  int n_objects = 20;
  Layout layout = Layout::Lane;
  SensorSpec sensor;
  PipelineConfig pipeline;
  double ap_iou = 0.7;
  std::vector<Method> methods{Method::NoFusion, Method::Uncorrected, Method::Corrected};
  std::uint64_t master_seed = 2024;
  int threads = 0;  // 0 = OpenMP default

  void validate() const;
};

struct ExperimentRecord {
  std::string method;
  double sigma_p_m = 0.0;
  double sigma_phi_deg = 0.0;
  double ap = 0.0;
  double mean_rre = 0.0;  // radians
  double mean_rte = 0.0;  // meters
  double mean_inlier_ratio = 0.0;
  int trials = 0;
};

// One simulated Ego/CAV frame before any fusion.
struct Frame {
  Scene scene;
  Pose cav_reported;  // CAV pose with noise; the Ego pose is exact
  std::vector<Detection> ego_detections;
  std::vector<Detection> cav_detections;
  std::vector<OrientedBox> ground_truth;  // Ego frame
  RigidTransform true_transform;          // CAV local -> Ego
  int co_visible = 0;                     // objects detected by both vehicles
};

struct MethodOutcome {
  std::vector<Detection> detections;
  TransformError error;  // zero for NoFusion
  bool registered = false;
  bool correction_applied = false;
  double inlier_ratio = 0.0;
};

std::vector<NoiseCell> sweep_cells(const SweepConfig& config);

// Scenes, detections and unit pose noise depend only on (master_seed, trial),
// so every cell sees the same frames and the noise scales with the cell.
Frame simulate_frame(const SweepConfig& config, const NoiseCell& cell, int trial);

MethodOutcome run_method(Method method, const Frame& frame, const SweepConfig& config,
                         int trial);

// Runs every (cell, trial) frame in parallel with OpenMP and folds the
// outcomes in a fixed order. AP pools all detections of a cell.
std::vector<ExperimentRecord> run_sweep(const SweepConfig& config);

// Serial reference for run_sweep; produces identical records.
std::vector<ExperimentRecord> run_sweep_serial(const SweepConfig& config);

struct SummaryTable {
  std::vector<NoiseCell> cells;
  std::vector<std::string> methods;
  std::vector<std::vector<double>> ap;           // [method][cell]
  std::vector<std::vector<double>> degradation;  // (ap0 - ap) / ap0

  std::string render() const;
};

// Pivots records into a method x noise-cell table. The baseline for
// degradation is each method's noiseless cell, or its first cell if the grid
// has none. Throws GridMismatch when methods cover different cells.
SummaryTable compare_methods(const std::vector<ExperimentRecord>& records);

inline constexpr std::string_view kCsvHeader =
    "method,sigma_p_m,sigma_phi_deg,ap,mean_rre_deg,mean_rte_m,mean_inlier_ratio,trials";

void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records);

}  // namespace optimatch
