#pragma once

#include "optimatch/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace optimatch {

// One associated pair: an Ego-frame center and the matching CAV center
// already mapped into the Ego frame by the pose-derived transform.
struct PointPair {
  Vec3 ego;
  Vec3 cav;
};

using MatchedSet = std::vector<PointPair>;

struct RansacConfig {
  int rounds = 50;                 // n_s
  int sample_size = 3;             // w
  double inlier_threshold = 0.25;  // tau, meters
  std::uint64_t seed = 0;
  bool refit = true;               // least-squares polish on winning inliers
  int max_resamples = 10;          // redraws per round on degenerate samples

  void validate() const;
};

struct InlierScore {
  double ratio = 0.0;
  std::vector<int> inliers;
};

struct RegistrationResult {
  RigidTransform correction;
  double inlier_ratio = 0.0;  // inliers.size() / pairs
  std::vector<int> inliers;   // indices into the caller's MatchedSet
  int rounds_run = 0;
  int winning_round = -1;
  bool refit_applied = false;
};

// Least-squares proper rigid transform T minimizing sum |ego_i - T(cav_i)|^2.
// Throws InvalidArgument on size mismatch or fewer than three points and
// DegenerateConfiguration when the second singular value of the centered
// cross-covariance is below 1e-9 (collinear input).
RigidTransform kabsch(std::span<const Vec3> ego_points,
                      std::span<const Vec3> cav_points);

// Pairs with |ego - T(cav)| <= threshold and their fraction.
InlierScore inlier_ratio(std::span<const PointPair> pairs,
                         const RigidTransform& transform, double threshold);

// Random-sampling correction estimate. Rounds are evaluated in parallel with
// OpenMP; each round draws from its own stream derived from (seed, round), and
// the winner is the highest ratio with ties to the lowest round. Input order
// does not affect the result. Throws InsufficientPairs when
// pairs.size() < sample_size and AllSamplesDegenerate when no round produced
// a transform.
RegistrationResult estimate_correction(std::span<const PointPair> pairs,
                                       const RansacConfig& config);

// Serial reference for estimate_correction: same rounds, evaluated in order
// with early exit at ratio 1. Results are identical.
RegistrationResult estimate_correction_serial(std::span<const PointPair> pairs,
                                              const RansacConfig& config);

// Applies `pose_transform` first, then `correction`.
RigidTransform compose_final(const RigidTransform& pose_transform,
                             const RigidTransform& correction);

}  // namespace optimatch
