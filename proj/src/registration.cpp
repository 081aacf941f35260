#include "optimatch/registration.hpp"

#include "optimatch/errors.hpp"
#include "optimatch/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>

namespace optimatch {

void RansacConfig::validate() const {
  if (rounds < 1) throw InvalidArgument("RANSAC rounds must be >= 1");
  if (sample_size < 3) throw InvalidArgument("RANSAC sample size must be >= 3");
  if (!(inlier_threshold > 0.0)) throw InvalidArgument("inlier threshold must be > 0");
  if (max_resamples < 0) throw InvalidArgument("max_resamples must be >= 0");
}

RigidTransform kabsch(std::span<const Vec3> ego_points,
                      std::span<const Vec3> cav_points) {
  if (ego_points.size() != cav_points.size()) {
    throw InvalidArgument("kabsch: point lists differ in length");
  }
  if (ego_points.size() < 3) throw InvalidArgument("kabsch: need at least 3 points");

  const double count = static_cast<double>(ego_points.size());
  Vec3 mu_ego = Vec3::Zero(), mu_cav = Vec3::Zero();
  for (std::size_t i = 0; i < ego_points.size(); ++i) {
    mu_ego += ego_points[i];
    mu_cav += cav_points[i];
  }
  mu_ego /= count;
  mu_cav /= count;

  // Cross-covariance of the targets against the sources.
  Mat3 cross = Mat3::Zero();
  for (std::size_t i = 0; i < ego_points.size(); ++i) {
    cross += (ego_points[i] - mu_ego) * (cav_points[i] - mu_cav).transpose();
  }

  const Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()[1] < 1e-9) {
    throw DegenerateConfiguration("kabsch: points are collinear or coincident");
  }
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 diag(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);

  RigidTransform out;
  out.rotation = u * diag.asDiagonal() * v.transpose();
  out.translation = mu_ego - out.rotation * mu_cav;
  return out;
}

InlierScore inlier_ratio(std::span<const PointPair> pairs,
                         const RigidTransform& transform, double threshold) {
  if (pairs.empty()) throw InvalidArgument("inlier_ratio: empty matched set");
  InlierScore score;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if ((pairs[i].ego - transform(pairs[i].cav)).norm() <= threshold) {
      score.inliers.push_back(static_cast<int>(i));
    }
  }
  score.ratio = static_cast<double>(score.inliers.size()) /
                static_cast<double>(pairs.size());
  return score;
}

RigidTransform compose_final(const RigidTransform& pose_transform,
                             const RigidTransform& correction) {
  return compose(correction, pose_transform);
}

namespace {

struct RoundOutcome {
  bool valid = false;
  RigidTransform transform;
  InlierScore score;
};

// Pairs sorted by coordinates so the sampled subsets do not depend on the
// caller's ordering. order[k] is the caller index of canonical pair k.
struct CanonicalPairs {
  std::vector<PointPair> pairs;
  std::vector<int> order;
};

CanonicalPairs canonicalize(std::span<const PointPair> pairs) {
  CanonicalPairs out;
  out.order.resize(pairs.size());
  std::iota(out.order.begin(), out.order.end(), 0);
  const auto key = [&](int i) {
    const PointPair& p = pairs[i];
    return std::array<double, 6>{p.ego.x(), p.ego.y(), p.ego.z(),
                                 p.cav.x(), p.cav.y(), p.cav.z()};
  };
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](int a, int b) { return key(a) < key(b); });
  out.pairs.reserve(pairs.size());
  for (const int i : out.order) out.pairs.push_back(pairs[i]);
  return out;
}

RoundOutcome evaluate_round(const std::vector<PointPair>& pairs,
                            const RansacConfig& config, int round) {
  Stream stream(config.seed, "ransac-round", static_cast<std::uint64_t>(round));
  std::vector<int> pool(pairs.size());
  std::vector<Vec3> ego(config.sample_size), cav(config.sample_size);

  for (int attempt = 0; attempt <= config.max_resamples; ++attempt) {
    // Partial Fisher-Yates: first sample_size entries of pool are distinct.
    std::iota(pool.begin(), pool.end(), 0);
    for (int k = 0; k < config.sample_size; ++k) {
      const std::size_t pick = k + stream.index_below(pool.size() - k);
      std::swap(pool[k], pool[pick]);
      ego[k] = pairs[pool[k]].ego;
      cav[k] = pairs[pool[k]].cav;
    }
    try {
      RoundOutcome out;
      out.transform = kabsch(ego, cav);
      out.score = inlier_ratio(pairs, out.transform, config.inlier_threshold);
      out.valid = true;
      return out;
    } catch (const DegenerateConfiguration&) {
      // redraw
    }
  }
  return {};
}

bool beats(const RoundOutcome& candidate, const RoundOutcome* best) {
  return candidate.valid && (best == nullptr || candidate.score.ratio > best->score.ratio);
}

RegistrationResult finish(const CanonicalPairs& canon, const RansacConfig& config,
                          RoundOutcome winner, int winning_round, int rounds_run) {
  RegistrationResult out;
  out.winning_round = winning_round;
  out.rounds_run = rounds_run;

  if (config.refit && winner.score.inliers.size() >= 3) {
    std::vector<Vec3> ego, cav;
    for (const int k : winner.score.inliers) {
      ego.push_back(canon.pairs[k].ego);
      cav.push_back(canon.pairs[k].cav);
    }
    try {
      const RigidTransform polished = kabsch(ego, cav);
      InlierScore rescored = inlier_ratio(canon.pairs, polished, config.inlier_threshold);
      if (rescored.ratio >= winner.score.ratio) {
        winner.transform = polished;
        winner.score = std::move(rescored);
        out.refit_applied = true;
      }
    } catch (const DegenerateConfiguration&) {
      // keep the sampled transform
    }
  }

  out.correction = winner.transform;
  out.inlier_ratio = winner.score.ratio;
  for (const int k : winner.score.inliers) out.inliers.push_back(canon.order[k]);
  std::sort(out.inliers.begin(), out.inliers.end());
  return out;
}

void check_inputs(std::span<const PointPair> pairs, const RansacConfig& config) {
  config.validate();
  if (pairs.size() < static_cast<std::size_t>(config.sample_size)) {
    throw InsufficientPairs("need at least " + std::to_string(config.sample_size) +
                            " matched pairs, got " + std::to_string(pairs.size()));
  }
}

}  // namespace

RegistrationResult estimate_correction_serial(std::span<const PointPair> pairs,
                                              const RansacConfig& config) {
  check_inputs(pairs, config);
  const CanonicalPairs canon = canonicalize(pairs);

  std::optional<RoundOutcome> best;
  int best_round = -1;
  int rounds_run = 0;
  for (int round = 0; round < config.rounds; ++round) {
    RoundOutcome outcome = evaluate_round(canon.pairs, config, round);
    rounds_run = round + 1;
    if (beats(outcome, best ? &*best : nullptr)) {
      best = std::move(outcome);
      best_round = round;
      if (best->score.ratio >= 1.0) break;
    }
  }
  if (!best) throw AllSamplesDegenerate("every RANSAC round was degenerate");
  return finish(canon, config, std::move(*best), best_round, rounds_run);
}

RegistrationResult estimate_correction(std::span<const PointPair> pairs,
                                       const RansacConfig& config) {
  check_inputs(pairs, config);
  const CanonicalPairs canon = canonicalize(pairs);

  std::vector<RoundOutcome> outcomes(config.rounds);
#pragma omp parallel for schedule(static)
  for (int round = 0; round < config.rounds; ++round) {
    outcomes[round] = evaluate_round(canon.pairs, config, round);
  }

  // Deterministic reduction: max ratio, ties to the lowest round. The serial
  // reference stops at the first perfect round, so report the same count.
  int best_round = -1;
  for (int round = 0; round < config.rounds; ++round) {
    if (beats(outcomes[round], best_round < 0 ? nullptr : &outcomes[best_round])) {
      best_round = round;
      if (outcomes[round].score.ratio >= 1.0) break;
    }
  }
  if (best_round < 0) throw AllSamplesDegenerate("every RANSAC round was degenerate");
  const int rounds_run =
      outcomes[best_round].score.ratio >= 1.0 ? best_round + 1 : config.rounds;
  return finish(canon, config, std::move(outcomes[best_round]), best_round, rounds_run);
}

}  // namespace optimatch
