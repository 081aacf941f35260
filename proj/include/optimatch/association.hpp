#pragma once

#include "optimatch/geometry.hpp"

#include <Eigen/Core>

#include <compare>
#include <span>
#include <vector>

namespace optimatch {

// Pairwise Euclidean center distances (m x n), meters.
struct CostMatrix {
  Eigen::MatrixXd values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// (m+1) x (n+1) cost with a dustbin row and column filled with dustbin_cost.
struct AugmentedCostMatrix {
  Eigen::MatrixXd values;
  double dustbin_cost = 0.0;

  Eigen::Index ego_count() const { return values.rows() - 1; }
  Eigen::Index cav_count() const { return values.cols() - 1; }
};

struct IndexPair {
  int ego = 0;
  int cav = 0;

  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

struct TransportPlan {
  Eigen::MatrixXd values;  // includes the dustbin row and column
  int iterations_run = 0;
  double marginal_error = 0.0;  // max |P 1 - a|, |P^T 1 - b|
  bool converged = false;
};

struct AssignmentResult {
  Eigen::MatrixXd transport_plan;
  std::vector<IndexPair> pairs;  // sorted by ego index
  std::vector<int> unmatched_ego;
  std::vector<int> unmatched_cav;
  bool converged = true;
};

struct AssociationConfig {
  double dustbin_cost = 10.0;  // alpha, meters
  double epsilon = 0.1;        // entropic regularization, meters
  int iterations = 4000;
};

// Marginal violation above which a plan is reported as not converged.
inline constexpr double kSinkhornTolerance = 1e-3;

CostMatrix build_cost(std::span<const OrientedBox> ego_boxes,
                      std::span<const OrientedBox> cav_boxes_in_ego);

// Throws InvalidArgument unless dustbin_cost is finite and > 0.
AugmentedCostMatrix augment(const CostMatrix& cost, double dustbin_cost);

// Log-domain Sinkhorn for the dustbin-augmented transport problem with row
// marginals [1,...,1, n] and column marginals [1,...,1, m]. Runs at most
// `iterations` sweeps. The first min(100, iterations / 2) sweeps anneal epsilon
// down from the largest cost; stops early once the marginal error drops below
// 1e-6.
TransportPlan sinkhorn_solve(const AugmentedCostMatrix& cost, double epsilon,
                             int iterations);

// Mutual-argmax extraction on the plan with its dustbin row/column dropped.
// A pair must also carry more mass than both of its dustbin entries. Ties
// within 1e-12 go to the lowest index.
AssignmentResult extract_pairs(const Eigen::MatrixXd& plan);

// Exact minimum-cost partial matching under the same objective, solved with
// the Hungarian method on the square (m+n) matrix obtained by replicating the
// dustbin row and column. Returns interior pairs sorted by ego index.
std::vector<IndexPair> hungarian_oracle(const AugmentedCostMatrix& cost);

// build_cost -> augment -> sinkhorn_solve -> extract_pairs. Empty inputs
// return an empty result without running Sinkhorn.
AssignmentResult associate(std::span<const OrientedBox> ego_boxes,
                           std::span<const OrientedBox> cav_boxes_in_ego,
                           const AssociationConfig& config);

}  // namespace optimatch
