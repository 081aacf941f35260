#include "optimatch/association.hpp"

#include "optimatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace optimatch {

CostMatrix build_cost(std::span<const OrientedBox> ego_boxes,
                      std::span<const OrientedBox> cav_boxes_in_ego) {
  const auto m = static_cast<Eigen::Index>(ego_boxes.size());
  const auto n = static_cast<Eigen::Index>(cav_boxes_in_ego.size());
  CostMatrix cost{Eigen::MatrixXd(m, n)};
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      cost.values(i, j) = (ego_boxes[i].center - cav_boxes_in_ego[j].center).norm();
    }
  }
  return cost;
}

AugmentedCostMatrix augment(const CostMatrix& cost, double dustbin_cost) {
  if (!std::isfinite(dustbin_cost) || dustbin_cost <= 0.0) {
    throw InvalidArgument("dustbin cost must be finite and positive");
  }
  const Eigen::Index m = cost.rows(), n = cost.cols();
  AugmentedCostMatrix out;
  out.dustbin_cost = dustbin_cost;
  out.values = Eigen::MatrixXd::Constant(m + 1, n + 1, dustbin_cost);
  out.values.topLeftCorner(m, n) = cost.values;
  return out;
}

namespace {

constexpr int kAnnealSweeps = 100;
constexpr double kEarlyStop = 1e-6;

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double top = x.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((x.array() - top).exp().sum());
}

}  // namespace

TransportPlan sinkhorn_solve(const AugmentedCostMatrix& cost, double epsilon,
                             int iterations) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");

  const Eigen::Index rows = cost.values.rows(), cols = cost.values.cols();
  const Eigen::Index m = rows - 1, n = cols - 1;

  Eigen::VectorXd log_a = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd log_b = Eigen::VectorXd::Zero(cols);
  log_a[m] = std::log(static_cast<double>(std::max<Eigen::Index>(n, 1)));
  log_b[n] = std::log(static_cast<double>(std::max<Eigen::Index>(m, 1)));
  if (n == 0) log_a[m] = -std::numeric_limits<double>::infinity();
  if (m == 0) log_b[n] = -std::numeric_limits<double>::infinity();

  // Potentials are kept in cost units so epsilon can shrink between sweeps.
  // The first sweeps anneal epsilon geometrically from the cost scale down to
  // the target; the rest runs at the target value.
  const Eigen::MatrixXd& c = cost.values;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cols);
  const double eps_start = std::max(epsilon, c.maxCoeff());
  const int anneal = std::min(kAnnealSweeps, iterations / 2);
  const double decay = anneal > 0 ? std::pow(epsilon / eps_start, 1.0 / anneal) : 1.0;

  const auto plan_from = [&](double eps) {
    Eigen::MatrixXd p(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        p(i, j) = std::exp((u[i] + v[j] - c(i, j)) / eps);
    return p;
  };
  const auto row_potential = [&](Eigen::Index i, double eps) {
    if (!std::isfinite(log_a[i])) return -std::numeric_limits<double>::infinity();
    Eigen::VectorXd z = (v - c.row(i).transpose()) / eps;
    return eps * (log_a[i] - log_sum_exp(z));
  };
  const auto col_potential = [&](Eigen::Index j, double eps) {
    if (!std::isfinite(log_b[j])) return -std::numeric_limits<double>::infinity();
    Eigen::VectorXd z = (u - c.col(j)) / eps;
    return eps * (log_b[j] - log_sum_exp(z));
  };

  TransportPlan out;
  double eps = eps_start;
  for (int it = 0; it < iterations; ++it) {
    eps = it < anneal ? std::max(epsilon, eps_start * std::pow(decay, it + 1)) : epsilon;
    for (Eigen::Index i = 0; i < rows; ++i) u[i] = row_potential(i, eps);
    for (Eigen::Index j = 0; j < cols; ++j) v[j] = col_potential(j, eps);
    out.iterations_run = it + 1;
    if (eps > epsilon) continue;

    // Column marginals are exact after the v-update; rows carry the error.
    double err = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double target = std::exp(log_a[i]);
      const double row_mass = std::isfinite(u[i]) ? std::exp((u[i] - row_potential(i, eps)) / eps) * target
                                                  : 0.0;
      err = std::max(err, std::abs(row_mass - target));
    }
    out.marginal_error = err;
    if (err < kEarlyStop) break;
  }

  out.values = plan_from(epsilon);
  Eigen::VectorXd a = log_a.array().exp();
  Eigen::VectorXd b = log_b.array().exp();
  out.marginal_error = std::max((out.values.rowwise().sum() - a).cwiseAbs().maxCoeff(),
                                (out.values.colwise().sum().transpose() - b).cwiseAbs().maxCoeff());
  out.converged = out.marginal_error <= kSinkhornTolerance;
  return out;
}

AssignmentResult extract_pairs(const Eigen::MatrixXd& plan) {
  constexpr double kTie = 1e-12;
  const Eigen::Index m = plan.rows() - 1, n = plan.cols() - 1;

  AssignmentResult out;
  out.transport_plan = plan;

  std::vector<Eigen::Index> row_best(m, -1), col_best(n, -1);
  for (Eigen::Index i = 0; i < m; ++i) {
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (plan(i, j) > best + kTie) {
        best = plan(i, j);
        row_best[i] = j;
      }
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    double best = -1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (plan(i, j) > best + kTie) {
        best = plan(i, j);
        col_best[j] = i;
      }
    }
  }

  std::vector<bool> cav_used(n, false);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = row_best[i];
    const bool mutual = j >= 0 && col_best[j] == i;
    if (mutual && plan(i, j) > plan(i, n) && plan(i, j) > plan(m, j)) {
      out.pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
      cav_used[j] = true;
    } else {
      out.unmatched_ego.push_back(static_cast<int>(i));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!cav_used[j]) out.unmatched_cav.push_back(static_cast<int>(j));
  }
  return out;
}

namespace {

// Square Hungarian method with row/column potentials, O(k^3). Returns the
// column assigned to each row.
std::vector<int> solve_square_assignment(const Eigen::MatrixXd& cost) {
  const int k = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual start column.
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0), min_slack(k + 1);
  std::vector<int> match(k + 1, 0), way(k + 1, 0);
  std::vector<bool> used(k + 1);

  for (int row = 1; row <= k; ++row) {
    match[0] = row;
    int col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[col0] = true;
      const int i0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double slack = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = col0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          col1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<int> row_to_col(k, -1);
  for (int j = 1; j <= k; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::vector<IndexPair> hungarian_oracle(const AugmentedCostMatrix& cost) {
  const Eigen::Index m = cost.ego_count(), n = cost.cav_count();
  const Eigen::Index k = m + n;
  if (m == 0 || n == 0) return {};

  // Rows: m points then n dustbin copies. Columns: n points then m dustbin
  // copies. Every border entry, including dustbin-to-dustbin, costs alpha.
  Eigen::MatrixXd square = Eigen::MatrixXd::Constant(k, k, cost.dustbin_cost);
  square.topLeftCorner(m, n) = cost.values.topLeftCorner(m, n);

  const std::vector<int> row_to_col = solve_square_assignment(square);
  std::vector<IndexPair> pairs;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (row_to_col[i] < n) pairs.push_back({static_cast<int>(i), row_to_col[i]});
  }
  return pairs;
}

AssignmentResult associate(std::span<const OrientedBox> ego_boxes,
                           std::span<const OrientedBox> cav_boxes_in_ego,
                           const AssociationConfig& config) {
  if (ego_boxes.empty() || cav_boxes_in_ego.empty()) {
    AssignmentResult out;
    const auto m = static_cast<Eigen::Index>(ego_boxes.size());
    const auto n = static_cast<Eigen::Index>(cav_boxes_in_ego.size());
    out.transport_plan = Eigen::MatrixXd::Zero(m + 1, n + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      out.transport_plan(i, n) = 1.0;
      out.unmatched_ego.push_back(static_cast<int>(i));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      out.transport_plan(m, j) = 1.0;
      out.unmatched_cav.push_back(static_cast<int>(j));
    }
    return out;
  }
  const AugmentedCostMatrix cost =
      augment(build_cost(ego_boxes, cav_boxes_in_ego), config.dustbin_cost);
  const TransportPlan plan = sinkhorn_solve(cost, config.epsilon, config.iterations);
  AssignmentResult out = extract_pairs(plan.values);
  out.converged = plan.converged;
  return out;
}

}  // namespace optimatch
