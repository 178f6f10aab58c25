#pragma once

#include <vector>

#include <Eigen/Dense>

#include "splinemix/simulate.hpp"

namespace splinemix {

// sqrt(mean over (t, k) of (truth - estimate)^2) for component g.
double arse(const Trajectories& truth, const Trajectories& estimate, int g);

// assignment[g] = estimated component matched to truth component g, chosen to
// minimize the total ARSE by exhaustive search (G <= 8).
std::vector<int> match_labels(const Trajectories& truth, const Trajectories& estimate);

struct BiasSummary {
  double a_bias = 0.0;  // mean of estimate - truth
  double v_bias = 0.0;  // sample variance (nK - 1 denominator) of the pointwise bias
};

// Labels already matched: estimate[g] pairs with truth[g].
BiasSummary abias_vbias(const Trajectories& truth, const Trajectories& estimate, int g);

// Reorders estimated components by the assignment.
Trajectories align_trajectories(const Trajectories& estimate, const std::vector<int>& assignment);

// Reorders logistic coefficients (G x (P + 1)) by the assignment and
// re-expresses them as contrasts against the matched reference component.
Eigen::MatrixXd align_deltas(const Eigen::MatrixXd& deltas, const std::vector<int>& assignment);

// RMSE over replicates, per non-reference component and coefficient:
// (G - 1) x (P + 1). Estimates must already be aligned.
Eigen::MatrixXd logistic_rmse(const Eigen::MatrixXd& truth_deltas,
                              const std::vector<Eigen::MatrixXd>& estimates);

struct MetricsReport {
  std::vector<int> assignment;
  Eigen::VectorXd arse, a_bias, v_bias;  // per truth component
};

// Match, align and score one replicate.
MetricsReport evaluate_replicate(const Trajectories& truth, const Trajectories& estimate);

}  // namespace splinemix
