#include "splinemix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "splinemix/error.hpp"

namespace splinemix {
namespace {

void check_shapes(const Trajectories& a, const Trajectories& b) {
  if (a.size() != b.size()) {
    throw DataError("trajectory sets have different component counts (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
  }
  for (std::size_t g = 0; g < a.size(); ++g) {
    if (a[g].rows() != b[g].rows() || a[g].cols() != b[g].cols()) {
      std::ostringstream msg;
      msg << "trajectory shape mismatch for component " << g << ": " << a[g].rows() << "x"
          << a[g].cols() << " vs " << b[g].rows() << "x" << b[g].cols();
      throw DataError(msg.str());
    }
  }
}

double rms_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

double arse(const Trajectories& truth, const Trajectories& estimate, int g) {
  check_shapes(truth, estimate);
  const auto gi = static_cast<std::size_t>(g);
  return rms_difference(truth.at(gi), estimate.at(gi));
}

std::vector<int> match_labels(const Trajectories& truth, const Trajectories& estimate) {
  check_shapes(truth, estimate);
  const int G = static_cast<int>(truth.size());
  if (G > 8) throw ConfigError("label matching is exhaustive and supports at most 8 components");
  Eigen::MatrixXd cost(G, G);
  for (int g = 0; g < G; ++g)
    for (int h = 0; h < G; ++h)
      cost(g, h) = rms_difference(truth[static_cast<std::size_t>(g)], estimate[static_cast<std::size_t>(h)]);

  std::vector<int> perm(static_cast<std::size_t>(G));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int g = 0; g < G; ++g) total += cost(g, perm[static_cast<std::size_t>(g)]);
    if (total < best_cost) {
      best_cost = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

BiasSummary abias_vbias(const Trajectories& truth, const Trajectories& estimate, int g) {
  check_shapes(truth, estimate);
  const auto gi = static_cast<std::size_t>(g);
  const Eigen::ArrayXXd bias = (estimate.at(gi) - truth.at(gi)).array();
  const double count = static_cast<double>(bias.size());
  BiasSummary out;
  out.a_bias = bias.mean();
  out.v_bias = count > 1 ? (bias - out.a_bias).square().sum() / (count - 1.0) : 0.0;
  return out;
}

Trajectories align_trajectories(const Trajectories& estimate, const std::vector<int>& assignment) {
  Trajectories out(estimate.size());
  for (std::size_t g = 0; g < estimate.size(); ++g) out[g] = estimate.at(static_cast<std::size_t>(assignment[g]));
  return out;
}

Eigen::MatrixXd align_deltas(const Eigen::MatrixXd& deltas, const std::vector<int>& assignment) {
  const auto G = static_cast<Eigen::Index>(assignment.size());
  if (deltas.rows() != G) throw DataError("delta matrix and assignment disagree on G");
  Eigen::MatrixXd out(G, deltas.cols());
  const Eigen::RowVectorXd ref = deltas.row(assignment[static_cast<std::size_t>(G - 1)]);
  for (Eigen::Index g = 0; g < G; ++g) out.row(g) = deltas.row(assignment[static_cast<std::size_t>(g)]) - ref;
  return out;
}

Eigen::MatrixXd logistic_rmse(const Eigen::MatrixXd& truth_deltas,
                              const std::vector<Eigen::MatrixXd>& estimates) {
  if (estimates.empty()) throw DataError("no replicate estimates for RMSE");
  const Eigen::Index rows = truth_deltas.rows() - 1;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rows, truth_deltas.cols());
  for (const auto& est : estimates) {
    if (est.rows() != truth_deltas.rows() || est.cols() != truth_deltas.cols()) {
      throw DataError("replicate logistic estimate has the wrong shape");
    }
    acc += (est.topRows(rows) - truth_deltas.topRows(rows)).array().square().matrix();
  }
  return (acc / static_cast<double>(estimates.size())).cwiseSqrt();
}

MetricsReport evaluate_replicate(const Trajectories& truth, const Trajectories& estimate) {
  MetricsReport out;
  out.assignment = match_labels(truth, estimate);
  const Trajectories aligned = align_trajectories(estimate, out.assignment);
  const int G = static_cast<int>(truth.size());
  out.arse.resize(G);
  out.a_bias.resize(G);
  out.v_bias.resize(G);
  for (int g = 0; g < G; ++g) {
    out.arse(g) = arse(truth, aligned, g);
    const BiasSummary b = abias_vbias(truth, aligned, g);
    out.a_bias(g) = b.a_bias;
    out.v_bias(g) = b.v_bias;
  }
  return out;
}

}  // namespace splinemix
