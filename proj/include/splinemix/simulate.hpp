#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splinemix/model.hpp"

namespace splinemix {

// Generating truth for synthetic mixtures of spline experts. Per-component
// matrices are G x K; delta is G x (P + 1) with a zero reference (last) row.
struct ScenarioSpec {
  std::string name = "custom";
  int G = 2, K = 3, N = 150, n = 50, m = 10, P = 3;
  Eigen::MatrixXd alpha0, alpha1, sigma_sq, tau_sq;
  Eigen::MatrixXd delta;
  // Covariates are independent N(covariate_mean_p, 1); empty means all zero.
  Eigen::VectorXd covariate_mean;
  std::uint64_t seed = 1;
  int replicates = 1;
  bool noiseless = false;     // drop the observation noise
  bool flat_splines = false;  // force spline coefficients to zero

  // Two-component trivariate preset.
  static ScenarioSpec scenario_a();
  // Four-component bivariate preset; tau^2 defaults to 4 everywhere.
  static ScenarioSpec scenario_b();

  void validate() const;
};

// Trajectories of all components: element g is n x K.
using Trajectories = std::vector<Eigen::MatrixXd>;

struct ScenarioTruth {
  Eigen::MatrixXd delta;                           // G x (P + 1)
  std::vector<std::vector<Eigen::VectorXd>> beta;  // [g][k], length m
  Trajectories mean;                               // realized component means
  std::vector<int> z;                              // generating labels
};

struct SimulatedReplicate {
  Dataset data;
  ScenarioTruth truth;
};

// Replicate r draws from RngStream(spec.seed, r). Covariates are P independent
// unit-variance normals; allocation follows the softmax weights with zero random
// intercepts.
SimulatedReplicate generate_scenario(const ScenarioSpec& spec, int replicate = 0);

}  // namespace splinemix
