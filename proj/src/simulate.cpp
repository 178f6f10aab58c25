#include "splinemix/simulate.hpp"

#include <cmath>
#include <sstream>

#include "splinemix/error.hpp"
#include "splinemix/rng.hpp"
#include "splinemix/spline_basis.hpp"

namespace splinemix {

ScenarioSpec ScenarioSpec::scenario_a() {
  ScenarioSpec s;
  s.name = "A";
  s.G = 2;
  s.K = 3;
  s.alpha0.resize(2, 3);
  s.alpha0 << 1, -3, -2,
              5, 4, 3;
  s.alpha1.resize(2, 3);
  s.alpha1 << -2, 2, 0.5,
              1, -1, -0.5;
  s.sigma_sq.resize(2, 3);
  s.sigma_sq << 3, 5, 4.5,
                4, 3.5, 4;
  s.tau_sq.resize(2, 3);
  s.tau_sq << 3.5, 5, 8.5,
              6, 2.5, 1.5;
  s.delta.resize(2, 4);
  s.delta << 5, -3.5, 1, 0.1,
             0, 0, 0, 0;
  return s;
}

ScenarioSpec ScenarioSpec::scenario_b() {
  ScenarioSpec s;
  s.name = "B";
  s.G = 4;
  s.K = 2;
  s.alpha0.resize(4, 2);
  s.alpha0 << 1, -2,
              5, 3,
              -3, 5.5,
              4, -1;
  s.alpha1.resize(4, 2);
  s.alpha1 << -3, 0,
              2, -3.5,
              2.5, 2,
              -3, 1.5;
  s.sigma_sq.resize(4, 2);
  s.sigma_sq << 6, 9,
                8, 7.5,
                10, 6.5,
                7, 8.5;
  s.tau_sq = Eigen::MatrixXd::Constant(4, 2, 4.0);
  s.delta.resize(4, 4);
  s.delta << 5, -3.5, 1, 0.1,
             -4, 2.5, -2, -0.2,
             3, -2, 0.8, 0.2,
             0, 0, 0, 0;
  return s;
}

void ScenarioSpec::validate() const {
  if (G < 1 || K < 1 || N < 1 || P < 0) throw ConfigError("scenario needs G, K, N >= 1 and P >= 0");
  if (n < 3) throw ConfigError("scenario needs n >= 3");
  if (m < 1 || m >= n) throw ConfigError("scenario needs 1 <= m < n");
  if (replicates < 0) throw ConfigError("replicates must be nonnegative");
  auto check_shape = [&](const Eigen::MatrixXd& mat, Eigen::Index rows, Eigen::Index cols,
                         const char* what) {
    if (mat.rows() != rows || mat.cols() != cols) {
      std::ostringstream msg;
      msg << "scenario field " << what << " is " << mat.rows() << "x" << mat.cols() << ", expected "
          << rows << "x" << cols;
      throw ConfigError(msg.str());
    }
  };
  check_shape(alpha0, G, K, "alpha0");
  check_shape(alpha1, G, K, "alpha1");
  check_shape(sigma_sq, G, K, "sigma_sq");
  check_shape(tau_sq, G, K, "tau_sq");
  check_shape(delta, G, P + 1, "delta");
  if (covariate_mean.size() != 0 && covariate_mean.size() != P) {
    throw ConfigError("covariate_mean needs one value per covariate");
  }
  if ((sigma_sq.array() <= 0.0).any() || (tau_sq.array() <= 0.0).any()) {
    throw ConfigError("scenario variances must be positive");
  }
  if ((delta.row(G - 1).array() != 0.0).any()) {
    throw ConfigError("reference (last) component must have zero logistic coefficients");
  }
}

SimulatedReplicate generate_scenario(const ScenarioSpec& spec, int replicate) {
  spec.validate();
  RngStream rng(spec.seed, static_cast<std::uint64_t>(replicate));
  const TimeGrid grid = TimeGrid::uniform(spec.n);
  const BasisSet basis = build_basis(grid, spec.m);
  const int m = basis.m();

  ScenarioTruth truth;
  truth.delta = spec.delta;
  truth.beta.assign(static_cast<std::size_t>(spec.G), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(spec.K)));
  truth.mean.assign(static_cast<std::size_t>(spec.G), Eigen::MatrixXd(spec.n, spec.K));
  for (int g = 0; g < spec.G; ++g) {
    for (int k = 0; k < spec.K; ++k) {
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
      const double sd = std::sqrt(spec.tau_sq(g, k));
      for (int q = 0; q < m; ++q) {
        const double e = rng.normal();
        if (!spec.flat_splines) beta(q) = sd * e;
      }
      const Eigen::Vector2d alpha(spec.alpha0(g, k), spec.alpha1(g, k));
      truth.mean[static_cast<std::size_t>(g)].col(k) = basis.fixed * alpha + basis.spline * beta;
      truth.beta[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)] = std::move(beta);
    }
  }

  Eigen::MatrixXd covariates(spec.N, spec.P + 1);
  covariates.col(0).setOnes();
  for (int i = 0; i < spec.N; ++i) {
    for (int p = 1; p <= spec.P; ++p) {
      covariates(i, p) = rng.normal();
      if (spec.covariate_mean.size() > 0) covariates(i, p) += spec.covariate_mean(p - 1);
    }
  }

  truth.z.resize(static_cast<std::size_t>(spec.N));
  const Eigen::VectorXd no_zeta = Eigen::VectorXd::Zero(spec.G);
  for (int i = 0; i < spec.N; ++i) {
    const Eigen::VectorXd w = mixing_weights(covariates.row(i).transpose(), spec.delta, no_zeta);
    double u = rng.uniform();
    int pick = spec.G - 1;
    for (int g = 0; g < spec.G; ++g) {
      u -= w(g);
      if (u <= 0.0) {
        pick = g;
        break;
      }
    }
    truth.z[static_cast<std::size_t>(i)] = pick;
  }

  Dataset data{grid, {}, std::move(covariates), {}, {}, {}, {}, {}};
  data.y.reserve(static_cast<std::size_t>(spec.N));
  for (int i = 0; i < spec.N; ++i) {
    const int g = truth.z[static_cast<std::size_t>(i)];
    Eigen::MatrixXd yi = truth.mean[static_cast<std::size_t>(g)];
    for (int k = 0; k < spec.K; ++k) {
      const double sd = std::sqrt(spec.sigma_sq(g, k));
      for (int j = 0; j < spec.n; ++j) {
        const double e = rng.normal();
        if (!spec.noiseless) yi(j, k) += sd * e;
      }
    }
    data.y.push_back(std::move(yi));
  }
  for (int i = 0; i < spec.N; ++i) data.subject_ids.push_back(std::to_string(i + 1));
  for (int k = 0; k < spec.K; ++k) data.entry_names.push_back(std::to_string(k + 1));
  for (int p = 1; p <= spec.P; ++p) data.covariate_names.push_back("x" + std::to_string(p));
  data.covariate_means = Eigen::VectorXd::Zero(spec.P);
  data.covariate_sds = Eigen::VectorXd::Ones(spec.P);
  return {std::move(data), std::move(truth)};
}

}  // namespace splinemix
