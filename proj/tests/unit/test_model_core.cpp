#include <doctest.h>

#include <cmath>

#include "splinemix/error.hpp"
#include "splinemix/model.hpp"
#include "splinemix/rng.hpp"

using namespace splinemix;

namespace {

double normal_pdf(double x, double mu, double var) {
  return std::exp(-0.5 * (x - mu) * (x - mu) / var) / std::sqrt(2.0 * M_PI * var);
}

Components random_components(int G, int K, int m, int P, int N, RngStream& rng) {
  Components c(static_cast<std::size_t>(G), ComponentParams::zeros(K, m, P, N));
  for (int g = 0; g < G; ++g) {
    auto& comp = c[static_cast<std::size_t>(g)];
    for (auto& e : comp.entries) {
      e.alpha = Eigen::Vector2d(2.0 * rng.normal(), rng.normal());
      for (int q = 0; q < m; ++q) e.beta(q) = rng.normal();
      e.sigma_sq = 0.5 + rng.uniform();
      e.tau_sq = 1.0;
    }
    if (g < G - 1) {
      for (int p = 0; p <= P; ++p) comp.delta(p) = rng.normal();
      for (int i = 0; i < N; ++i) comp.zeta(i) = 0.3 * rng.normal();
    }
  }
  return c;
}

Dataset random_dataset(int N, int K, int n, int P, RngStream& rng) {
  Dataset d{TimeGrid::uniform(n), {}, Eigen::MatrixXd::Ones(N, P + 1), {}, {}, {}, {}, {}};
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd y(n, K);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < K; ++k) y(j, k) = 2.0 * rng.normal();
    d.y.push_back(y);
    for (int p = 1; p <= P; ++p) d.covariates(i, p) = rng.normal();
  }
  return d;
}

}  // namespace

TEST_CASE("component mean special cases") {
  const TimeGrid grid = TimeGrid::uniform(7);
  const BasisSet basis = build_basis(grid, 3);
  EntryParams e;
  e.beta = Eigen::VectorXd::Zero(3);
  e.alpha = Eigen::Vector2d(2.5, 0.0);
  CHECK((component_mean(e, basis).array() == 2.5).all());
  e.alpha = Eigen::Vector2d(0.0, 1.0);
  const Eigen::VectorXd mu = component_mean(e, basis);
  for (int j = 0; j < 7; ++j) CHECK(mu(j) == grid[j]);
  e.beta = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(component_mean(e, basis), NumericalError);
}

TEST_CASE("component mean on a 3-point basis matches an explicit sum") {
  const TimeGrid grid({0.0, 0.5, 1.0});
  const BasisSet basis = build_basis(grid, 2);
  EntryParams e;
  e.alpha = Eigen::Vector2d(0.7, -1.2);
  e.beta = Eigen::Vector2d(0.4, -2.1);
  const Eigen::VectorXd mu = component_mean(e, basis);
  for (int j = 0; j < 3; ++j) {
    double expected = 0.7 - 1.2 * grid[j];
    for (int q = 0; q < 2; ++q) expected += basis.spline(j, q) * e.beta(q);
    CHECK(mu(j) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("log component density") {
  Eigen::VectorXd y(1), mu(1);
  y << 0.3;
  mu << 0.3;
  CHECK(log_component_density(y, mu, 1.0) == doctest::Approx(-0.918939).epsilon(1e-6));
  CHECK(log_component_density(y, mu, 1.0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-15));

  Eigen::Vector2d y2(1.0, 1.0), m2(0.0, 0.0);
  CHECK(log_component_density(y2, m2, 2.0) == doctest::Approx(-std::log(4.0 * M_PI) - 0.5).epsilon(1e-14));
  // -log(4 pi) - 0.5 = -3.0310242...
  CHECK(log_component_density(y2, m2, 2.0) == doctest::Approx(-3.0310242469692907).epsilon(1e-14));

  // The density is maximal at zero residual.
  CHECK(log_component_density(m2, m2, 2.0) > log_component_density(y2, m2, 2.0));
  CHECK_THROWS_AS(log_component_density(y2, m2, 0.0), NumericalError);
}

TEST_CASE("mixing weights") {
  Eigen::VectorXd v(1);
  v << 1.0;
  Eigen::MatrixXd deltas = Eigen::MatrixXd::Zero(2, 1);
  Eigen::VectorXd zeta = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd w = mixing_weights(v, deltas, zeta);
  CHECK(w(0) == 0.5);
  CHECK(w(1) == 0.5);

  deltas(0, 0) = 1.5;
  zeta(0) = 0.5;
  w = mixing_weights(v, deltas, zeta);
  const double e2 = std::exp(2.0);
  CHECK(w(0) == doctest::Approx(e2 / (e2 + 1.0)).epsilon(1e-14));
  CHECK(w(1) == doctest::Approx(1.0 / (e2 + 1.0)).epsilon(1e-14));
  CHECK(w(0) == doctest::Approx(0.8808).epsilon(1e-4));

  Eigen::VectorXd shifted = zeta.array() + 37.0;
  CHECK((mixing_weights(v, deltas, shifted) - w).cwiseAbs().maxCoeff() <= 1e-12);

  deltas(0, 0) = std::nan("");
  CHECK_THROWS_AS(mixing_weights(v, deltas, zeta), NumericalError);
}

TEST_CASE("mixing weights stay a probability vector for extreme predictors") {
  RngStream rng(1, 1);
  for (int rep = 0; rep < 500; ++rep) {
    const int G = 2 + rep % 4;
    Eigen::MatrixXd deltas = 100.0 * Eigen::MatrixXd::Random(G, 3);
    deltas.row(G - 1).setZero();
    Eigen::VectorXd v(3);
    v << 1.0, rng.normal(), rng.normal();
    Eigen::VectorXd zeta = 10.0 * Eigen::VectorXd::Random(G);
    zeta(G - 1) = 0.0;
    const Eigen::VectorXd w = mixing_weights(v, deltas, zeta);
    REQUIRE(std::abs(w.sum() - 1.0) <= 1e-12);
    REQUIRE(w.minCoeff() >= 0.0);
    REQUIRE(w.maxCoeff() <= 1.0);
  }
}

TEST_CASE("allocation probabilities") {
  const TimeGrid grid = TimeGrid::uniform(3);
  const BasisSet basis = build_basis(grid, 1);
  RngStream rng(2, 0);
  Components same = random_components(2, 1, 1, 0, 1, rng);
  same[1].entries = same[0].entries;
  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(3, 1);
  const Eigen::Vector2d w(0.7, 0.3);
  const Eigen::VectorXd p = allocation_probs(y, same, basis, w);
  CHECK(p(0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(0.3).epsilon(1e-12));

  Components single = random_components(1, 1, 1, 0, 1, rng);
  CHECK(allocation_probs(y, single, basis, Eigen::VectorXd::Ones(1))(0) == 1.0);

  // Direct product-of-scalar-densities oracle.
  Components two = random_components(2, 1, 1, 0, 1, rng);
  double f[2];
  for (int g = 0; g < 2; ++g) {
    const auto& e = two[static_cast<std::size_t>(g)].entries[0];
    f[g] = w(g);
    for (int j = 0; j < 3; ++j) {
      const double mu = e.alpha(0) + e.alpha(1) * grid[j] + basis.spline(j, 0) * e.beta(0);
      f[g] *= normal_pdf(y(j, 0), mu, e.sigma_sq);
    }
  }
  const Eigen::VectorXd q = allocation_probs(y, two, basis, w);
  CHECK(q(0) == doctest::Approx(f[0] / (f[0] + f[1])).epsilon(1e-12));
  CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("allocation probabilities survive huge log densities") {
  const TimeGrid grid = TimeGrid::uniform(50);
  const BasisSet basis = build_basis(grid, 5);
  RngStream rng(3, 0);
  Components c = random_components(3, 4, 5, 0, 1, rng);
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(50, 4, 200.0);
  for (auto& comp : c)
    for (auto& e : comp.entries) e.sigma_sq = 1e-2;
  const Eigen::VectorXd p = allocation_probs(y, c, basis, Eigen::Vector3d(0.2, 0.3, 0.5));
  CHECK(p.allFinite());
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));

}

TEST_CASE("allocation probabilities ignore a common density factor") {
  // Shifting every component mean and the response by the same constant
  // multiplies nothing; adding an identical extra entry to every component
  // multiplies all densities by one common factor.
  const TimeGrid grid = TimeGrid::uniform(6);
  const BasisSet basis = build_basis(grid, 2);
  RngStream rng(6, 0);
  Components c = random_components(3, 1, 2, 0, 1, rng);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(6, 1);
  const Eigen::Vector3d w(0.5, 0.2, 0.3);
  const Eigen::VectorXd base = allocation_probs(y, c, basis, w);

  Components widened = c;
  for (auto& comp : widened) comp.entries.push_back(c[0].entries[0]);
  Eigen::MatrixXd y2(6, 2);
  y2 << y, Eigen::MatrixXd::Random(6, 1);
  CHECK((allocation_probs(y2, widened, basis, w) - base).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("observed likelihood") {
  RngStream rng(4, 0);
  const int N = 5, K = 2, n = 4, P = 1, m = 2;
  Dataset data = random_dataset(N, K, n, P, rng);
  const BasisSet basis = build_basis(data.grid, m);

  // G = 1 collapses to the sum of component log densities.
  Components one = random_components(1, K, m, P, N, rng);
  double direct = 0.0;
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k)
      direct += log_component_density(data.y[static_cast<std::size_t>(i)].col(k), component_mean(one, basis, 0, k),
                                      one[0].entries[static_cast<std::size_t>(k)].sigma_sq);
  CHECK(log_observed_likelihood(data, one, basis, Eigen::MatrixXd::Ones(N, 1)) ==
        doctest::Approx(direct).epsilon(1e-12));

  // Scalar-density oracle for G = 2.
  Components two = random_components(2, K, m, P, N, rng);
  const Eigen::MatrixXd w = mixing_weight_matrix(data, two);
  double oracle = 0.0;
  for (int i = 0; i < N; ++i) {
    double mix = 0.0;
    for (int g = 0; g < 2; ++g) {
      double f = w(i, g);
      for (int k = 0; k < K; ++k) {
        const auto& e = two[static_cast<std::size_t>(g)].entries[static_cast<std::size_t>(k)];
        for (int j = 0; j < n; ++j) {
          double mu = e.alpha(0) + e.alpha(1) * data.grid[j];
          for (int q = 0; q < m; ++q) mu += basis.spline(j, q) * e.beta(q);
          f *= normal_pdf(data.y[static_cast<std::size_t>(i)](j, k), mu, e.sigma_sq);
        }
      }
      mix += f;
    }
    oracle += std::log(mix);
  }
  const double ll = log_observed_likelihood(data, two, basis, w);
  CHECK(ll == doctest::Approx(oracle).epsilon(1e-10));

  // Sufficient-statistic path agrees with the direct evaluation.
  const DataSummary summary(data, basis);
  CHECK(log_mixture_rows(summary.log_density_matrix(two), w).sum() == doctest::Approx(ll).epsilon(1e-10));

  // Duplicating every subject doubles the log-likelihood.
  Dataset twice = data;
  twice.y.insert(twice.y.end(), data.y.begin(), data.y.end());
  Eigen::MatrixXd w2(2 * N, 2);
  w2 << w, w;
  CHECK(log_observed_likelihood(twice, two, basis, w2) == doctest::Approx(2.0 * ll).epsilon(1e-14));

  // Mixture bound: any hard allocation gives a smaller complete-data value.
  const DataSummary s(data, basis);
  const Eigen::MatrixXd ld = s.log_density_matrix(two);
  for (int rep = 0; rep < 50; ++rep) {
    double complete = 0.0;
    for (int i = 0; i < N; ++i) {
      const int g = rng.uniform() < 0.5 ? 0 : 1;
      complete += std::log(w(i, g)) + ld(i, g);
    }
    CHECK(ll >= complete);
  }
}

TEST_CASE("dataset validation and standardization") {
  RngStream rng(5, 0);
  Dataset d = random_dataset(30, 2, 5, 3, rng);
  d.covariates.col(1) = 5.0 + 3.0 * d.covariates.col(1).array();
  for (int i = 0; i < 30; ++i) d.covariates(i, 3) = i % 2;  // binary: untouched
  const Eigen::VectorXd binary = d.covariates.col(3);
  CHECK_NOTHROW(d.validate());
  d.standardize_covariates();
  for (int p = 1; p <= 2; ++p) {
    const auto col = d.covariates.col(p);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / 29.0);
    CHECK(std::abs(mean) <= 1e-8);
    CHECK(std::abs(sd - 1.0) <= 1e-8);
  }
  CHECK(d.covariates.col(3) == binary);
  CHECK(d.covariate_sds(2) == 1.0);
  CHECK(d.covariate_means(0) != 0.0);

  Dataset bad = d;
  bad.y[3](1, 1) = std::nan("");
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = d;
  bad.covariates(2, 0) = 0.5;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = d;
  bad.y[0] = Eigen::MatrixXd::Zero(4, 2);
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("latent state helpers") {
  LatentState lat;
  lat.z = {0, 2, 2, 1, 0};
  const Eigen::MatrixXd oh = lat.one_hot(3);
  CHECK((oh.rowwise().sum().array() == 1.0).all());
  CHECK(lat.counts(3) == std::vector<int>{2, 1, 2});
}

TEST_CASE("hyperparameters must be positive") {
  Hyperparams h;
  CHECK_NOTHROW(h.validate());
  CHECK(h.sigma_alpha_sq == 100.0);
  CHECK(h.nu_sigma == 3.0);
  CHECK(h.A_kappa == 10.0);
  CHECK(h.sigma_delta_sq == 10.0);
  h.A_tau = 0.0;
  CHECK_THROWS_AS(h.validate(), ConfigError);
}
