#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "splinemix/error.hpp"
#include "splinemix/metrics.hpp"
#include "splinemix/rng.hpp"
#include "splinemix/simulate.hpp"

using namespace splinemix;

namespace {

Trajectories random_trajectories(int G, int n, int K, RngStream& rng, double spread = 5.0) {
  Trajectories t;
  for (int g = 0; g < G; ++g) {
    Eigen::MatrixXd m(n, K);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < K; ++k) m(j, k) = spread * g + rng.normal();
    t.push_back(m);
  }
  return t;
}

// Greedy matcher: repeatedly pair the closest remaining (truth, estimate).
std::vector<int> greedy_match(const Trajectories& truth, const Trajectories& est) {
  const int G = static_cast<int>(truth.size());
  std::vector<int> out(static_cast<std::size_t>(G), -1);
  std::vector<bool> used_t(static_cast<std::size_t>(G)), used_e(static_cast<std::size_t>(G));
  for (int step = 0; step < G; ++step) {
    double best = 1e300;
    int bg = -1, bh = -1;
    for (int g = 0; g < G; ++g)
      for (int h = 0; h < G; ++h) {
        if (used_t[static_cast<std::size_t>(g)] || used_e[static_cast<std::size_t>(h)]) continue;
        const double c = (truth[static_cast<std::size_t>(g)] - est[static_cast<std::size_t>(h)]).squaredNorm();
        if (c < best) {
          best = c;
          bg = g;
          bh = h;
        }
      }
    out[static_cast<std::size_t>(bg)] = bh;
    used_t[static_cast<std::size_t>(bg)] = used_e[static_cast<std::size_t>(bh)] = true;
  }
  return out;
}

}  // namespace

TEST_CASE("scenario presets") {
  const ScenarioSpec a = ScenarioSpec::scenario_a();
  CHECK(a.alpha0.row(0) == Eigen::RowVector3d(1, -3, -2));
  CHECK(a.sigma_sq.row(0) == Eigen::RowVector3d(3, 5, 4.5));
  CHECK(a.tau_sq.row(0) == Eigen::RowVector3d(3.5, 5, 8.5));
  CHECK(a.delta.row(0) == Eigen::RowVector4d(5, -3.5, 1, 0.1));
  CHECK(a.delta.row(1).norm() == 0.0);
  CHECK_NOTHROW(a.validate());
  const ScenarioSpec b = ScenarioSpec::scenario_b();
  CHECK(b.G == 4);
  CHECK(b.K == 2);
  CHECK((b.tau_sq.array() == 4.0).all());
  CHECK_NOTHROW(b.validate());
}

TEST_CASE("noiseless flat scenario A starts at the intercepts") {
  ScenarioSpec s = ScenarioSpec::scenario_a();
  s.noiseless = true;
  s.flat_splines = true;
  s.N = 40;
  const SimulatedReplicate rep = generate_scenario(s, 0);
  REQUIRE(rep.data.grid[0] == 0.0);
  int seen = 0;
  for (int i = 0; i < s.N; ++i) {
    const auto& y = rep.data.y[static_cast<std::size_t>(i)];
    const int g = rep.truth.z[static_cast<std::size_t>(i)];
    const Eigen::RowVectorXd expected = s.alpha0.row(g);
    CHECK((y.row(0) - expected).norm() < 1e-12);
    if (g == 0) {
      CHECK(y.row(0) == Eigen::RowVector3d(1, -3, -2));
      ++seen;
    }
  }
  CHECK(seen > 0);
}

TEST_CASE("noiseless data reproduce the recorded truth trajectories") {
  ScenarioSpec s = ScenarioSpec::scenario_b();
  s.noiseless = true;
  s.N = 30;
  const SimulatedReplicate rep = generate_scenario(s, 3);
  const BasisSet basis = build_basis(rep.data.grid, s.m);
  for (int g = 0; g < s.G; ++g) {
    for (int k = 0; k < s.K; ++k) {
      const Eigen::VectorXd& beta = rep.truth.beta[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)];
      const Eigen::VectorXd mu = basis.fixed * Eigen::Vector2d(s.alpha0(g, k), s.alpha1(g, k)) + basis.spline * beta;
      CHECK((rep.truth.mean[static_cast<std::size_t>(g)].col(k) - mu).norm() < 1e-12);
    }
  }
  for (int i = 0; i < s.N; ++i) {
    CHECK(rep.data.y[static_cast<std::size_t>(i)] ==
          rep.truth.mean[static_cast<std::size_t>(rep.truth.z[static_cast<std::size_t>(i)])]);
  }
}

TEST_CASE("allocation proportions") {
  SUBCASE("zero logistic truth gives uniform weights") {
    ScenarioSpec s = ScenarioSpec::scenario_b();
    s.delta.setZero();
    s.N = 10000;
    s.n = 4;
    s.m = 2;
    const SimulatedReplicate rep = generate_scenario(s, 0);
    std::vector<int> counts(4, 0);
    for (int z : rep.truth.z) ++counts[static_cast<std::size_t>(z)];
    const double se = std::sqrt(0.25 * 0.75 / s.N);
    for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.25) < 4.0 * se);
  }
  SUBCASE("scenario A share matches a logistic-normal integral") {
    // eta = 5 - 3.5 x1 + x2 + 0.1 x3 with standard normal x, so eta ~ N(5, 13.26).
    ScenarioSpec s = ScenarioSpec::scenario_a();
    s.N = 20000;
    s.n = 4;
    s.m = 2;
    const SimulatedReplicate rep = generate_scenario(s, 0);
    const double sd = std::sqrt(3.5 * 3.5 + 1.0 + 0.01);
    double num = 0.0, den = 0.0;
    for (int j = -8000; j <= 8000; ++j) {
      const double u = j * 0.001;
      const double w = std::exp(-0.5 * u * u);
      num += w / (1.0 + std::exp(-(5.0 + sd * u)));
      den += w;
    }
    const double expected = num / den;
    const double share =
        static_cast<double>(std::count(rep.truth.z.begin(), rep.truth.z.end(), 0)) / s.N;
    CHECK(std::abs(share - expected) < 4.0 * std::sqrt(expected * (1.0 - expected) / s.N));
    CHECK(expected == doctest::Approx(0.87).epsilon(0.02));
  }
  SUBCASE("covariate mean shifts the covariates") {
    ScenarioSpec s = ScenarioSpec::scenario_a();
    s.N = 4000;
    s.n = 4;
    s.m = 2;
    s.covariate_mean = Eigen::Vector3d(1.5, 0.0, -2.0);
    const SimulatedReplicate rep = generate_scenario(s, 0);
    const Eigen::VectorXd means = rep.data.covariates.colwise().mean().transpose();
    CHECK(means(0) == 1.0);
    CHECK(std::abs(means(1) - 1.5) < 0.08);
    CHECK(std::abs(means(2)) < 0.08);
    CHECK(std::abs(means(3) + 2.0) < 0.08);
  }
}

TEST_CASE("generation is deterministic per replicate") {
  ScenarioSpec s = ScenarioSpec::scenario_a();
  s.N = 20;
  const SimulatedReplicate a = generate_scenario(s, 2), b = generate_scenario(s, 2),
                           c = generate_scenario(s, 3);
  CHECK(a.truth.z == b.truth.z);
  CHECK(a.data.covariates == b.data.covariates);
  bool same_y = true, differs = false;
  for (int i = 0; i < s.N; ++i) {
    same_y = same_y && a.data.y[static_cast<std::size_t>(i)] == b.data.y[static_cast<std::size_t>(i)];
    differs = differs || a.data.y[static_cast<std::size_t>(i)] != c.data.y[static_cast<std::size_t>(i)];
  }
  CHECK(same_y);
  CHECK(differs);
}

TEST_CASE("scenario validation") {
  ScenarioSpec s = ScenarioSpec::scenario_a();
  s.delta(1, 0) = 0.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ScenarioSpec::scenario_a();
  s.sigma_sq(0, 0) = 0.0;
  CHECK_THROWS_AS(generate_scenario(s), ConfigError);
  s = ScenarioSpec::scenario_a();
  s.m = 50;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ScenarioSpec::scenario_a();
  s.alpha1.resize(2, 2);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = ScenarioSpec::scenario_a();
  s.covariate_mean = Eigen::Vector2d(1, 2);
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("ARSE") {
  Trajectories t{Eigen::MatrixXd::Constant(1, 1, 1.0)}, e{Eigen::MatrixXd::Constant(1, 1, 1.5)};
  CHECK(arse(t, e, 0) == doctest::Approx(0.5));
  CHECK(arse(t, t, 0) == 0.0);
  Trajectories t2{Eigen::MatrixXd::Zero(2, 1)}, e2{Eigen::Vector2d(3.0, 4.0)};
  CHECK(arse(t2, e2, 0) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(arse(t2, e2, 0) == doctest::Approx(3.5355).epsilon(1e-4));

  RngStream rng(1, 0);
  const Trajectories a = random_trajectories(3, 7, 2, rng), b = random_trajectories(3, 7, 2, rng);
  for (int g = 0; g < 3; ++g) {
    CHECK(arse(a, b, g) == arse(b, a, g));
    CHECK(arse(a, b, g) >= 0.0);
  }
  Trajectories bad = b;
  bad[1] = Eigen::MatrixXd::Zero(6, 2);
  CHECK_THROWS_AS(arse(a, bad, 0), DataError);
  CHECK_THROWS_AS(arse(a, Trajectories(b.begin(), b.begin() + 2), 0), DataError);
}

TEST_CASE("label matching") {
  RngStream rng(2, 0);
  const Trajectories truth = random_trajectories(4, 6, 2, rng);
  CHECK(match_labels(truth, truth) == std::vector<int>{0, 1, 2, 3});

  Trajectories swapped = truth;
  std::swap(swapped[0], swapped[1]);
  CHECK(match_labels(truth, swapped) == std::vector<int>{1, 0, 2, 3});

  int disagreements = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> perm{0, 1, 2, 3};
    for (int k = 3; k > 0; --k) std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(std::min(k, static_cast<int>(rng.uniform() * (k + 1))))]);
    Trajectories est(4);
    for (int g = 0; g < 4; ++g) {
      est[static_cast<std::size_t>(perm[static_cast<std::size_t>(g)])] = truth[static_cast<std::size_t>(g)];
      for (int j = 0; j < 6; ++j)
        for (int k = 0; k < 2; ++k) est[static_cast<std::size_t>(perm[static_cast<std::size_t>(g)])](j, k) += 2.0 * rng.normal();
    }
    const std::vector<int> best = match_labels(truth, est);

    // Exhaustive optimum is never worse than greedy.
    auto total = [&](const std::vector<int>& a) {
      double s = 0.0;
      for (int g = 0; g < 4; ++g) s += arse(truth, align_trajectories(est, a), g);
      return s;
    };
    const std::vector<int> greedy = greedy_match(truth, est);
    CHECK(total(best) <= total(greedy) + 1e-12);
    disagreements += best != greedy;

    // Equivariance: permuting the truth side composes with the assignment.
    std::vector<int> pi{0, 1, 2, 3};
    for (int k = 3; k > 0; --k) std::swap(pi[static_cast<std::size_t>(k)], pi[static_cast<std::size_t>(std::min(k, static_cast<int>(rng.uniform() * (k + 1))))]);
    Trajectories moved(4);
    for (int g = 0; g < 4; ++g) moved[static_cast<std::size_t>(g)] = truth[static_cast<std::size_t>(pi[static_cast<std::size_t>(g)])];
    const std::vector<int> again = match_labels(moved, est);
    for (int g = 0; g < 4; ++g) CHECK(again[static_cast<std::size_t>(g)] == best[static_cast<std::size_t>(pi[static_cast<std::size_t>(g)])]);
  }
  MESSAGE("greedy disagreed with exhaustive matching in " << disagreements << " of 200 trials");
}

TEST_CASE("A-bias and V-bias") {
  Trajectories t{Eigen::MatrixXd::Zero(2, 1)}, e{Eigen::Vector2d(1.0, -1.0)};
  BiasSummary b = abias_vbias(t, e, 0);
  CHECK(b.a_bias == 0.0);
  CHECK(b.v_bias == doctest::Approx(2.0));
  b = abias_vbias(t, t, 0);
  CHECK(b.a_bias == 0.0);
  CHECK(b.v_bias == 0.0);
  Trajectories c{Eigen::MatrixXd::Constant(2, 1, 0.7)};
  b = abias_vbias(t, c, 0);
  CHECK(b.a_bias == doctest::Approx(0.7));
  CHECK(b.v_bias == doctest::Approx(0.0).epsilon(1e-15));

  RngStream rng(3, 0);
  const Trajectories truth = random_trajectories(2, 9, 3, rng), est = random_trajectories(2, 9, 3, rng);
  Trajectories shifted = est;
  shifted[1].array() += 3.25;
  const BiasSummary base = abias_vbias(truth, est, 1), moved = abias_vbias(truth, shifted, 1);
  CHECK(moved.a_bias == doctest::Approx(base.a_bias + 3.25).epsilon(1e-13));
  CHECK(moved.v_bias == doctest::Approx(base.v_bias).epsilon(1e-12));
  CHECK(base.v_bias >= 0.0);
}

TEST_CASE("logistic RMSE and coefficient alignment") {
  Eigen::MatrixXd truth(2, 1);
  truth << 1.0, 0.0;
  Eigen::MatrixXd e1 = truth, e2 = truth;
  e1(0, 0) += 0.3;
  e2(0, 0) -= 0.4;
  const Eigen::MatrixXd r = logistic_rmse(truth, {e1, e2});
  REQUIRE(r.rows() == 1);
  CHECK(r(0, 0) == doctest::Approx(std::sqrt(0.125)).epsilon(1e-15));
  CHECK(r(0, 0) == doctest::Approx(0.35355).epsilon(1e-4));
  CHECK(logistic_rmse(truth, {truth, truth})(0, 0) == 0.0);
  CHECK_THROWS_AS(logistic_rmse(truth, {}), DataError);
  CHECK_THROWS_AS(logistic_rmse(truth, {Eigen::MatrixXd::Zero(3, 1)}), DataError);

  // Estimated components [ref, a, b] matched so that truth order is (a, b, ref).
  Eigen::MatrixXd deltas(3, 2);
  deltas << 0.0, 0.0,
            2.0, -1.0,
            0.5, 0.25;
  const Eigen::MatrixXd aligned = align_deltas(deltas, {1, 2, 0});
  CHECK(aligned.row(2).norm() == 0.0);
  CHECK(aligned.row(0) == Eigen::RowVector2d(2.0, -1.0));
  // Re-expression against a non-zero matched reference.
  const Eigen::MatrixXd again = align_deltas(deltas, {0, 2, 1});
  CHECK(again.row(0) == Eigen::RowVector2d(-2.0, 1.0));
  CHECK(again.row(1) == Eigen::RowVector2d(-1.5, 1.25));
  CHECK(again.row(2).norm() == 0.0);
}

TEST_CASE("evaluate_replicate recovers a relabeled estimate") {
  RngStream rng(4, 0);
  const Trajectories truth = random_trajectories(3, 10, 2, rng, 20.0);
  Trajectories est{truth[2], truth[0], truth[1]};
  est[1].array() += 0.1;
  const MetricsReport r = evaluate_replicate(truth, est);
  CHECK(r.assignment == std::vector<int>{1, 2, 0});
  CHECK(r.arse(0) == doctest::Approx(0.1));
  CHECK(r.a_bias(0) == doctest::Approx(0.1));
  CHECK(r.arse(1) == 0.0);
  CHECK(r.v_bias(2) == 0.0);
}
