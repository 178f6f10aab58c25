#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "splinemix/model.hpp"
#include "splinemix/rng.hpp"
#include "splinemix/spline_basis.hpp"

namespace splinemix {

enum class InitMethod { kmeans, random };

struct FitConfig {
  int G = 2;
  int m = 10;
  int iterations = 20000;
  int burn_in = 4000;
  int thin = 1;
  std::uint64_t seed = 1;
  InitMethod init = InitMethod::kmeans;
  Hyperparams hyper;

  void validate() const;
  int kept_sweeps() const { return (iterations - burn_in) / thin; }
};

struct ChainState {
  Components params;
  LatentState latent;
  Eigen::MatrixXd weights;  // N x G
};

// Retained post-burn-in draws.
struct PosteriorSamples {
  int G = 0, K = 0, m = 0, P = 0, N = 0;
  std::vector<int> sweep;                 // 1-based sweep index of each draw
  std::vector<Components> params;
  std::vector<std::vector<int>> z;
  std::vector<double> log_likelihood;     // observed-data mixture log-likelihood

  int size() const { return static_cast<int>(params.size()); }
};

// ---------------------------------------------------------------------------
// Full conditionals. These are pure functions of their inputs (plus the
// standard-normal noise they are handed), so they can be checked against
// dense reference algebra.

// theta_gk | rest ~ N(u, sigma^2 Lambda),
//   Lambda = (N_g S'S + sigma^2 D^-1)^-1,  u = Lambda * sum_i z_ig S'y_ik,
//   D = diag(sigma_alpha^2 1_2, tau^2 1_m).
struct ThetaConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd system_chol;  // lower Cholesky factor of N_g S'S + sigma^2 D^-1
  double sigma_sq = 1.0;

  Eigen::VectorXd draw(const Eigen::VectorXd& std_normal) const;
};

ThetaConditional theta_conditional(const Eigen::MatrixXd& sts, const Eigen::VectorXd& sum_sy,
                                   int n_g, double sigma_sq, double tau_sq, double sigma_alpha_sq);

// Half-t variance pair update:
//   a ~ IG((nu + 1) / 2, nu / current + 1 / A^2)
//   v ~ IG((count + nu) / 2, half_ss + nu / a)
struct VarianceDraw {
  double variance;
  double latent;
};

struct InverseGammaParams {
  double shape;
  double rate;
};

InverseGammaParams latent_conditional(double current, double nu, double A);
InverseGammaParams variance_conditional(double nu, double count, double half_ss, double latent);

VarianceDraw draw_variance_pair(double current, double nu, double A, double count,
                                double half_ss, RngStream& rng);

// Joint Gaussian conditional of (delta_g, zeta_g) given Polya-Gamma weights:
//   precision Q = V*' Omega V* + B^-1,  mean = Q^-1 V*'(Omega C + xi),
// where V* = [V | I_N]. The zeta block of Q is diagonal, so the draw goes
// through the (P+1) x (P+1) Schur complement. Noise is mapped with the
// Cholesky factor of Q in (zeta, delta) order.
struct LogisticConditional {
  Eigen::VectorXd delta_mean;
  Eigen::VectorXd zeta_mean;
  Eigen::MatrixXd schur_chol;   // lower factor of the Schur complement
  Eigen::VectorXd zeta_precision;  // omega_i + 1 / kappa^2
  Eigen::VectorXd zeta_rhs;        // (Omega C + xi)_i
  Eigen::MatrixXd omega_v;         // Omega V

  std::pair<Eigen::VectorXd, Eigen::VectorXd> draw(const Eigen::VectorXd& e_zeta,
                                                   const Eigen::VectorXd& e_delta) const;
};

LogisticConditional logistic_conditional(const Eigen::MatrixXd& covariates,
                                         const Eigen::VectorXd& omega,
                                         const Eigen::VectorXd& offset,
                                         const Eigen::VectorXd& xi, double sigma_delta_sq,
                                         double kappa_sq);

// C_ig = log sum_{h != g} exp(V_i' delta_h + zeta_ih), reference included.
Eigen::VectorXd logit_offsets(const Eigen::MatrixXd& covariates, const Components& params, int g);

inline constexpr double kMaxLogit = 700.0;

// ---------------------------------------------------------------------------

// One chain over a fixed dataset. Steps are exposed individually so each can
// be exercised on its own; sweep() runs them in the fixed order
//   theta, sigma^2, tau^2, (delta, zeta), kappa^2, weights, allocations.
class GibbsSampler {
 public:
  GibbsSampler(const Dataset& data, const FitConfig& config, std::uint64_t stream_id = 0);

  // Starts from a user-supplied state instead of the configured initializer.
  GibbsSampler(const Dataset& data, const FitConfig& config, ChainState initial,
               std::uint64_t stream_id = 0);

  const BasisSet& basis() const { return basis_; }
  const DataSummary& summary() const { return summary_; }
  const ChainState& state() const { return state_; }
  ChainState& mutable_state() { return state_; }
  RngStream& rng() { return rng_; }

  void step_theta(int g, int k);
  void step_sigma(int g, int k);
  void step_tau(int g, int k);
  void step_delta(int g);
  void step_kappa(int g);
  void update_weights();
  // Redraws allocations and returns the observed-data log-likelihood of the
  // parameters used for the draw.
  double step_allocate();

  // One full sweep; returns the observed-data log-likelihood.
  double sweep();

  double log_likelihood() const;

  // Data-dependent rebuild after the caller replaces dataset responses in place
  // (used by joint-distribution tests).
  void refresh_summary();

 private:
  void initialize();
  Eigen::VectorXd allocated_sy_sum(int g, int k) const;

  const Dataset& data_;
  FitConfig config_;
  BasisSet basis_;
  DataSummary summary_;
  RngStream rng_;
  ChainState state_;
};

// k-means on flattened K*n response vectors (k-means++ seeding, Lloyd steps).
std::vector<int> kmeans_labels(const Dataset& data, int G, RngStream& rng, int max_iter = 100);

// Independent draw of every non-allocation parameter from its prior.
void draw_from_prior(ChainState& state, const Hyperparams& hyper, int K, int m, int P, int N,
                     RngStream& rng);

// Runs iterations sweeps and keeps every thin-th draw after burn_in.
// Deterministic given (data, config, stream_id).
PosteriorSamples run_chain(const Dataset& data, const FitConfig& config,
                           std::uint64_t stream_id = 0);

}  // namespace splinemix
