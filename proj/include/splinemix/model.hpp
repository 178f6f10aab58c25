#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splinemix/spline_basis.hpp"

namespace splinemix {

// Replicated multivariate series on a common grid plus subject covariates.
//   y[i] is n x K: column k holds entry k of subject i.
//   covariates is N x (P + 1) with a leading column of ones.
struct Dataset {
  TimeGrid grid;
  std::vector<Eigen::MatrixXd> y;
  Eigen::MatrixXd covariates;

  std::vector<std::string> subject_ids;
  std::vector<std::string> entry_names;
  std::vector<std::string> covariate_names;  // P names, intercept excluded

  // Centering/scaling applied to covariate columns 1..P; identity when unscaled.
  Eigen::VectorXd covariate_means;
  Eigen::VectorXd covariate_sds;

  int N() const { return static_cast<int>(y.size()); }
  int K() const { return y.empty() ? 0 : static_cast<int>(y.front().cols()); }
  int n() const { return grid.size(); }
  int P() const { return static_cast<int>(covariates.cols()) - 1; }

  // Throws DataError on shape mismatches, non-finite values or a missing
  // intercept column.
  void validate() const;

  // Centers and scales every non-binary covariate column to mean 0, sd 1 and
  // records the transform. Binary (two-valued) and constant columns are left alone.
  void standardize_covariates();
};

// Prior hyperparameters. Inverse-gamma quantities are always (shape, rate).
struct Hyperparams {
  double sigma_alpha_sq = 100.0;
  double nu_sigma = 3.0, A_sigma = 10.0;
  double nu_tau = 3.0, A_tau = 10.0;
  double nu_kappa = 3.0, A_kappa = 10.0;
  double sigma_delta_sq = 10.0;

  void validate() const;
};

struct EntryParams {
  Eigen::Vector2d alpha = Eigen::Vector2d::Zero();
  Eigen::VectorXd beta;
  double tau_sq = 1.0;
  double sigma_sq = 1.0;

  // theta = (alpha, beta)
  Eigen::VectorXd theta() const;
  void set_theta(const Eigen::VectorXd& theta);
};

// Parameters of one mixture component. For the reference (last) component
// delta and zeta are identically zero.
struct ComponentParams {
  std::vector<EntryParams> entries;  // K
  Eigen::VectorXd delta;             // P + 1
  Eigen::VectorXd zeta;              // N
  double kappa_sq = 1.0;

  static ComponentParams zeros(int K, int m, int P, int N);
};

using Components = std::vector<ComponentParams>;

// Latent allocation and augmentation variables.
struct LatentState {
  std::vector<int> z;        // N labels in [0, G)
  Eigen::MatrixXd omega;     // N x G Polya-Gamma variables (reference column unused)
  Eigen::MatrixXd a_sigma;   // G x K
  Eigen::MatrixXd a_tau;     // G x K
  Eigen::VectorXd a_kappa;   // G

  Eigen::MatrixXd one_hot(int G) const;
  std::vector<int> counts(int G) const;
};

// X alpha_gk + W beta_gk.
Eigen::VectorXd component_mean(const EntryParams& entry, const BasisSet& basis);
Eigen::VectorXd component_mean(const Components& params, const BasisSet& basis, int g, int k);

// log N(y; mean, sigma_sq I_n).
double log_component_density(const Eigen::Ref<const Eigen::VectorXd>& y,
                             const Eigen::Ref<const Eigen::VectorXd>& mean, double sigma_sq);

// Softmax of V' delta_g + zeta_g over components, max-shifted.
Eigen::VectorXd mixing_weights(const Eigen::Ref<const Eigen::VectorXd>& covariates_row,
                               const Eigen::MatrixXd& deltas,
                               const Eigen::Ref<const Eigen::VectorXd>& zetas_row);

// Delta rows (G x (P+1)) of a parameter set.
Eigen::MatrixXd delta_matrix(const Components& params);

// N x G weight matrix for every subject.
Eigen::MatrixXd mixing_weight_matrix(const Dataset& data, const Components& params);

// Posterior allocation probabilities of one subject (y_i is n x K).
Eigen::VectorXd allocation_probs(const Eigen::MatrixXd& y_i, const Components& params,
                                 const BasisSet& basis,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights_row);

// Sum over subjects of log sum_g pi_ig prod_k f_gk(y_ik).
double log_observed_likelihood(const Dataset& data, const Components& params,
                               const BasisSet& basis, const Eigen::MatrixXd& weights);

// Per-subject sufficient statistics S'y_ik and y_ik'y_ik, plus S'S. Lets the
// sampler evaluate residual sums of squares without touching the raw series.
class DataSummary {
 public:
  DataSummary(const Dataset& data, const BasisSet& basis);

  int N() const { return static_cast<int>(sy_.size()); }
  int K() const { return K_; }
  int n() const { return n_; }
  int p() const { return static_cast<int>(sts_.rows()); }

  const Eigen::MatrixXd& sts() const { return sts_; }
  // p x K, column k = S' y_ik.
  const Eigen::MatrixXd& sy(int i) const { return sy_[static_cast<std::size_t>(i)]; }
  double yy(int i, int k) const { return yy_(i, k); }

  // ||y_ik - S theta||^2, clamped at zero.
  double residual_ss(int i, int k, const Eigen::VectorXd& theta) const;

  // N x G matrix with entries sum_k log f_gk(y_ik).
  Eigen::MatrixXd log_density_matrix(const Components& params) const;

 private:
  int K_;
  int n_;
  Eigen::MatrixXd sts_;
  std::vector<Eigen::MatrixXd> sy_;
  Eigen::MatrixXd yy_;
};

// Row-wise log-sum-exp of log weights + log densities; returns per-subject values.
Eigen::VectorXd log_mixture_rows(const Eigen::MatrixXd& log_density, const Eigen::MatrixXd& weights);

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace splinemix
