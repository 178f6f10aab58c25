#include "splinemix/model.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "splinemix/error.hpp"

namespace splinemix {

void Dataset::validate() const {
  const int N_ = N();
  if (N_ == 0) throw DataError("dataset has no subjects");
  const int K_ = K();
  if (K_ == 0) throw DataError("dataset has no entries");
  for (int i = 0; i < N_; ++i) {
    const auto& yi = y[static_cast<std::size_t>(i)];
    if (yi.rows() != n() || yi.cols() != K_) {
      std::ostringstream msg;
      msg << "subject " << i << " has a " << yi.rows() << "x" << yi.cols()
          << " response block, expected " << n() << "x" << K_;
      throw DataError(msg.str());
    }
    if (!yi.allFinite()) throw DataError("non-finite response for subject index " + std::to_string(i));
  }
  if (covariates.rows() != N_ || covariates.cols() < 1) {
    throw DataError("covariate matrix must have one row per subject and an intercept column");
  }
  if (!covariates.allFinite()) throw DataError("non-finite covariate value");
  if ((covariates.col(0).array() != 1.0).any()) {
    throw DataError("first covariate column must be identically 1");
  }
}

void Dataset::standardize_covariates() {
  const int P_ = P();
  const int N_ = static_cast<int>(covariates.rows());
  covariate_means = Eigen::VectorXd::Zero(P_);
  covariate_sds = Eigen::VectorXd::Ones(P_);
  if (N_ < 2) return;
  for (int p = 1; p <= P_; ++p) {
    auto col = covariates.col(p);
    std::set<double> distinct(col.data(), col.data() + N_);
    if (distinct.size() <= 2) continue;
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (N_ - 1));
    if (!(sd > 0.0)) continue;
    col = ((col.array() - mean) / sd).matrix();
    covariate_means(p - 1) = mean;
    covariate_sds(p - 1) = sd;
  }
}

void Hyperparams::validate() const {
  const double values[] = {sigma_alpha_sq, nu_sigma, A_sigma, nu_tau,        A_tau,
                           nu_kappa,       A_kappa,  sigma_delta_sq};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("hyperparameters must be positive and finite");
  }
}

Eigen::VectorXd EntryParams::theta() const {
  Eigen::VectorXd t(2 + beta.size());
  t << alpha, beta;
  return t;
}

void EntryParams::set_theta(const Eigen::VectorXd& theta) {
  alpha = theta.head<2>();
  beta = theta.tail(theta.size() - 2);
}

ComponentParams ComponentParams::zeros(int K, int m, int P, int N) {
  ComponentParams c;
  c.entries.resize(static_cast<std::size_t>(K));
  for (auto& e : c.entries) e.beta = Eigen::VectorXd::Zero(m);
  c.delta = Eigen::VectorXd::Zero(P + 1);
  c.zeta = Eigen::VectorXd::Zero(N);
  return c;
}

Eigen::MatrixXd LatentState::one_hot(int G) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(z.size()), G);
  for (std::size_t i = 0; i < z.size(); ++i) out(static_cast<Eigen::Index>(i), z[i]) = 1.0;
  return out;
}

std::vector<int> LatentState::counts(int G) const {
  std::vector<int> c(static_cast<std::size_t>(G), 0);
  for (int label : z) ++c[static_cast<std::size_t>(label)];
  return c;
}

Eigen::VectorXd component_mean(const EntryParams& entry, const BasisSet& basis) {
  if (entry.beta.size() != basis.m()) {
    std::ostringstream msg;
    msg << "beta has length " << entry.beta.size() << " but the basis has " << basis.m()
        << " spline columns";
    throw NumericalError(msg.str());
  }
  return basis.fixed * entry.alpha + basis.spline * entry.beta;
}

Eigen::VectorXd component_mean(const Components& params, const BasisSet& basis, int g, int k) {
  return component_mean(params.at(static_cast<std::size_t>(g)).entries.at(static_cast<std::size_t>(k)),
                        basis);
}

double log_component_density(const Eigen::Ref<const Eigen::VectorXd>& y,
                             const Eigen::Ref<const Eigen::VectorXd>& mean, double sigma_sq) {
  if (!(sigma_sq > 0.0)) {
    std::ostringstream msg;
    msg << "component variance must be positive, got " << sigma_sq;
    throw NumericalError(msg.str());
  }
  if (y.size() != mean.size()) throw NumericalError("density: response and mean lengths differ");
  const double n = static_cast<double>(y.size());
  return -0.5 * n * std::log(2.0 * M_PI * sigma_sq) - 0.5 * (y - mean).squaredNorm() / sigma_sq;
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double mx = v.maxCoeff();
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

Eigen::VectorXd mixing_weights(const Eigen::Ref<const Eigen::VectorXd>& covariates_row,
                               const Eigen::MatrixXd& deltas,
                               const Eigen::Ref<const Eigen::VectorXd>& zetas_row) {
  Eigen::VectorXd eta = deltas * covariates_row + zetas_row;
  if (!eta.allFinite()) throw NumericalError("non-finite mixing-weight linear predictor");
  eta.array() -= eta.maxCoeff();
  Eigen::VectorXd w = eta.array().exp();
  return w / w.sum();
}

Eigen::MatrixXd delta_matrix(const Components& params) {
  const auto G = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd d(G, params.front().delta.size());
  for (Eigen::Index g = 0; g < G; ++g) d.row(g) = params[static_cast<std::size_t>(g)].delta.transpose();
  return d;
}

Eigen::MatrixXd mixing_weight_matrix(const Dataset& data, const Components& params) {
  const int G = static_cast<int>(params.size());
  const Eigen::MatrixXd deltas = delta_matrix(params);
  Eigen::MatrixXd w(data.N(), G);
  Eigen::VectorXd zrow(G);
  for (int i = 0; i < data.N(); ++i) {
    for (int g = 0; g < G; ++g) zrow(g) = params[static_cast<std::size_t>(g)].zeta(i);
    w.row(i) = mixing_weights(data.covariates.row(i).transpose(), deltas, zrow).transpose();
  }
  return w;
}

namespace {

Eigen::VectorXd normalize_log(const Eigen::VectorXd& logp) {
  const double lse = log_sum_exp(logp);
  if (!std::isfinite(lse)) {
    std::ostringstream msg;
    msg << "allocation probabilities undefined: every component has log density -inf (log terms:";
    for (Eigen::Index g = 0; g < logp.size(); ++g) msg << ' ' << logp(g);
    msg << ")";
    throw NumericalError(msg.str());
  }
  return (logp.array() - lse).exp();
}

}  // namespace

Eigen::VectorXd allocation_probs(const Eigen::MatrixXd& y_i, const Components& params,
                                 const BasisSet& basis,
                                 const Eigen::Ref<const Eigen::VectorXd>& weights_row) {
  const int G = static_cast<int>(params.size());
  Eigen::VectorXd logp(G);
  for (int g = 0; g < G; ++g) {
    double acc = std::log(weights_row(g));
    const auto& comp = params[static_cast<std::size_t>(g)];
    for (int k = 0; k < y_i.cols(); ++k) {
      const auto& e = comp.entries[static_cast<std::size_t>(k)];
      acc += log_component_density(y_i.col(k), component_mean(e, basis), e.sigma_sq);
    }
    logp(g) = acc;
  }
  Eigen::VectorXd p = normalize_log(logp);
  return p / p.sum();
}

double log_observed_likelihood(const Dataset& data, const Components& params,
                               const BasisSet& basis, const Eigen::MatrixXd& weights) {
  const int G = static_cast<int>(params.size());
  std::vector<Eigen::MatrixXd> means(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) {
    auto& mg = means[static_cast<std::size_t>(g)];
    mg.resize(data.n(), data.K());
    for (int k = 0; k < data.K(); ++k) mg.col(k) = component_mean(params, basis, g, k);
  }
  double total = 0.0;
  Eigen::VectorXd logp(G);
  for (int i = 0; i < data.N(); ++i) {
    const auto& yi = data.y[static_cast<std::size_t>(i)];
    for (int g = 0; g < G; ++g) {
      double acc = std::log(weights(i, g));
      const auto& comp = params[static_cast<std::size_t>(g)];
      for (int k = 0; k < data.K(); ++k) {
        acc += log_component_density(yi.col(k), means[static_cast<std::size_t>(g)].col(k),
                                     comp.entries[static_cast<std::size_t>(k)].sigma_sq);
      }
      logp(g) = acc;
    }
    const double lse = log_sum_exp(logp);
    if (!std::isfinite(lse)) throw NumericalError("observed likelihood is zero for subject index " + std::to_string(i));
    total += lse;
  }
  return total;
}

DataSummary::DataSummary(const Dataset& data, const BasisSet& basis)
    : K_(data.K()), n_(data.n()) {
  const Eigen::MatrixXd s = basis.design();
  sts_ = s.transpose() * s;
  sy_.reserve(static_cast<std::size_t>(data.N()));
  yy_.resize(data.N(), K_);
  for (int i = 0; i < data.N(); ++i) {
    const auto& yi = data.y[static_cast<std::size_t>(i)];
    sy_.push_back(s.transpose() * yi);
    yy_.row(i) = yi.colwise().squaredNorm();
  }
}

double DataSummary::residual_ss(int i, int k, const Eigen::VectorXd& theta) const {
  const double rss = yy_(i, k) - 2.0 * theta.dot(sy_[static_cast<std::size_t>(i)].col(k)) +
                     theta.dot(sts_ * theta);
  return rss > 0.0 ? rss : 0.0;
}

Eigen::MatrixXd DataSummary::log_density_matrix(const Components& params) const {
  const int G = static_cast<int>(params.size());
  const int N_ = N();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N_, G);
  const double half_n = 0.5 * n_;
  for (int g = 0; g < G; ++g) {
    const auto& comp = params[static_cast<std::size_t>(g)];
    for (int k = 0; k < K_; ++k) {
      const auto& e = comp.entries[static_cast<std::size_t>(k)];
      const Eigen::VectorXd theta = e.theta();
      const double quad = theta.dot(sts_ * theta);
      const double norm_const = -half_n * std::log(2.0 * M_PI * e.sigma_sq);
      const double inv2s = 0.5 / e.sigma_sq;
      for (int i = 0; i < N_; ++i) {
        double rss = yy_(i, k) - 2.0 * theta.dot(sy_[static_cast<std::size_t>(i)].col(k)) + quad;
        if (rss < 0.0) rss = 0.0;
        out(i, g) += norm_const - inv2s * rss;
      }
    }
  }
  return out;
}

Eigen::VectorXd log_mixture_rows(const Eigen::MatrixXd& log_density, const Eigen::MatrixXd& weights) {
  const Eigen::MatrixXd terms = log_density.array() + weights.array().log();
  Eigen::VectorXd out(terms.rows());
  for (Eigen::Index i = 0; i < terms.rows(); ++i) {
    out(i) = log_sum_exp(terms.row(i).transpose());
    if (!std::isfinite(out(i))) throw NumericalError("observed likelihood is zero for subject index " + std::to_string(i));
  }
  return out;
}

}  // namespace splinemix
