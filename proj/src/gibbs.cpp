#include "splinemix/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "splinemix/error.hpp"

namespace splinemix {

void FitConfig::validate() const {
  if (G < 1) throw ConfigError("G must be at least 1");
  if (m < 1) throw ConfigError("m must be at least 1");
  if (thin < 1) throw ConfigError("thin must be at least 1");
  if (burn_in < 0 || iterations < 1 || burn_in >= iterations) {
    throw ConfigError("need 0 <= burn_in < iterations");
  }
  hyper.validate();
}

// ---------------------------------------------------------------------------

Eigen::VectorXd ThetaConditional::draw(const Eigen::VectorXd& std_normal) const {
  const Eigen::VectorXd u =
      system_chol.transpose().triangularView<Eigen::Upper>().solve(std_normal);
  return mean + std::sqrt(sigma_sq) * u;
}

ThetaConditional theta_conditional(const Eigen::MatrixXd& sts, const Eigen::VectorXd& sum_sy,
                                   int n_g, double sigma_sq, double tau_sq, double sigma_alpha_sq) {
  const Eigen::Index p = sts.rows();
  Eigen::MatrixXd system = static_cast<double>(n_g) * sts;
  system(0, 0) += sigma_sq / sigma_alpha_sq;
  system(1, 1) += sigma_sq / sigma_alpha_sq;
  for (Eigen::Index j = 2; j < p; ++j) system(j, j) += sigma_sq / tau_sq;

  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(system);
    const auto& sv = svd.singularValues();
    std::ostringstream msg;
    msg << "theta precision not positive definite (condition number "
        << sv(0) / sv(sv.size() - 1) << ", sigma^2 = " << sigma_sq << ", tau^2 = " << tau_sq << ")";
    throw NumericalError(msg.str());
  }
  ThetaConditional out;
  out.mean = llt.solve(sum_sy);
  out.system_chol = llt.matrixL();
  out.sigma_sq = sigma_sq;
  return out;
}

InverseGammaParams latent_conditional(double current, double nu, double A) {
  return {0.5 * (nu + 1.0), nu / current + 1.0 / (A * A)};
}

InverseGammaParams variance_conditional(double nu, double count, double half_ss, double latent) {
  return {0.5 * (count + nu), half_ss + nu / latent};
}

VarianceDraw draw_variance_pair(double current, double nu, double A, double count,
                                double half_ss, RngStream& rng) {
  const auto a = latent_conditional(current, nu, A);
  const double latent = draw_inverse_gamma(a.shape, a.rate, rng);
  const auto v = variance_conditional(nu, count, half_ss, latent);
  return {draw_inverse_gamma(v.shape, v.rate, rng), latent};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> LogisticConditional::draw(
    const Eigen::VectorXd& e_zeta, const Eigen::VectorXd& e_delta) const {
  Eigen::VectorXd delta =
      delta_mean + schur_chol.transpose().triangularView<Eigen::Upper>().solve(e_delta);
  // zeta | delta is Gaussian with diagonal precision.
  Eigen::VectorXd zeta = (zeta_rhs - omega_v * delta).cwiseQuotient(zeta_precision) +
                         e_zeta.cwiseQuotient(zeta_precision.cwiseSqrt());
  return {std::move(delta), std::move(zeta)};
}

LogisticConditional logistic_conditional(const Eigen::MatrixXd& covariates,
                                         const Eigen::VectorXd& omega,
                                         const Eigen::VectorXd& offset,
                                         const Eigen::VectorXd& xi, double sigma_delta_sq,
                                         double kappa_sq) {
  const Eigen::Index p1 = covariates.cols();
  LogisticConditional out;
  out.zeta_rhs = omega.cwiseProduct(offset) + xi;
  out.zeta_precision = omega.array() + 1.0 / kappa_sq;
  out.omega_v = omega.asDiagonal() * covariates;

  // Schur complement of the zeta block: V' diag(w - w^2 / d) V + I / sigma_delta^2.
  const Eigen::VectorXd reduced =
      omega.array() - omega.array().square() / out.zeta_precision.array();
  Eigen::MatrixXd schur = covariates.transpose() * reduced.asDiagonal() * covariates;
  schur.diagonal().array() += 1.0 / sigma_delta_sq;
  const Eigen::VectorXd rhs =
      covariates.transpose() * out.zeta_rhs -
      out.omega_v.transpose() * out.zeta_rhs.cwiseQuotient(out.zeta_precision);

  Eigen::LLT<Eigen::MatrixXd> llt(schur);
  if (llt.info() != Eigen::Success) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(schur);
    const auto& sv = svd.singularValues();
    std::ostringstream msg;
    msg << "logistic precision not positive definite (Schur block " << p1 << "x" << p1
        << ", condition number " << sv(0) / sv(sv.size() - 1) << ")";
    throw NumericalError(msg.str());
  }
  out.schur_chol = llt.matrixL();
  out.delta_mean = llt.solve(rhs);
  out.zeta_mean =
      (out.zeta_rhs - out.omega_v * out.delta_mean).cwiseQuotient(out.zeta_precision);
  return out;
}

Eigen::VectorXd logit_offsets(const Eigen::MatrixXd& covariates, const Components& params, int g) {
  const int G = static_cast<int>(params.size());
  const Eigen::Index N = covariates.rows();
  Eigen::MatrixXd eta(N, G - 1);
  int col = 0;
  for (int h = 0; h < G; ++h) {
    if (h == g) continue;
    const auto& c = params[static_cast<std::size_t>(h)];
    eta.col(col++) = covariates * c.delta + c.zeta;
  }
  Eigen::VectorXd out(N);
  for (Eigen::Index i = 0; i < N; ++i) out(i) = log_sum_exp(eta.row(i).transpose());
  return out;
}

// ---------------------------------------------------------------------------

std::vector<int> kmeans_labels(const Dataset& data, int G, RngStream& rng, int max_iter) {
  const int N = data.N();
  std::vector<int> labels(static_cast<std::size_t>(N), 0);
  if (G == 1) return labels;
  const Eigen::Index dim = static_cast<Eigen::Index>(data.n()) * data.K();
  Eigen::MatrixXd points(dim, N);
  for (int i = 0; i < N; ++i) {
    points.col(i) = Eigen::Map<const Eigen::VectorXd>(data.y[static_cast<std::size_t>(i)].data(), dim);
  }

  // k-means++ seeding.
  Eigen::MatrixXd centers(dim, G);
  const int first = std::min(N - 1, static_cast<int>(rng.uniform() * N));
  centers.col(0) = points.col(first);
  Eigen::VectorXd nearest = (points.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
  for (int c = 1; c < G; ++c) {
    const double total = nearest.sum();
    int pick = N - 1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (int i = 0; i < N; ++i) {
        u -= nearest(i);
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::min(N - 1, static_cast<int>(rng.uniform() * N));
    }
    centers.col(c) = points.col(pick);
    nearest = nearest.cwiseMin(
        (points.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = iter == 0;
    for (int i = 0; i < N; ++i) {
      Eigen::Index best = 0;
      (centers.colwise() - points.col(i)).colwise().squaredNorm().minCoeff(&best);
      if (labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, G);
    std::vector<int> counts(static_cast<std::size_t>(G), 0);
    for (int i = 0; i < N; ++i) {
      sums.col(labels[static_cast<std::size_t>(i)]) += points.col(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < G; ++c) {
      // Empty clusters keep their previous center.
      if (counts[static_cast<std::size_t>(c)] > 0) centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
    }
  }
  return labels;
}

void draw_from_prior(ChainState& state, const Hyperparams& hyper, int K, int m, int P, int N,
                     RngStream& rng) {
  const int G = static_cast<int>(state.params.size());
  auto& lat = state.latent;
  lat.a_sigma.resize(G, K);
  lat.a_tau.resize(G, K);
  lat.a_kappa.resize(G);
  lat.omega = Eigen::MatrixXd::Constant(N, G, 0.25);
  for (int g = 0; g < G; ++g) {
    auto& comp = state.params[static_cast<std::size_t>(g)];
    comp = ComponentParams::zeros(K, m, P, N);
    for (int k = 0; k < K; ++k) {
      auto& e = comp.entries[static_cast<std::size_t>(k)];
      lat.a_sigma(g, k) = draw_inverse_gamma(0.5, 1.0 / (hyper.A_sigma * hyper.A_sigma), rng);
      e.sigma_sq = draw_inverse_gamma(0.5 * hyper.nu_sigma, hyper.nu_sigma / lat.a_sigma(g, k), rng);
      lat.a_tau(g, k) = draw_inverse_gamma(0.5, 1.0 / (hyper.A_tau * hyper.A_tau), rng);
      e.tau_sq = draw_inverse_gamma(0.5 * hyper.nu_tau, hyper.nu_tau / lat.a_tau(g, k), rng);
      const double sa = std::sqrt(hyper.sigma_alpha_sq);
      e.alpha(0) = sa * rng.normal();
      e.alpha(1) = sa * rng.normal();
      const double st = std::sqrt(e.tau_sq);
      for (int q = 0; q < m; ++q) e.beta(q) = st * rng.normal();
    }
    lat.a_kappa(g) = draw_inverse_gamma(0.5, 1.0 / (hyper.A_kappa * hyper.A_kappa), rng);
    comp.kappa_sq = draw_inverse_gamma(0.5 * hyper.nu_kappa, hyper.nu_kappa / lat.a_kappa(g), rng);
    if (g < G - 1) {
      const double sd = std::sqrt(hyper.sigma_delta_sq);
      for (int p = 0; p <= P; ++p) comp.delta(p) = sd * rng.normal();
      const double sk = std::sqrt(comp.kappa_sq);
      for (int i = 0; i < N; ++i) comp.zeta(i) = sk * rng.normal();
    }
  }
}

// ---------------------------------------------------------------------------

GibbsSampler::GibbsSampler(const Dataset& data, const FitConfig& config, std::uint64_t stream_id)
    : data_(data),
      config_(config),
      basis_(build_basis(data.grid, config.m)),
      summary_(data, basis_),
      rng_(config.seed, stream_id) {
  config_.validate();
  data_.validate();
  initialize();
}

GibbsSampler::GibbsSampler(const Dataset& data, const FitConfig& config, ChainState initial,
                           std::uint64_t stream_id)
    : data_(data),
      config_(config),
      basis_(build_basis(data.grid, config.m)),
      summary_(data, basis_),
      rng_(config.seed, stream_id),
      state_(std::move(initial)) {
  config_.validate();
  data_.validate();
  if (static_cast<int>(state_.params.size()) != config_.G) {
    throw ConfigError("initial state has the wrong number of components");
  }
  update_weights();
}

void GibbsSampler::initialize() {
  const int G = config_.G;
  const int N = data_.N();
  state_.params.assign(static_cast<std::size_t>(G), ComponentParams{});
  if (config_.init == InitMethod::kmeans) {
    state_.latent.z = kmeans_labels(data_, G, rng_);
  } else {
    state_.latent.z.resize(static_cast<std::size_t>(N));
    for (auto& label : state_.latent.z) label = std::min(G - 1, static_cast<int>(rng_.uniform() * G));
  }
  draw_from_prior(state_, config_.hyper, data_.K(), basis_.m(), data_.P(), N, rng_);
  update_weights();
}

void GibbsSampler::refresh_summary() { summary_ = DataSummary(data_, basis_); }

Eigen::VectorXd GibbsSampler::allocated_sy_sum(int g, int k) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(summary_.p());
  for (int i = 0; i < summary_.N(); ++i) {
    if (state_.latent.z[static_cast<std::size_t>(i)] == g) acc += summary_.sy(i).col(k);
  }
  return acc;
}

void GibbsSampler::step_theta(int g, int k) {
  auto& e = state_.params[static_cast<std::size_t>(g)].entries[static_cast<std::size_t>(k)];
  const int n_g = state_.latent.counts(config_.G)[static_cast<std::size_t>(g)];
  const ThetaConditional cond = theta_conditional(summary_.sts(), allocated_sy_sum(g, k), n_g,
                                                  e.sigma_sq, e.tau_sq, config_.hyper.sigma_alpha_sq);
  e.set_theta(cond.draw(standard_normal_vector(summary_.p(), rng_)));
}

void GibbsSampler::step_sigma(int g, int k) {
  auto& e = state_.params[static_cast<std::size_t>(g)].entries[static_cast<std::size_t>(k)];
  const Eigen::VectorXd theta = e.theta();
  double ss = 0.0;
  int n_g = 0;
  for (int i = 0; i < summary_.N(); ++i) {
    if (state_.latent.z[static_cast<std::size_t>(i)] != g) continue;
    ss += summary_.residual_ss(i, k, theta);
    ++n_g;
  }
  const auto& h = config_.hyper;
  const VarianceDraw d = draw_variance_pair(e.sigma_sq, h.nu_sigma, h.A_sigma,
                                            static_cast<double>(summary_.n()) * n_g, 0.5 * ss, rng_);
  e.sigma_sq = d.variance;
  state_.latent.a_sigma(g, k) = d.latent;
}

void GibbsSampler::step_tau(int g, int k) {
  auto& e = state_.params[static_cast<std::size_t>(g)].entries[static_cast<std::size_t>(k)];
  const auto& h = config_.hyper;
  const VarianceDraw d = draw_variance_pair(e.tau_sq, h.nu_tau, h.A_tau,
                                            static_cast<double>(e.beta.size()),
                                            0.5 * e.beta.squaredNorm(), rng_);
  e.tau_sq = d.variance;
  state_.latent.a_tau(g, k) = d.latent;
}

void GibbsSampler::step_delta(int g) {
  const int G = config_.G;
  if (g >= G - 1) return;  // reference component is fixed at zero
  const int N = data_.N();
  auto& comp = state_.params[static_cast<std::size_t>(g)];
  const Eigen::VectorXd offset = logit_offsets(data_.covariates, state_.params, g);
  const Eigen::VectorXd eta = data_.covariates * comp.delta + comp.zeta - offset;

  Eigen::VectorXd omega(N), xi(N);
  for (int i = 0; i < N; ++i) {
    const double clipped = std::clamp(eta(i), -kMaxLogit, kMaxLogit);
    omega(i) = draw_polya_gamma(clipped, rng_);
    xi(i) = (state_.latent.z[static_cast<std::size_t>(i)] == g ? 1.0 : 0.0) - 0.5;
  }
  state_.latent.omega.col(g) = omega;

  const LogisticConditional cond = logistic_conditional(
      data_.covariates, omega, offset, xi, config_.hyper.sigma_delta_sq, comp.kappa_sq);
  const Eigen::VectorXd e_zeta = standard_normal_vector(N, rng_);
  const Eigen::VectorXd e_delta = standard_normal_vector(data_.P() + 1, rng_);
  auto [delta, zeta] = cond.draw(e_zeta, e_delta);
  comp.delta = std::move(delta);
  comp.zeta = std::move(zeta);
}

void GibbsSampler::step_kappa(int g) {
  if (g >= config_.G - 1) return;
  auto& comp = state_.params[static_cast<std::size_t>(g)];
  const auto& h = config_.hyper;
  const VarianceDraw d = draw_variance_pair(comp.kappa_sq, h.nu_kappa, h.A_kappa,
                                            static_cast<double>(comp.zeta.size()),
                                            0.5 * comp.zeta.squaredNorm(), rng_);
  comp.kappa_sq = d.variance;
  state_.latent.a_kappa(g) = d.latent;
}

void GibbsSampler::update_weights() { state_.weights = mixing_weight_matrix(data_, state_.params); }

double GibbsSampler::step_allocate() {
  const int G = config_.G;
  const Eigen::MatrixXd logdens = summary_.log_density_matrix(state_.params);
  const Eigen::MatrixXd terms = logdens.array() + state_.weights.array().log();
  double loglik = 0.0;
  for (int i = 0; i < summary_.N(); ++i) {
    const Eigen::VectorXd row = terms.row(i).transpose();
    const double lse = log_sum_exp(row);
    if (!std::isfinite(lse)) {
      std::ostringstream msg;
      msg << "allocation probabilities undefined for subject index " << i
          << ": every component has zero density";
      throw NumericalError(msg.str());
    }
    loglik += lse;
    if (G == 1) continue;
    double u = rng_.uniform();
    int pick = G - 1;
    for (int g = 0; g < G; ++g) {
      u -= std::exp(row(g) - lse);
      if (u <= 0.0) {
        pick = g;
        break;
      }
    }
    state_.latent.z[static_cast<std::size_t>(i)] = pick;
  }
  return loglik;
}

double GibbsSampler::sweep() {
  const int G = config_.G;
  const int K = data_.K();
  for (int g = 0; g < G; ++g)
    for (int k = 0; k < K; ++k) step_theta(g, k);
  for (int g = 0; g < G; ++g)
    for (int k = 0; k < K; ++k) step_sigma(g, k);
  for (int g = 0; g < G; ++g)
    for (int k = 0; k < K; ++k) step_tau(g, k);
  for (int g = 0; g < G - 1; ++g) step_delta(g);
  for (int g = 0; g < G - 1; ++g) step_kappa(g);
  update_weights();
  return step_allocate();
}

double GibbsSampler::log_likelihood() const {
  const Eigen::MatrixXd logdens = summary_.log_density_matrix(state_.params);
  return log_mixture_rows(logdens, state_.weights).sum();
}

PosteriorSamples run_chain(const Dataset& data, const FitConfig& config, std::uint64_t stream_id) {
  GibbsSampler sampler(data, config, stream_id);
  PosteriorSamples out;
  out.G = config.G;
  out.K = data.K();
  out.m = sampler.basis().m();
  out.P = data.P();
  out.N = data.N();
  const int kept = config.kept_sweeps();
  out.sweep.reserve(static_cast<std::size_t>(kept));
  out.params.reserve(static_cast<std::size_t>(kept));
  out.z.reserve(static_cast<std::size_t>(kept));
  out.log_likelihood.reserve(static_cast<std::size_t>(kept));
  for (int s = 1; s <= config.iterations; ++s) {
    double loglik = 0.0;
    try {
      loglik = sampler.sweep();
    } catch (const NumericalError& err) {
      throw NumericalError("sweep " + std::to_string(s) + ": " + err.what());
    }
    if (s > config.burn_in && (s - config.burn_in) % config.thin == 0 &&
        out.size() < kept) {
      out.sweep.push_back(s);
      out.params.push_back(sampler.state().params);
      out.z.push_back(sampler.state().latent.z);
      out.log_likelihood.push_back(loglik);
    }
  }
  return out;
}

}  // namespace splinemix
