#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace splinemix {

// xoshiro256** stream keyed by (seed, stream_id). Identical keys reproduce
// identical sequences on every platform; distinct stream ids get unrelated
// states through splitmix64 hashing of the key.
//
// Satisfies UniformRandomBitGenerator, but the variates below never go
// through <random> distributions, whose output is implementation defined.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  // Exponential with rate 1.
  double exponential();
  // Gamma with the given shape and rate 1 (Marsaglia-Tsang).
  double gamma(double shape);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Polya-Gamma PG(1, c), exact alternating-series sampler (Devroye-type).
double draw_polya_gamma(double c, RngStream& rng);

// Inverse-gamma in (shape, rate) form: density proportional to
// x^(-shape-1) exp(-rate / x). The reciprocal is Gamma(shape, rate).
double draw_inverse_gamma(double shape, double rate, RngStream& rng);

// Square of a half-t(nu, scale) variate via the inverse-gamma mixture
//   a ~ IG(1/2, 1/scale^2),  x | a ~ IG(nu/2, nu/a).
double draw_half_t_sq(double nu, double scale, RngStream& rng);

// mean + cov_factor * e with e standard normal; cov_factor lower triangular.
Eigen::VectorXd draw_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov_factor,
                         RngStream& rng);

Eigen::VectorXd standard_normal_vector(int d, RngStream& rng);

// Natural log of the standard normal CDF, accurate far into the lower tail.
double log_normal_cdf(double x);

}  // namespace splinemix
