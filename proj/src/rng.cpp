#include "splinemix/rng.hpp"

#include <cmath>
#include <sstream>

#include "splinemix/error.hpp"

namespace splinemix {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t key = seed;
  const std::uint64_t seed_hash = splitmix64(key);
  std::uint64_t sm = seed_hash ^ (stream_id * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
  splitmix64(sm);
  for (auto& s : state_) s = splitmix64(sm);
}

RngStream::result_type RngStream::operator()() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * f;
  has_cached_normal_ = true;
  return u * f;
}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::gamma(double shape) {
  if (shape < 1.0) {
    // Boost to shape + 1, then scale by U^(1/shape).
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0, v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double draw_inverse_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    std::ostringstream msg;
    msg << "inverse-gamma needs positive finite shape and rate (shape = " << shape
        << ", rate = " << rate << ")";
    throw NumericalError(msg.str());
  }
  return rate / rng.gamma(shape);
}

double draw_half_t_sq(double nu, double scale, RngStream& rng) {
  if (!(nu > 0.0) || !(scale > 0.0)) {
    std::ostringstream msg;
    msg << "half-t needs positive nu and scale (nu = " << nu << ", scale = " << scale << ")";
    throw NumericalError(msg.str());
  }
  const double a = draw_inverse_gamma(0.5, 1.0 / (scale * scale), rng);
  return draw_inverse_gamma(0.5 * nu, nu / a, rng);
}

Eigen::VectorXd standard_normal_vector(int d, RngStream& rng) {
  Eigen::VectorXd e(d);
  for (int j = 0; j < d; ++j) e(j) = rng.normal();
  return e;
}

Eigen::VectorXd draw_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov_factor,
                         RngStream& rng) {
  if (cov_factor.rows() != mean.size() || cov_factor.cols() != mean.size()) {
    std::ostringstream msg;
    msg << "draw_mvn: mean has dimension " << mean.size() << " but factor is "
        << cov_factor.rows() << "x" << cov_factor.cols();
    throw NumericalError(msg.str());
  }
  const Eigen::VectorXd e = standard_normal_vector(static_cast<int>(mean.size()), rng);
  return mean + cov_factor.triangularView<Eigen::Lower>() * e;
}

double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::sqrt(2.0)));
  // Asymptotic expansion of the Mills ratio.
  const double x2 = x * x;
  double term = 1.0, series = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) / x2;
    series += term;
  }
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * M_PI) + std::log(series);
}

}  // namespace splinemix
