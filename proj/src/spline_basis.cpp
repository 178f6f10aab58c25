#include "splinemix/spline_basis.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "splinemix/error.hpp"

namespace splinemix {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 3) {
    throw DataError("time grid needs at least 3 points, got " + std::to_string(times_.size()));
  }
  for (std::size_t j = 0; j < times_.size(); ++j) {
    const double t = times_[j];
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
      std::ostringstream msg;
      msg << "time grid value " << t << " at position " << j << " lies outside [0, 1]";
      throw DataError(msg.str());
    }
    if (j > 0 && !(t > times_[j - 1])) {
      std::ostringstream msg;
      msg << "time grid not strictly increasing at position " << j;
      throw DataError(msg.str());
    }
  }
}

TimeGrid TimeGrid::uniform(int n) {
  if (n < 3) throw ConfigError("uniform grid needs n >= 3");
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(j)] = static_cast<double>(j) / (n - 1);
  return TimeGrid(std::move(t));
}

Eigen::MatrixXd BasisSet::design() const {
  Eigen::MatrixXd s(n(), 2 + m());
  s << fixed, spline;
  return s;
}

double BasisSet::explained_fraction() const {
  const double total = eigenvalues.sum();
  if (total <= 0.0) return 0.0;
  return eigenvalues.head(m()).sum() / total;
}

Eigen::MatrixXd build_phi(const TimeGrid& grid) {
  const int n = grid.size();
  Eigen::MatrixXd phi(n, n);
  for (int r = 0; r < n; ++r) {
    for (int h = r; h < n; ++h) {
      // Grid is sorted, so t_r <= t_h here.
      const double tr = grid[r];
      const double th = grid[h];
      const double v = 0.5 * tr * tr * (th - tr / 3.0);
      phi(r, h) = v;
      phi(h, r) = v;
    }
  }
  return phi;
}

BasisSet build_basis(const TimeGrid& grid, int m) {
  const int n = grid.size();
  if (m < 1 || m >= n) {
    throw ConfigError("basis count m must satisfy 1 <= m < n (m = " + std::to_string(m) +
                      ", n = " + std::to_string(n) + ")");
  }
  const Eigen::MatrixXd phi = build_phi(grid);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(phi);
  if (solver.info() != Eigen::Success) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi);
    const auto& sv = svd.singularValues();
    std::ostringstream msg;
    msg << "eigendecomposition of the spline kernel failed (n = " << n
        << ", largest singular value " << sv(0) << ", smallest " << sv(n - 1) << ")";
    throw NumericalError(msg.str());
  }

  BasisSet basis;
  basis.eigenvalues.resize(n);
  basis.eigenvectors.resize(n, n);
  // Solver output is ascending; flip to descending.
  for (int j = 0; j < n; ++j) {
    double lambda = solver.eigenvalues()(n - 1 - j);
    if (lambda < kEigenClamp) lambda = 0.0;
    basis.eigenvalues(j) = lambda;
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - j);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    basis.eigenvectors.col(j) = v;
  }

  int kept = 0;
  while (kept < m && basis.eigenvalues(kept) > 0.0) ++kept;
  if (kept == 0) throw NumericalError("spline kernel has no eigenvalue above the clamp threshold");

  basis.fixed.resize(n, 2);
  for (int j = 0; j < n; ++j) {
    basis.fixed(j, 0) = 1.0;
    basis.fixed(j, 1) = grid[j];
  }
  basis.spline = basis.eigenvectors.leftCols(kept) *
                 basis.eigenvalues.head(kept).cwiseSqrt().asDiagonal();
  return basis;
}

TimeGrid rescale_times(const std::vector<double>& raw_times) {
  if (raw_times.size() < 3) {
    throw DataError("need at least 3 time points, got " + std::to_string(raw_times.size()));
  }
  for (std::size_t j = 1; j < raw_times.size(); ++j) {
    if (!(raw_times[j] > raw_times[j - 1])) {
      std::ostringstream msg;
      msg << "raw times must be strictly increasing; position " << j << " has " << raw_times[j]
          << " after " << raw_times[j - 1];
      throw DataError(msg.str());
    }
  }
  const double lo = raw_times.front();
  const double span = raw_times.back() - lo;
  std::vector<double> t(raw_times.size());
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = (raw_times[j] - lo) / span;
  t.back() = 1.0;
  return TimeGrid(std::move(t));
}

}  // namespace splinemix
