#pragma once

#include <vector>

#include <Eigen/Dense>

namespace splinemix {

// Common observation times on [0, 1], strictly increasing, at least 3 points.
class TimeGrid {
 public:
  // Throws DataError unless the times are strictly increasing inside [0, 1]
  // and there are at least 3 of them.
  explicit TimeGrid(std::vector<double> times);

  static TimeGrid uniform(int n);

  int size() const { return static_cast<int>(times_.size()); }
  const std::vector<double>& times() const { return times_; }
  double operator[](int j) const { return times_[static_cast<std::size_t>(j)]; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> times_;
};

// Design matrices shared by every subject and entry.
//   fixed:       n x 2, columns (1, t)
//   spline:      n x m, leading eigen-directions of the kernel scaled by sqrt(eigenvalue)
//   eigenvalues: all n eigenvalues of the kernel, descending, clamped at 0
struct BasisSet {
  Eigen::MatrixXd fixed;
  Eigen::MatrixXd spline;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // n x n, column j pairs with eigenvalues(j)

  int n() const { return static_cast<int>(fixed.rows()); }
  int m() const { return static_cast<int>(spline.cols()); }
  // Full design S = [fixed | spline], n x (2 + m).
  Eigen::MatrixXd design() const;
  // Share of the total eigenvalue mass captured by the retained directions.
  double explained_fraction() const;
};

inline constexpr double kEigenClamp = 1e-10;

// Kernel matrix with phi(r, h) = t_r^2 (t_h - t_r / 3) / 2 for t_r <= t_h.
Eigen::MatrixXd build_phi(const TimeGrid& grid);

// Spectral low-rank basis with m retained directions. Eigenvectors are sign
// normalized so their largest-magnitude entry is positive. Directions whose
// eigenvalue falls below kEigenClamp are dropped even if requested, so the
// returned basis may have fewer than m columns.
BasisSet build_basis(const TimeGrid& grid, int m);

// Affine map of raw, strictly increasing times onto [0, 1].
TimeGrid rescale_times(const std::vector<double>& raw_times);

}  // namespace splinemix
