#pragma once

#include <vector>

#include <Eigen/Dense>

#include "splinemix/gibbs.hpp"
#include "splinemix/spline_basis.hpp"

namespace splinemix {

struct DicEntry {
  int G = 0;
  double mean_deviance = 0.0;
  double p_v = 0.0;
  double dic = 0.0;
};

struct DicReport {
  std::vector<DicEntry> entries;
  int selected_G = 0;
};

// p_V = 2 var(log-likelihood) (sample variance), DIC = mean deviance + p_V.
// dic_statistics is the bare arithmetic (two or more draws); compute_dic
// additionally requires at least 10 draws.
DicEntry dic_statistics(const std::vector<double>& log_likelihood, int G = 0);
DicEntry compute_dic(const std::vector<double>& log_likelihood, int G = 0);
DicEntry compute_dic(const PosteriorSamples& samples);

// Tolerance under which two DIC values count as tied; ties go to the smaller G.
inline constexpr double kDicTieTolerance = 1e-9;
DicReport select_components(std::vector<DicEntry> entries);

// Label permutation perm with perm[old_label] = new_label.
using Permutation = std::vector<int>;

// Permutation maximizing #{i : perm[z_i] == pivot_i} (assignment problem).
Permutation ecr_permutation(const std::vector<int>& z, const std::vector<int>& pivot, int G);

// Relabels one parameter set. Logistic coefficients are re-expressed against
// whichever component lands in the reference (last) slot.
Components permute_components(const Components& params, const Permutation& perm);

// Pivot defaults to the allocation of the highest-likelihood draw. Returns the
// relabeled samples; the applied permutations go to *perms when non-null.
PosteriorSamples relabel_ecr(const PosteriorSamples& samples, const std::vector<int>& pivot,
                             std::vector<Permutation>* perms = nullptr);
PosteriorSamples relabel_ecr(const PosteriorSamples& samples);

// Type-7 quantile (linear interpolation between order statistics).
double quantile_type7(std::vector<double> values, double prob);

struct Band {
  Eigen::VectorXd mean, lower, upper;
};

struct CoefficientSummary {
  double mean = 0.0, lower = 0.0, upper = 0.0;
};

struct SummaryReport {
  int G = 0, K = 0;
  double level = 0.95;
  std::vector<std::vector<Band>> trajectories;               // [g][k]
  std::vector<std::vector<CoefficientSummary>> logistic;     // [g][p], reference included
  Eigen::MatrixXd allocation;                                // N x G frequencies
};

SummaryReport summarize(const PosteriorSamples& samples, const BasisSet& basis, double level = 0.95);

}  // namespace splinemix
