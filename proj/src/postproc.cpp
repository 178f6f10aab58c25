#include "splinemix/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "splinemix/error.hpp"

namespace splinemix {

DicEntry dic_statistics(const std::vector<double>& log_likelihood, int G) {
  const auto s = log_likelihood.size();
  if (s < 2) throw ConfigError("DIC variance needs at least 2 draws");
  const double mean = std::accumulate(log_likelihood.begin(), log_likelihood.end(), 0.0) / s;
  double ss = 0.0;
  for (double v : log_likelihood) ss += (v - mean) * (v - mean);
  DicEntry out;
  out.G = G;
  out.mean_deviance = -2.0 * mean;
  out.p_v = 2.0 * ss / static_cast<double>(s - 1);
  out.dic = out.mean_deviance + out.p_v;
  return out;
}

DicEntry compute_dic(const std::vector<double>& log_likelihood, int G) {
  if (log_likelihood.size() < 10) {
    throw ConfigError("DIC needs at least 10 retained sweeps, got " +
                      std::to_string(log_likelihood.size()));
  }
  return dic_statistics(log_likelihood, G);
}

DicEntry compute_dic(const PosteriorSamples& samples) {
  return compute_dic(samples.log_likelihood, samples.G);
}

DicReport select_components(std::vector<DicEntry> entries) {
  if (entries.empty()) throw ConfigError("no DIC entries to select from");
  std::sort(entries.begin(), entries.end(),
            [](const DicEntry& a, const DicEntry& b) { return a.G < b.G; });
  DicReport report;
  std::size_t best = 0;
  for (std::size_t j = 1; j < entries.size(); ++j) {
    if (entries[j].dic < entries[best].dic - kDicTieTolerance) best = j;
  }
  report.selected_G = entries[best].G;
  report.entries = std::move(entries);
  return report;
}

namespace {

// Hungarian algorithm on a square cost matrix (minimization). Returns
// assignment[row] = column.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, 0);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

Permutation ecr_permutation(const std::vector<int>& z, const std::vector<int>& pivot, int G) {
  Eigen::MatrixXd agree = Eigen::MatrixXd::Zero(G, G);
  for (std::size_t i = 0; i < z.size(); ++i) agree(z[i], pivot[i]) += 1.0;
  // Identity wins ties: a tiny bonus on the diagonal, below one agreement.
  Eigen::MatrixXd cost = -agree;
  cost.diagonal().array() -= 1e-6;
  return solve_assignment(cost);
}

Components permute_components(const Components& params, const Permutation& perm) {
  const int G = static_cast<int>(params.size());
  Components out(params.size());
  for (int g = 0; g < G; ++g) out[static_cast<std::size_t>(perm[static_cast<std::size_t>(g)])] = params[static_cast<std::size_t>(g)];
  const auto& ref = out[static_cast<std::size_t>(G - 1)];
  const Eigen::VectorXd ref_delta = ref.delta;
  const Eigen::VectorXd ref_zeta = ref.zeta;
  for (auto& c : out) {
    c.delta -= ref_delta;
    c.zeta -= ref_zeta;
  }
  return out;
}

PosteriorSamples relabel_ecr(const PosteriorSamples& samples, const std::vector<int>& pivot,
                             std::vector<Permutation>* perms) {
  PosteriorSamples out = samples;
  if (perms) perms->clear();
  for (int s = 0; s < samples.size(); ++s) {
    const auto su = static_cast<std::size_t>(s);
    Permutation perm = ecr_permutation(samples.z[su], pivot, samples.G);
    bool identity = true;
    for (int g = 0; g < samples.G; ++g) identity = identity && perm[static_cast<std::size_t>(g)] == g;
    if (!identity) {
      out.params[su] = permute_components(samples.params[su], perm);
      for (auto& label : out.z[su]) label = perm[static_cast<std::size_t>(label)];
    }
    if (perms) perms->push_back(std::move(perm));
  }
  return out;
}

PosteriorSamples relabel_ecr(const PosteriorSamples& samples) {
  if (samples.size() == 0) return samples;
  const auto best = std::max_element(samples.log_likelihood.begin(), samples.log_likelihood.end()) -
                    samples.log_likelihood.begin();
  return relabel_ecr(samples, samples.z[static_cast<std::size_t>(best)]);
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SummaryReport summarize(const PosteriorSamples& samples, const BasisSet& basis, double level) {
  if (samples.size() == 0) throw ConfigError("no retained draws to summarize");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("credible level must lie in (0, 1)");
  const int S = samples.size();
  const int G = samples.G, K = samples.K, n = basis.n();
  const double lo_p = 0.5 * (1.0 - level), hi_p = 1.0 - lo_p;

  SummaryReport report;
  report.G = G;
  report.K = K;
  report.level = level;
  report.trajectories.assign(static_cast<std::size_t>(G), std::vector<Band>(static_cast<std::size_t>(K)));
  std::vector<double> column(static_cast<std::size_t>(S));
  for (int g = 0; g < G; ++g) {
    for (int k = 0; k < K; ++k) {
      Eigen::MatrixXd curves(n, S);
      for (int s = 0; s < S; ++s) curves.col(s) = component_mean(samples.params[static_cast<std::size_t>(s)], basis, g, k);
      Band band;
      band.mean = curves.rowwise().mean();
      band.lower.resize(n);
      band.upper.resize(n);
      for (int j = 0; j < n; ++j) {
        for (int s = 0; s < S; ++s) column[static_cast<std::size_t>(s)] = curves(j, s);
        band.lower(j) = quantile_type7(column, lo_p);
        band.upper(j) = quantile_type7(column, hi_p);
      }
      report.trajectories[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)] = std::move(band);
    }
  }

  const int P1 = samples.P + 1;
  report.logistic.assign(static_cast<std::size_t>(G), std::vector<CoefficientSummary>(static_cast<std::size_t>(P1)));
  for (int g = 0; g < G; ++g) {
    for (int p = 0; p < P1; ++p) {
      double sum = 0.0;
      for (int s = 0; s < S; ++s) {
        const double v = samples.params[static_cast<std::size_t>(s)][static_cast<std::size_t>(g)].delta(p);
        column[static_cast<std::size_t>(s)] = v;
        sum += v;
      }
      auto& c = report.logistic[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
      c.mean = sum / S;
      c.lower = quantile_type7(column, lo_p);
      c.upper = quantile_type7(column, hi_p);
    }
  }

  report.allocation = Eigen::MatrixXd::Zero(samples.N, G);
  for (int s = 0; s < S; ++s) {
    const auto& z = samples.z[static_cast<std::size_t>(s)];
    for (int i = 0; i < samples.N; ++i) report.allocation(i, z[static_cast<std::size_t>(i)]) += 1.0;
  }
  report.allocation /= static_cast<double>(S);
  return report;
}

}  // namespace splinemix
