#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "splinemix/gibbs.hpp"
#include "splinemix/metrics.hpp"
#include "splinemix/model.hpp"
#include "splinemix/postproc.hpp"
#include "splinemix/simulate.hpp"

namespace splinemix {

namespace fs = std::filesystem;

// 17 significant digits; round-trips every finite double.
std::string format_double(double v);

// Flat "key = value" file. Blank lines and '#' comments are ignored.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(const fs::path& path);
KeyValues parse_key_values(const std::string& text);

// Unknown keys are ConfigErrors. Recognized keys:
//   G m iterations burn_in thin seed init standardize credible_level
//   sigma_alpha_sq nu_sigma A_sigma nu_tau A_tau nu_kappa A_kappa sigma_delta_sq
struct FitOptions {
  FitConfig fit;
  bool standardize = false;
  double credible_level = 0.95;
};
FitOptions fit_options_from(const KeyValues& kv);

// scenario (A | B | custom) selects a preset; the remaining keys override it:
//   N n m P replicates seed noiseless flat_splines G K
//   alpha0 alpha1 sigma_sq tau_sq delta   (rows separated by ';', values by ',')
//   covariate_mean                          (one row of P values)
ScenarioSpec scenario_from(const KeyValues& kv);

// Long-format responses "subject,entry,time,value" and covariates
// "subject,<name1>,...". Raw times are rescaled onto [0, 1]; every
// subject/entry must share the same time points.
Dataset read_dataset(const fs::path& data_csv, const fs::path& covariates_csv);
void write_dataset(const Dataset& data, const fs::path& data_csv, const fs::path& covariates_csv);

void write_summary(const SummaryReport& report, const Dataset& data, const fs::path& dir);
void write_samples(const PosteriorSamples& samples, const fs::path& path);
void write_dic(const DicReport& report, const fs::path& path);

// Fitted posterior-mean trajectories and logistic means read back from a fit directory.
struct FitEstimate {
  Trajectories trajectories;  // [g] n x K
  Eigen::MatrixXd deltas;     // G x (P + 1)
};
FitEstimate read_fit_estimate(const fs::path& dir);

struct SimulationTruth {
  ScenarioSpec spec;
  std::vector<ScenarioTruth> replicates;
};
void write_truth(const SimulationTruth& truth, const fs::path& path);
SimulationTruth read_truth(const fs::path& path);

// Creates parent directories as needed; an unwritable path is a ConfigError.
void write_text(const fs::path& path, const std::string& text);

}  // namespace splinemix
