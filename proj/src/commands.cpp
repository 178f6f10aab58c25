#include "splinemix/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "splinemix/error.hpp"

namespace splinemix {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

KeyValues load_config(const CommandOptions& opts) {
  return opts.config.empty() ? KeyValues{} : read_key_values(opts.config);
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  return fs::path(p).lexically_relative(base).generic_string();
}

struct DatasetInput {
  int replicate = 0;
  fs::path data, covariates;
  fs::path out;  // output directory for this dataset
};

// Either two files or one directory holding rep_XXXX subdirectories.
std::vector<DatasetInput> dataset_inputs(const CommandOptions& opts) {
  std::vector<DatasetInput> inputs;
  if (opts.inputs.size() == 2) {
    inputs.push_back({0, opts.inputs[0], opts.inputs[1], opts.out});
    return inputs;
  }
  if (opts.inputs.size() != 1 || !fs::is_directory(opts.inputs[0])) {
    throw ConfigError("expected DATA.csv COVARIATES.csv or a simulation directory");
  }
  for (const auto& entry : fs::directory_iterator(opts.inputs[0])) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.rfind("rep_", 0) != 0) continue;
    int r = 0;
    try {
      r = std::stoi(name.substr(4));
    } catch (const std::exception&) {
      continue;
    }
    inputs.push_back({r, entry.path() / "data.csv", entry.path() / "covariates.csv",
                      opts.out / replicate_dir_name(r)});
  }
  if (inputs.empty()) throw DataError(opts.inputs[0].string() + " holds no rep_* directories");
  std::sort(inputs.begin(), inputs.end(),
            [](const DatasetInput& a, const DatasetInput& b) { return a.replicate < b.replicate; });
  return inputs;
}

Dataset load_dataset(const DatasetInput& in, bool standardize) {
  Dataset data = read_dataset(in.data, in.covariates);
  if (standardize) data.standardize_covariates();
  return data;
}

FitOptions fit_options(const CommandOptions& opts, KeyValues& snapshot) {
  snapshot = load_config(opts);
  if (opts.seed) snapshot["seed"] = std::to_string(*opts.seed);
  return fit_options_from(snapshot);
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

void write_manifest(const RunManifest& manifest, const fs::path& dir) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : manifest.config) j["config"][k] = v;
  j["seed"] = manifest.seed;
  j["version"] = manifest.version;
  j["wall_clock_seconds"] = manifest.wall_clock_seconds;
  j["outputs"] = manifest.outputs;
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

std::vector<int> parse_g_range(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used == s.size() && v >= 1) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("invalid --g-range '" + text + "'");
  };
  std::vector<int> out;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const int lo = to_int(text.substr(0, colon));
    const int hi = to_int(text.substr(colon + 1));
    if (hi < lo) throw ConfigError("invalid --g-range '" + text + "'");
    for (int g = lo; g <= hi; ++g) out.push_back(g);
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      out.push_back(to_int(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw ConfigError("--g-range repeats a value");
  }
  return out;
}

std::uint64_t chain_stream_id(int replicate, int G) {
  return (static_cast<std::uint64_t>(replicate) << 8) | static_cast<std::uint64_t>(G);
}

std::string replicate_dir_name(int replicate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep_%04d", replicate);
  return buf;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int threads = std::clamp(workers, 1, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

RunManifest cmd_simulate(const CommandOptions& opts) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config = load_config(opts);
  if (opts.seed) manifest.config["seed"] = std::to_string(*opts.seed);
  const ScenarioSpec spec = scenario_from(manifest.config);
  manifest.seed = spec.seed;

  std::error_code ec;
  fs::create_directories(opts.out, ec);
  if (ec) throw ConfigError("cannot create " + opts.out.string() + ": " + ec.message());

  SimulationTruth truth{spec, std::vector<ScenarioTruth>(static_cast<std::size_t>(spec.replicates))};
  std::vector<std::string> outputs;
  std::mutex mu;
  parallel_for(spec.replicates, opts.workers, [&](int r) {
    SimulatedReplicate rep = generate_scenario(spec, r);
    const fs::path dir = opts.out / replicate_dir_name(r);
    write_dataset(rep.data, dir / "data.csv", dir / "covariates.csv");
    truth.replicates[static_cast<std::size_t>(r)] = std::move(rep.truth);
    std::lock_guard lock(mu);
    outputs.push_back(relative_to(dir / "data.csv", opts.out));
    outputs.push_back(relative_to(dir / "covariates.csv", opts.out));
  });
  if (spec.replicates > 0) {
    write_truth(truth, opts.out / "truth.json");
    outputs.push_back("truth.json");
  }
  manifest.outputs = sorted(std::move(outputs));
  manifest.wall_clock_seconds = seconds_since(start);
  write_manifest(manifest, opts.out);
  return manifest;
}

RunManifest cmd_fit(const CommandOptions& opts) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "fit";
  const FitOptions fo = fit_options(opts, manifest.config);
  manifest.seed = fo.fit.seed;
  const auto inputs = dataset_inputs(opts);

  std::vector<std::string> outputs;
  std::mutex mu;
  parallel_for(static_cast<int>(inputs.size()), opts.workers, [&](int idx) {
    const auto& in = inputs[static_cast<std::size_t>(idx)];
    const Dataset data = load_dataset(in, fo.standardize);
    const PosteriorSamples raw = run_chain(data, fo.fit, chain_stream_id(in.replicate, fo.fit.G));
    const PosteriorSamples samples = relabel_ecr(raw);
    const BasisSet basis = build_basis(data.grid, fo.fit.m);
    write_summary(summarize(samples, basis, fo.credible_level), data, in.out);
    write_samples(samples, in.out / "samples.csv");
    std::lock_guard lock(mu);
    for (const char* f : {"trajectories.csv", "logistic.csv", "allocations.csv", "samples.csv"}) {
      outputs.push_back(relative_to(in.out / f, opts.out));
    }
  });
  manifest.outputs = sorted(std::move(outputs));
  manifest.wall_clock_seconds = seconds_since(start);
  write_manifest(manifest, opts.out);
  return manifest;
}

RunManifest cmd_select(const CommandOptions& opts) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "select";
  const FitOptions fo = fit_options(opts, manifest.config);
  if (opts.g_range.empty()) throw ConfigError("select needs --g-range");
  std::string range;
  for (int g : opts.g_range) range += (range.empty() ? "" : ",") + std::to_string(g);
  manifest.config["g_range"] = range;
  manifest.seed = fo.fit.seed;
  const auto inputs = dataset_inputs(opts);

  std::vector<Dataset> datasets;
  for (const auto& in : inputs) datasets.push_back(load_dataset(in, fo.standardize));

  const int n_g = static_cast<int>(opts.g_range.size());
  std::vector<DicEntry> entries(inputs.size() * opts.g_range.size());
  parallel_for(static_cast<int>(entries.size()), opts.workers, [&](int task) {
    const auto d = static_cast<std::size_t>(task / n_g);
    FitConfig cfg = fo.fit;
    cfg.G = opts.g_range[static_cast<std::size_t>(task % n_g)];
    cfg.validate();
    entries[static_cast<std::size_t>(task)] =
        compute_dic(run_chain(datasets[d], cfg, chain_stream_id(inputs[d].replicate, cfg.G)).log_likelihood, cfg.G);
  });

  std::vector<std::string> outputs;
  for (std::size_t d = 0; d < inputs.size(); ++d) {
    std::vector<DicEntry> mine(entries.begin() + static_cast<std::ptrdiff_t>(d * opts.g_range.size()),
                               entries.begin() + static_cast<std::ptrdiff_t>((d + 1) * opts.g_range.size()));
    write_dic(select_components(std::move(mine)), inputs[d].out / "dic.csv");
    outputs.push_back(relative_to(inputs[d].out / "dic.csv", opts.out));
  }
  manifest.outputs = sorted(std::move(outputs));
  manifest.wall_clock_seconds = seconds_since(start);
  write_manifest(manifest, opts.out);
  return manifest;
}

RunManifest cmd_evaluate(const CommandOptions& opts) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.config = load_config(opts);
  if (!manifest.config.empty()) throw ConfigError("evaluate takes no config keys");
  if (opts.inputs.size() != 2) throw ConfigError("evaluate expects TRUTH.json FITS_DIR");
  const SimulationTruth truth = read_truth(opts.inputs[0]);
  const fs::path fits = opts.inputs[1];
  manifest.seed = truth.spec.seed;

  const int R = static_cast<int>(truth.replicates.size());
  if (R == 0) throw DataError("truth file holds no replicates");
  const int G = truth.spec.G;

  std::string per_rep = "replicate,component,arse,a_bias,v_bias\n";
  Eigen::MatrixXd arse_m(R, G), abias_m(R, G), vbias_m(R, G);
  std::vector<Eigen::MatrixXd> deltas;
  for (int r = 0; r < R; ++r) {
    const fs::path dir = fits / replicate_dir_name(r);
    if (!fs::is_directory(dir)) throw DataError("no fit for replicate " + std::to_string(r) + " in " + fits.string());
    const FitEstimate est = read_fit_estimate(dir);
    const auto& tr = truth.replicates[static_cast<std::size_t>(r)];
    if (static_cast<int>(est.trajectories.size()) != G) {
      throw DataError("replicate " + std::to_string(r) + ": fit has " + std::to_string(est.trajectories.size()) +
                      " components, truth has " + std::to_string(G));
    }
    if (est.trajectories[0].rows() != tr.mean[0].rows() || est.trajectories[0].cols() != tr.mean[0].cols()) {
      throw DataError("replicate " + std::to_string(r) + ": fit and truth grids differ");
    }
    if (est.deltas.cols() != tr.delta.cols()) {
      throw DataError("replicate " + std::to_string(r) + ": fit and truth covariate counts differ");
    }
    const MetricsReport m = evaluate_replicate(tr.mean, est.trajectories);
    for (int g = 0; g < G; ++g) {
      arse_m(r, g) = m.arse(g);
      abias_m(r, g) = m.a_bias(g);
      vbias_m(r, g) = m.v_bias(g);
      per_rep += std::to_string(r) + "," + std::to_string(g + 1) + "," + format_double(m.arse(g)) + "," +
                 format_double(m.a_bias(g)) + "," + format_double(m.v_bias(g)) + "\n";
    }
    deltas.push_back(align_deltas(est.deltas, m.assignment));
  }

  auto mean_sd = [&](const Eigen::MatrixXd& m, int g) {
    const double mean = m.col(g).mean();
    const double sd = R > 1 ? std::sqrt((m.col(g).array() - mean).square().sum() / (R - 1)) : 0.0;
    return format_double(mean) + "," + format_double(sd);
  };
  std::string summary = "component,arse_mean,arse_sd,a_bias_mean,a_bias_sd,v_bias_mean,v_bias_sd\n";
  for (int g = 0; g < G; ++g) {
    summary += std::to_string(g + 1) + "," + mean_sd(arse_m, g) + "," + mean_sd(abias_m, g) + "," +
               mean_sd(vbias_m, g) + "\n";
  }

  std::string rmse_text = "component,coefficient,rmse\n";
  if (G > 1) {
    const Eigen::MatrixXd rmse = logistic_rmse(truth.spec.delta, deltas);
    for (Eigen::Index g = 0; g < rmse.rows(); ++g)
      for (Eigen::Index p = 0; p < rmse.cols(); ++p)
        rmse_text += std::to_string(g + 1) + "," + std::to_string(p) + "," + format_double(rmse(g, p)) + "\n";
  }

  write_text(opts.out / "metrics_replicates.csv", per_rep);
  write_text(opts.out / "metrics_summary.csv", summary);
  write_text(opts.out / "logistic_rmse.csv", rmse_text);
  manifest.outputs = {"logistic_rmse.csv", "metrics_replicates.csv", "metrics_summary.csv"};
  manifest.wall_clock_seconds = seconds_since(start);
  write_manifest(manifest, opts.out);
  return manifest;
}

}  // namespace splinemix
