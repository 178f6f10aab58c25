#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "splinemix/io.hpp"

namespace splinemix {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  std::string command;
  KeyValues config;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> outputs;  // relative to the output directory, sorted
};

void write_manifest(const RunManifest& manifest, const fs::path& dir);

struct CommandOptions {
  fs::path config;                    // key-value file; empty means defaults
  std::optional<std::uint64_t> seed;  // overrides the config seed
  fs::path out = ".";
  int workers = 1;
  std::vector<int> g_range;           // select only
  std::vector<fs::path> inputs;       // positional arguments
};

// "a:b" (inclusive) or a comma-separated list; ConfigError when malformed.
std::vector<int> parse_g_range(const std::string& text);

// Chain stream ids: replicate r fitted with G components uses (r << 8) | G,
// so every (replicate, G) pair owns an independent stream.
std::uint64_t chain_stream_id(int replicate, int G);

// Name of the per-replicate directory, e.g. rep_0007.
std::string replicate_dir_name(int replicate);

// Runs fn(0..count-1) on up to `workers` threads. The exception raised by the
// lowest failing index is rethrown after all threads join.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

// simulate: out/rep_XXXX/{data,covariates}.csv, out/truth.json.
RunManifest cmd_simulate(const CommandOptions& opts);
// fit: inputs are either (data.csv, covariates.csv) or one simulate directory,
// in which case every replicate is fitted into out/rep_XXXX.
RunManifest cmd_fit(const CommandOptions& opts);
// select: same inputs as fit; writes dic.csv per dataset.
RunManifest cmd_select(const CommandOptions& opts);
// evaluate: inputs are (truth.json, fits directory).
RunManifest cmd_evaluate(const CommandOptions& opts);

}  // namespace splinemix
