// splinemix: simulate, fit, select and evaluate mixtures of spline experts.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splinemix/commands.hpp"
#include "splinemix/error.hpp"

namespace sm = splinemix;

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  int workers = 1;
  std::string g_range;
  std::vector<std::string> inputs;
};

CLI::App* add_command(CLI::App& app, const char* name, const char* help, Flags& f,
                      const char* positional_help) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", f.config, "key = value configuration file");
  sub->add_option("--seed", f.seed, "override the configured seed");
  sub->add_option("--out", f.out, "output directory")->capture_default_str();
  sub->add_option("--workers", f.workers, "parallel tasks")->check(CLI::PositiveNumber)->capture_default_str();
  if (positional_help != nullptr) sub->add_option("inputs", f.inputs, positional_help);
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariate-guided mixtures of spline experts for replicated multivariate time series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sm::kVersion);

  Flags f;
  auto* simulate = add_command(app, "simulate", "generate synthetic replicates", f, nullptr);
  auto* fit = add_command(app, "fit", "run one Gibbs chain per dataset and summarize it", f,
                          "DATA.csv COVARIATES.csv, or a simulate output directory");
  auto* select = add_command(app, "select", "choose the number of components by DIC", f,
                             "DATA.csv COVARIATES.csv, or a simulate output directory");
  select->add_option("--g-range", f.g_range, "component counts, e.g. 1:4 or 2,3,5")->required();
  auto* evaluate = add_command(app, "evaluate", "score fits against a simulation truth file", f,
                               "TRUTH.json FITS_DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    sm::CommandOptions opts;
    opts.config = f.config;
    opts.out = f.out;
    opts.workers = f.workers;
    for (const auto& in : f.inputs) opts.inputs.emplace_back(in);
    for (auto* sub : {simulate, fit, select, evaluate}) {
      if (sub->count("--seed") > 0) opts.seed = f.seed;
    }

    if (simulate->parsed()) {
      sm::cmd_simulate(opts);
    } else if (fit->parsed()) {
      sm::cmd_fit(opts);
    } else if (select->parsed()) {
      opts.g_range = sm::parse_g_range(f.g_range);
      sm::cmd_select(opts);
    } else if (evaluate->parsed()) {
      sm::cmd_evaluate(opts);
    }
  } catch (const sm::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
