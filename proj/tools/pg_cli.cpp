// Command-line front end over the C API.
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "pg/pg_c.h"

namespace {

int exit_code(pg_status s) {
  switch (s) {
    case PG_OK: return 0;
    case PG_ERR_NUMERICAL:
    case PG_ERR_INTERNAL: return 3;
    default: return 2;
  }
}

int run(const std::string& command, const std::string& config, const std::string& out_flag, unsigned seed) {
  pg_scenario* scenario = nullptr;
  pg_status st = pg_scenario_load(config.c_str(), &scenario);
  if (st != PG_OK) {
    std::fprintf(stderr, "pg %s: %s\n", command.c_str(), pg_last_error());
    return exit_code(st);
  }
  // --out beats POISSON_OUT, which beats outputs.dir in the config
  std::string out_dir = out_flag;
  if (out_dir.empty())
    if (const char* env = std::getenv("POISSON_OUT"); env && *env) out_dir = env;
  char* summary = nullptr;
  st = pg_scenario_run(scenario, command.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), seed, &summary);
  if (summary) {
    std::printf("%s\n", summary);
    pg_string_free(summary);
  }
  if (st != PG_OK) std::fprintf(stderr, "pg %s: %s\n", command.c_str(), pg_last_error());
  pg_scenario_free(scenario);
  return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson metrics on parabolic flat bundles over the two-punctured sphere"};
  app.set_version_flag("--version", pg_version());
  app.require_subcommand(1);

  std::string config, out;
  unsigned seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"degree", "parabolic degree and slope of the bundle"},
      {"stability", "stability class and witness"},
      {"model", "model metric, conformal twist and residual fields"},
      {"flow", "heat flow to the Poisson metric on one grid"},
      {"continuation", "sup Tr h over an X schedule"},
      {"analyze", "degree, Chern-Weil, tameness and decay reports"},
      {"extract", "destabilizing projection from a flow solution"},
      {"oracle", "independent reference solvers"},
  };
  for (auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "seed for randomized initial data");
    sub->add_option("--out", out, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return run(app.get_subcommands().front()->get_name(), config, out, seed);
}
