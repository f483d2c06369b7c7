#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pg/flow.hpp"
#include "pg/io.hpp"

namespace pg {

enum class InitKind { Identity, Perturbed };
enum class AnalyzeMetric { Model, Flow };
enum class OracleKind { Rank1, RadialOde, Manufactured };

struct ScenarioConfig {
  FlatBundleSpec bundle;
  json bundle_doc;

  std::optional<double> X;
  std::vector<double> X_schedule;
  int Nx = 0;
  int Ny = 0;

  ConformalPreset preset;
  ModelOptions model;

  FlowOptions flow;
  InitKind init = InitKind::Identity;
  double init_amplitude = 0.1;
  std::vector<double> sigma_schedule{1.0, 0.5, 0.25, 0.1, 0.05};
  double rounding_threshold = 0.5;
  double min_gap = 0.2;
  double plateau_tol = 0.01;

  AnalyzeMetric analyze_metric = AnalyzeMetric::Model;
  std::vector<std::vector<int>> analyze_prefixes;  // empty: every proper member of the standard family

  OracleKind oracle = OracleKind::Rank1;

  std::string out_dir = "out";
  std::vector<std::string> reports;  // empty: all reports of the command

  // Largest half-length in use: X, or the last schedule entry.
  double max_X() const;
  bool wants(const std::string& report) const;
};

// Every violation is collected before a ValidationError is raised.
ScenarioConfig parse_config_json(const json& doc);
ScenarioConfig parse_config(const std::string& path);

enum class Command { Degree, Stability, Model, Flow, Continuation, Analyze, Extract, Oracle };
Command parse_command(const std::string& name);
const char* command_name(Command c);

struct RunContext {
  std::string out_dir;
  unsigned seed = 0;
};

struct CommandOutcome {
  json summary;
  bool numerical_failure = false;  // files written, but the run did not meet its target
};

// Runs one command, writing its artifacts under ctx.out_dir.
CommandOutcome run_command(Command cmd, const ScenarioConfig& cfg, const RunContext& ctx);

// 0 success, 2 input problems, 3 numerical failures.
int exit_code_for(ErrorKind kind);

}  // namespace pg
