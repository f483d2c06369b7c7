#include "pg/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "pg/analysis.hpp"
#include "pg/curvature.hpp"
#include "pg/reference.hpp"

namespace pg {

namespace {

// Collects violations while walking the config document.
class Checker {
 public:
  std::vector<std::string> errors;

  void add(const std::string& where, const std::string& what) { errors.push_back(where + ": " + what); }

  void keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) add(where + "." + it.key(), "unknown key");
  }

  const json* object(const json& parent, const std::string& key, const std::string& where, bool required) {
    if (!parent.contains(key)) {
      if (required) add(where + "." + key, "missing");
      return nullptr;
    }
    const json& v = parent[key];
    if (!v.is_object()) {
      add(where + "." + key, "expected an object");
      return nullptr;
    }
    return &v;
  }

  template <typename Pred>
  void number(const json& obj, const std::string& key, const std::string& where, double& out, Pred ok,
              const char* requirement) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_number()) {
      add(where + "." + key, "expected a number");
      return;
    }
    double v = obj[key].get<double>();
    if (!std::isfinite(v) || !ok(v)) {
      add(where + "." + key, fmt::format("{} must be {}", v, requirement));
      return;
    }
    out = v;
  }

  template <typename Pred>
  void integer(const json& obj, const std::string& key, const std::string& where, int& out, Pred ok,
               const char* requirement) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_number_integer()) {
      add(where + "." + key, "expected an integer");
      return;
    }
    int v = obj[key].get<int>();
    if (!ok(v)) {
      add(where + "." + key, fmt::format("{} must be {}", v, requirement));
      return;
    }
    out = v;
  }

  void boolean(const json& obj, const std::string& key, const std::string& where, bool& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_boolean()) {
      add(where + "." + key, "expected true or false");
      return;
    }
    out = obj[key].get<bool>();
  }

  bool numbers(const json& obj, const std::string& key, const std::string& where, std::vector<double>& out) {
    if (!obj.contains(key)) return false;
    const json& a = obj[key];
    if (!a.is_array()) {
      add(where + "." + key, "expected an array of numbers");
      return false;
    }
    std::vector<double> v;
    for (size_t k = 0; k < a.size(); ++k) {
      if (!a[k].is_number() || !std::isfinite(a[k].get<double>())) {
        add(fmt::format("{}.{}[{}]", where, key, k), "expected a finite number");
        return false;
      }
      v.push_back(a[k].get<double>());
    }
    out = v;
    return true;
  }

  template <typename E>
  void choice(const json& obj, const std::string& key, const std::string& where,
              const std::vector<std::pair<std::string, E>>& options, E& out) {
    if (!obj.contains(key)) return;
    std::string names;
    for (auto& [n, e] : options) names += (names.empty() ? "" : ", ") + n;
    if (!obj[key].is_string()) {
      add(where + "." + key, "expected one of " + names);
      return;
    }
    std::string s = obj[key].get<std::string>();
    for (auto& [n, e] : options)
      if (n == s) {
        out = e;
        return;
      }
    add(where + "." + key, fmt::format("'{}' is not one of {}", s, names));
  }
};

bool strictly_increasing(const std::vector<double>& v) {
  for (size_t k = 1; k < v.size(); ++k)
    if (!(v[k] > v[k - 1])) return false;
  return true;
}

void parse_grid(const json& g, ScenarioConfig& cfg, Checker& ck) {
  ck.keys(g, "grid", {"X", "X_schedule", "Nx", "Ny"});
  double X = 0.0;
  ck.number(g, "X", "grid", X, [](double v) { return v > 1.0; }, "greater than 1");
  if (X > 0.0) cfg.X = X;
  std::vector<double> sched;
  if (ck.numbers(g, "X_schedule", "grid", sched)) {
    if (sched.size() < 2 || !strictly_increasing(sched) || sched.front() <= 1.0)
      ck.add("grid.X_schedule", "needs at least two strictly increasing values above 1");
    else
      cfg.X_schedule = sched;
  }
  if (!g.contains("X") && !g.contains("X_schedule")) ck.add("grid", "needs X or X_schedule");
  if (!g.contains("Nx")) ck.add("grid.Nx", "missing");
  if (!g.contains("Ny")) ck.add("grid.Ny", "missing");
  ck.integer(g, "Nx", "grid", cfg.Nx, [](int v) { return v >= 8; }, "at least 8");
  ck.integer(g, "Ny", "grid", cfg.Ny, [](int v) { return v >= 8 && v % 2 == 0; }, "even and at least 8");
  if (!cfg.X_schedule.empty() && cfg.Nx > 0) {
    // every schedule entry must be a centred sub-grid of the largest one
    double dx = 2.0 * cfg.X_schedule.back() / cfg.Nx;
    for (double x : cfg.X_schedule) {
      double cells = (cfg.X_schedule.back() - x) / dx;
      if (std::abs(cells - std::round(cells)) > 1e-9)
        ck.add("grid.X_schedule", fmt::format("X = {} is not a whole number of cells ({}) from the largest X", x, dx));
    }
  }
}

void parse_conformal(const json& c, ScenarioConfig& cfg, Checker& ck) {
  ck.keys(c, "conformal", {"preset", "q", "table"});
  ck.choice<PresetKind>(c, "preset", "conformal",
                        {{"fubini-study", PresetKind::FubiniStudy},
                         {"loftin-type", PresetKind::LoftinType},
                         {"custom-table", PresetKind::CustomTable}},
                        cfg.preset.kind);
  ck.number(c, "q", "conformal", cfg.preset.q, [](double v) { return v >= 0.0; }, "non-negative");
  if (const json* t = ck.object(c, "table", "conformal", cfg.preset.kind == PresetKind::CustomTable)) {
    ck.keys(*t, "conformal.table", {"x", "values"});
    ck.numbers(*t, "x", "conformal.table", cfg.preset.table_x);
    ck.numbers(*t, "values", "conformal.table", cfg.preset.table_values);
  }
  try {
    cfg.preset.validate();
  } catch (const Error& e) {
    ck.add("conformal", e.what());
  }
}

void parse_model(const json& m, ScenarioConfig& cfg, Checker& ck) {
  ck.keys(m, "model", {"conformal_twist", "blend_inner", "blend_outer", "shift"});
  ck.boolean(m, "conformal_twist", "model", cfg.model.conformal_twist);
  auto pos = [](double v) { return v > 0.0; };
  ck.number(m, "blend_inner", "model", cfg.model.blend_inner, pos, "positive");
  ck.number(m, "blend_outer", "model", cfg.model.blend_outer, pos, "positive");
  ck.number(m, "shift", "model", cfg.model.shift, [](double v) { return v >= 0.0; }, "non-negative");
  if (!(cfg.model.blend_outer > cfg.model.blend_inner)) ck.add("model.blend_outer", "must exceed blend_inner");
}

void parse_flow(const json& f, ScenarioConfig& cfg, Checker& ck) {
  ck.keys(f, "flow",
          {"tol", "t_max", "dt", "det_renormalize", "scheme", "max_flow_steps", "steady_solver", "sigma_schedule",
           "rounding_threshold", "min_gap", "plateau_tol", "init", "record_energy"});
  auto pos = [](double v) { return v > 0.0; };
  ck.number(f, "tol", "flow", cfg.flow.tol, pos, "positive");
  ck.number(f, "t_max", "flow", cfg.flow.t_max, pos, "positive");
  ck.integer(f, "max_flow_steps", "flow", cfg.flow.max_flow_steps, [](int v) { return v >= 0; }, "non-negative");
  ck.boolean(f, "det_renormalize", "flow", cfg.flow.det_renormalize);
  ck.boolean(f, "steady_solver", "flow", cfg.flow.steady_solver);
  ck.boolean(f, "record_energy", "flow", cfg.flow.record_energy);
  ck.choice<StepScheme>(f, "scheme", "flow", {{"exponential", StepScheme::Exponential}, {"euler", StepScheme::Euler}},
                        cfg.flow.scheme);
  if (const json* dt = ck.object(f, "dt", "flow", false)) {
    ck.keys(*dt, "flow.dt", {"policy", "cfl", "dt"});
    enum class Policy { Cfl, Fixed } policy = Policy::Cfl;
    ck.choice<Policy>(*dt, "policy", "flow.dt", {{"cfl", Policy::Cfl}, {"fixed", Policy::Fixed}}, policy);
    ck.number(*dt, "cfl", "flow.dt", cfg.flow.cfl, pos, "positive");
    double fixed = 0.0;
    ck.number(*dt, "dt", "flow.dt", fixed, pos, "positive");
    if (policy == Policy::Fixed) {
      if (fixed > 0.0)
        cfg.flow.dt = fixed;
      else if (!dt->contains("dt"))
        ck.add("flow.dt.dt", "required by the fixed policy");
    }
  }
  std::vector<double> sigma;
  if (ck.numbers(f, "sigma_schedule", "flow", sigma)) {
    bool ok = !sigma.empty();
    for (size_t k = 0; k < sigma.size(); ++k)
      if (!(sigma[k] > 0.0 && sigma[k] <= 1.0) || (k > 0 && !(sigma[k] < sigma[k - 1]))) ok = false;
    if (ok)
      cfg.sigma_schedule = sigma;
    else
      ck.add("flow.sigma_schedule", "must be strictly decreasing within (0, 1]");
  }
  auto unit = [](double v) { return v > 0.0 && v < 1.0; };
  ck.number(f, "rounding_threshold", "flow", cfg.rounding_threshold, unit, "inside (0, 1)");
  ck.number(f, "min_gap", "flow", cfg.min_gap, unit, "inside (0, 1)");
  ck.number(f, "plateau_tol", "flow", cfg.plateau_tol, pos, "positive");
  if (const json* init = ck.object(f, "init", "flow", false)) {
    ck.keys(*init, "flow.init", {"kind", "amplitude"});
    ck.choice<InitKind>(*init, "kind", "flow.init", {{"identity", InitKind::Identity}, {"perturbed", InitKind::Perturbed}},
                        cfg.init);
    ck.number(*init, "amplitude", "flow.init", cfg.init_amplitude, [](double v) { return v >= 0.0; },
              "non-negative");
  }
}

void parse_analyze(const json& a, ScenarioConfig& cfg, Checker& ck) {
  ck.keys(a, "analyze", {"metric", "subbundles"});
  ck.choice<AnalyzeMetric>(a, "metric", "analyze", {{"model", AnalyzeMetric::Model}, {"flow", AnalyzeMetric::Flow}},
                           cfg.analyze_metric);
  if (!a.contains("subbundles")) return;
  const json& s = a["subbundles"];
  if (!s.is_array()) {
    ck.add("analyze.subbundles", "expected an array of prefix arrays");
    return;
  }
  for (size_t k = 0; k < s.size(); ++k) {
    std::string where = fmt::format("analyze.subbundles[{}]", k);
    if (!s[k].is_array()) {
      ck.add(where, "expected an array of integers");
      continue;
    }
    std::vector<int> prefix;
    bool ok = true;
    for (auto& v : s[k]) {
      if (!v.is_number_integer()) ok = false;
      else prefix.push_back(v.get<int>());
    }
    if (!ok) {
      ck.add(where, "expected an array of integers");
      continue;
    }
    try {
      make_subbundle(cfg.bundle, prefix);
      cfg.analyze_prefixes.push_back(prefix);
    } catch (const Error& e) {
      ck.add(where, e.what());
    }
  }
}

const std::set<std::string> kReports{"fields", "monitors", "checkpoint", "tables", "degree", "chern_weil",
                                     "tameness", "decay"};

void parse_outputs(const json& o, ScenarioConfig& cfg, Checker& ck) {
  ck.keys(o, "outputs", {"dir", "reports"});
  if (o.contains("dir")) {
    if (!o["dir"].is_string() || o["dir"].get<std::string>().empty())
      ck.add("outputs.dir", "expected a non-empty string");
    else
      cfg.out_dir = o["dir"].get<std::string>();
  }
  if (o.contains("reports")) {
    if (!o["reports"].is_array()) {
      ck.add("outputs.reports", "expected an array of report names");
      return;
    }
    for (auto& r : o["reports"]) {
      if (!r.is_string() || !kReports.count(r.get<std::string>()))
        ck.add("outputs.reports", fmt::format("unknown report {}", r.dump()));
      else
        cfg.reports.push_back(r.get<std::string>());
    }
  }
}

}  // namespace

double ScenarioConfig::max_X() const {
  if (X) return *X;
  return X_schedule.empty() ? 0.0 : X_schedule.back();
}

bool ScenarioConfig::wants(const std::string& report) const {
  return reports.empty() || std::find(reports.begin(), reports.end(), report) != reports.end();
}

ScenarioConfig parse_config_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorKind::ValidationError, "config: expected a JSON object");
  Checker ck;
  ScenarioConfig cfg;
  ck.keys(doc, "config", {"schema_version", "bundle", "grid", "conformal", "model", "flow", "analyze", "oracle", "outputs"});
  if (doc.contains("schema_version") &&
      (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != kSchemaVersion))
    ck.add("config.schema_version", fmt::format("only version {} is supported", kSchemaVersion));

  bool bundle_ok = false;
  if (!doc.contains("bundle")) {
    ck.add("config.bundle", "missing");
  } else {
    try {
      cfg.bundle = bundle_from_json(doc["bundle"]);
      cfg.bundle_doc = doc["bundle"];
      bundle_ok = true;
    } catch (const Error& e) {
      ck.errors.push_back(e.what());
    }
  }
  if (const json* g = ck.object(doc, "grid", "config", true)) parse_grid(*g, cfg, ck);
  if (const json* c = ck.object(doc, "conformal", "config", false)) parse_conformal(*c, cfg, ck);
  if (const json* m = ck.object(doc, "model", "config", false)) parse_model(*m, cfg, ck);
  if (const json* f = ck.object(doc, "flow", "config", false)) parse_flow(*f, cfg, ck);
  if (const json* a = ck.object(doc, "analyze", "config", false)) {
    if (bundle_ok)
      parse_analyze(*a, cfg, ck);
    else
      ck.keys(*a, "analyze", {"metric", "subbundles"});
  }
  if (const json* o = ck.object(doc, "oracle", "config", false)) {
    ck.keys(*o, "oracle", {"which"});
    ck.choice<OracleKind>(*o, "which", "oracle",
                          {{"rank1", OracleKind::Rank1},
                           {"radial-ode", OracleKind::RadialOde},
                           {"manufactured", OracleKind::Manufactured}},
                          cfg.oracle);
  }
  if (const json* o = ck.object(doc, "outputs", "config", false)) parse_outputs(*o, cfg, ck);
  if (cfg.max_X() > 0.0 && cfg.max_X() < cfg.model.blend_outer)
    ck.add("grid", fmt::format("largest X = {} does not fit the blend band (needs >= {})", cfg.max_X(),
                               cfg.model.blend_outer));

  if (!ck.errors.empty()) {
    std::string msg = fmt::format("{} problem(s) in config", ck.errors.size());
    for (auto& e : ck.errors) msg += "\n  " + e;
    fail(ErrorKind::ValidationError, msg);
  }
  return cfg;
}

ScenarioConfig parse_config(const std::string& path) { return parse_config_json(read_json_file(path)); }

Command parse_command(const std::string& name) {
  for (Command c : {Command::Degree, Command::Stability, Command::Model, Command::Flow, Command::Continuation,
                    Command::Analyze, Command::Extract, Command::Oracle})
    if (name == command_name(c)) return c;
  fail(ErrorKind::InvalidArgument, "unknown command " + name);
}

const char* command_name(Command c) {
  switch (c) {
    case Command::Degree: return "degree";
    case Command::Stability: return "stability";
    case Command::Model: return "model";
    case Command::Flow: return "flow";
    case Command::Continuation: return "continuation";
    case Command::Analyze: return "analyze";
    case Command::Extract: return "extract";
    case Command::Oracle: return "oracle";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence:
    case ErrorKind::NotSolvable:
    case ErrorKind::SingularH:
    case ErrorKind::StepCollapse:
    case ErrorKind::NoCandidate:
    case ErrorKind::InsufficientRange:
    case ErrorKind::ZeroInput:
      return 3;
    default:
      return 2;
  }
}

namespace {

// Writes files under one directory and records them in a manifest.
class OutputSet {
 public:
  OutputSet(std::string dir, Command cmd) : dir_(std::move(dir)), cmd_(cmd) {}

  void text(const std::string& name, const std::string& content) {
    write_text(path(name), content);
    files_.push_back(name);
  }
  void doc(const std::string& name, const json& content) {
    write_json(path(name), content);
    files_.push_back(name);
  }
  void field(const std::string& stem, const MatrixField& f, json extra = json::object()) {
    text(stem + ".csv", matrix_field_csv(f));
    json side = matrix_field_sidecar(f);
    side.update(extra);
    doc(stem + ".json", side);
  }
  void finish() {
    files_.push_back("manifest.json");
    write_json(path("manifest.json"), json{{"command", command_name(cmd_)}, {"files", files_}});
  }

 private:
  std::string path(const std::string& name) const { return dir_ + "/" + name; }
  std::string dir_;
  Command cmd_;
  std::vector<std::string> files_;
};

double require_X(const ScenarioConfig& cfg) {
  if (cfg.X) return *cfg.X;
  return cfg.X_schedule.back();
}

ModelMetric build_model(const ScenarioConfig& cfg, const ModelOptions& mopt) {
  CylinderGrid grid = build_grid(require_X(cfg), cfg.Nx, cfg.Ny);
  return build_model_metric(cfg.bundle, grid, cfg.preset, mopt);
}

EndomorphismField initial_metric(const ScenarioConfig& cfg, const ModelMetric& model, unsigned seed) {
  if (cfg.init == InitKind::Perturbed) return perturbed_initial(model, cfg.init_amplitude, seed);
  return EndomorphismField::identity(model.grid, model.n, Frame::Unitary);
}

json grid_json(const CylinderGrid& g) { return json{{"X", g.X}, {"Nx", g.Nx}, {"Ny", g.Ny}}; }

double sup_trace(const EndomorphismField& h) {
  double m = 0.0;
  for (int i = 0; i <= h.grid.Nx; ++i)
    for (int j = 0; j < h.grid.Ny; ++j) m = std::max(m, h.at(i, j).trace().real());
  return m;
}

void write_flow(OutputSet& out, const ScenarioConfig& cfg, const ModelMetric& model, const FlowReport& rep) {
  json doc = flow_report_to_json(rep);
  doc["grid"] = grid_json(model.grid);
  doc["c"] = model.c;
  out.doc("flow_report.json", doc);
  if (cfg.wants("monitors")) out.text("monitors.csv", monitors_csv(rep.series));
  if (cfg.wants("checkpoint")) {
    double t = rep.series.empty() ? 0.0 : rep.series.back().t;
    double dt = rep.series.empty() ? 0.0 : rep.series.back().dt;
    out.field("checkpoint", rep.h, json{{"t", t}, {"dt", dt}});
  }
}

json flow_summary(const FlowReport& rep) {
  return json{{"converged", rep.converged},
              {"residual", rep.final_residual},
              {"weighted_residual", rep.final_weighted_residual},
              {"flow_steps", rep.flow_steps},
              {"newton_iterations", rep.newton_iterations}};
}

CommandOutcome cmd_model(const ScenarioConfig& cfg, OutputSet& out) {
  ModelMetric model = build_model(cfg, cfg.model);
  ScalarField res = model_residual(model);
  json doc{{"grid", grid_json(model.grid)},
           {"c", model.c},
           {"c_closed_form", model.c_closed_form},
           {"volume", model.volume},
           {"degree", parabolic_degree(cfg.bundle)},
           {"conformal_twist", model.options.conformal_twist},
           {"sup_residual", res.max_abs()},
           {"sup_twist", model.u.max_abs()}};
  out.doc("model.json", doc);
  if (cfg.wants("fields")) {
    out.text("conformal_factor.csv", scalar_field_csv(model.E));
    out.text("twist.csv", scalar_field_csv(model.u));
    out.text("model_residual.csv", scalar_field_csv(res));
    out.field("model_metric", model_metric_field(model, Frame::Parabolic));
  }
  return {json{{"sup_residual", res.max_abs()}, {"c", model.c}, {"volume", model.volume}}, false};
}

CommandOutcome cmd_flow(const ScenarioConfig& cfg, const RunContext& ctx, OutputSet& out) {
  ModelMetric model = build_model(cfg, cfg.model);
  FlowReport rep = run_flow(model, initial_metric(cfg, model, ctx.seed), cfg.flow);
  write_flow(out, cfg, model, rep);
  return {flow_summary(rep), !rep.converged};
}

CommandOutcome cmd_continuation(const ScenarioConfig& cfg, OutputSet& out) {
  if (cfg.X_schedule.empty()) fail(ErrorKind::InvalidArgument, "continuation needs grid.X_schedule");
  ContinuationResult res =
      rho_continuation(cfg.bundle, cfg.X_schedule, cfg.Nx, cfg.Ny, cfg.preset, cfg.flow, cfg.plateau_tol, cfg.model);
  out.doc("continuation.json", continuation_to_json(res));
  if (cfg.wants("tables")) out.text("m_k.csv", continuation_csv(res));
  json summary{{"verdict", res.verdict},
               {"strictly_increasing", res.strictly_increasing},
               {"final_relative_increase", res.final_relative_increase}};
  return {summary, res.verdict == "no-convergence"};
}

CommandOutcome cmd_analyze(const ScenarioConfig& cfg, const RunContext& ctx, OutputSet& out) {
  ModelMetric model = build_model(cfg, cfg.model);
  EndomorphismField h = EndomorphismField::identity(model.grid, model.n, Frame::Unitary);
  json doc{{"grid", grid_json(model.grid)}, {"metric", cfg.analyze_metric == AnalyzeMetric::Model ? "model" : "flow"}};
  bool failed = false;
  if (cfg.analyze_metric == AnalyzeMetric::Flow) {
    FlowReport rep = run_flow(model, initial_metric(cfg, model, ctx.seed), cfg.flow);
    doc["flow"] = flow_summary(rep);
    failed = !rep.converged;
    h = rep.h;
  }
  json summary = json::object();
  if (cfg.wants("degree")) {
    DegreeEstimate d = degree_via_curvature(model, h);
    double combinatorial = parabolic_degree(cfg.bundle);
    doc["degree"] = degree_estimate_to_json(d);
    doc["degree"]["combinatorial"] = combinatorial;
    summary["degree"] = d.value;
    summary["degree_error"] = std::abs(d.value - combinatorial);
  }
  if (cfg.wants("chern_weil")) {
    std::vector<FlatSubbundleSpec> subs;
    for (auto& p : cfg.analyze_prefixes) subs.push_back(make_subbundle(cfg.bundle, p));
    if (cfg.analyze_prefixes.empty())
      for (auto& s : enumerate_flat_subbundles(cfg.bundle).members)
        if (s.rank() > 0 && s.rank() < cfg.bundle.rank) subs.push_back(s);
    json rows = json::array();
    double worst = 0.0;
    for (auto& s : subs) {
      DegreeEstimate d = chern_weil_degree(model, h, s);
      json row = subbundle_to_json(cfg.bundle, s);
      row["chern_weil"] = degree_estimate_to_json(d);
      worst = std::max(worst, std::abs(d.value - parabolic_degree(cfg.bundle, &s)));
      rows.push_back(row);
    }
    doc["chern_weil"] = rows;
    summary["chern_weil_max_error"] = worst;
  }
  if (cfg.wants("tameness")) {
    TamenessReport t = tameness_report(model, h);
    doc["tameness"] = tameness_to_json(t);
    summary["tameness_pass"] = t.pass;
  }
  if (cfg.wants("decay")) {
    DecayProfile p = gradient_decay_profile(model, h);
    doc["decay"] = decay_profile_to_json(p);
    out.text("decay_profile.csv", decay_profile_csv(p));
    summary["decay_exponent"] = p.exponent;
  }
  out.doc("analysis.json", doc);
  return {summary, failed};
}

CommandOutcome cmd_extract(const ScenarioConfig& cfg, const RunContext& ctx, OutputSet& out) {
  ModelMetric model = build_model(cfg, cfg.model);
  FlowReport rep = run_flow(model, initial_metric(cfg, model, ctx.seed), cfg.flow);
  write_flow(out, cfg, model, rep);
  DestabilizerCandidate cand =
      extract_destabilizer(model, rep.h, cfg.sigma_schedule, cfg.rounding_threshold, cfg.min_gap);
  json doc = destabilizer_to_json(cand);
  doc["sup_trace"] = sup_trace(rep.h);
  doc["bundle_slope"] = slope(cfg.bundle);
  out.doc("destabilizer.json", doc);
  if (cfg.wants("tables")) out.text("sigma_table.csv", sigma_table_csv(cand));
  if (cfg.wants("fields")) out.field("projection", cand.projection);
  json summary{{"rank", cand.rank},
               {"slope", cand.slope},
               {"mu", cand.mu},
               {"idempotency", cand.idempotency},
               {"flatness", cand.flatness},
               {"flow_converged", rep.converged}};
  return {summary, false};
}

// The oracles compare against the untwisted model: with the twist on the
// rank-1 problem is already solved by the identity.
CommandOutcome cmd_oracle(const ScenarioConfig& cfg, OutputSet& out) {
  ModelOptions mopt = cfg.model;
  mopt.conformal_twist = false;
  json doc;
  json summary;
  bool failed = false;
  if (cfg.oracle == OracleKind::Manufactured) {
    auto rows = manufactured_poisson_table(require_X(cfg), cfg.Ny, {cfg.Nx, 2 * cfg.Nx, 4 * cfg.Nx});
    out.text("manufactured.csv", manufactured_csv(rows));
    json table = json::array();
    for (auto& r : rows) table.push_back({{"Nx", r.Nx}, {"dx", r.dx}, {"max_error", r.error}, {"ratio", r.ratio}});
    doc = json{{"oracle", "manufactured"}, {"rows", table}};
    summary = json{{"final_ratio", rows.back().ratio}, {"finest_error", rows.back().error}};
  } else if (cfg.oracle == OracleKind::Rank1) {
    ModelMetric model = build_model(cfg, mopt);
    ScalarField f = rank1_linear_oracle(model);
    FlowReport rep = run_flow(model, EndomorphismField::identity(model.grid, 1, Frame::Unitary), cfg.flow);
    double diff = 0.0;
    for (int i = 0; i <= model.grid.Nx; ++i)
      for (int j = 0; j < model.grid.Ny; ++j)
        diff = std::max(diff, std::abs(rep.h.at(i, j)(0, 0).real() - std::exp(f(i, j))));
    if (cfg.wants("fields")) out.text("rank1_oracle.csv", scalar_field_csv(f));
    doc = json{{"oracle", "rank1"}, {"grid", grid_json(model.grid)}, {"flow", flow_summary(rep)}, {"max_diff", diff}};
    summary = json{{"max_diff", diff}, {"flow_converged", rep.converged}};
    failed = !rep.converged;
  } else {
    ModelMetric model = build_model(cfg, mopt);
    std::vector<double> xs;
    for (int i = 0; i <= model.grid.Nx; ++i) xs.push_back(model.grid.x(i));
    RadialSolution sol = jordan_radial_bvp(model.grid.X, xs);
    EndomorphismField oracle_h = radial_oracle_metric(model, sol);
    double ivp = radial_model_ivp_deviation(model.grid.X, mopt.blend_outer);
    FlowReport rep = run_flow(model, EndomorphismField::identity(model.grid, 2, Frame::Unitary), cfg.flow);
    double diff = 0.0;
    for (int i = 0; i <= model.grid.Nx; ++i)
      for (int j = 0; j < model.grid.Ny; ++j) diff = std::max(diff, (rep.h.at(i, j) - oracle_h.at(i, j)).norm());
    if (cfg.wants("tables")) {
      std::string csv = "x,L,L_closed_form\n";
      double a = sol.closed_form_scale;
      for (size_t k = 0; k < xs.size(); ++k)
        csv += fmt::format("{},{},{}\n", format_double(xs[k]), format_double(sol.L[k]),
                           format_double(std::log(a / std::cos(a * xs[k]))));
      out.text("radial_bvp.csv", csv);
    }
    doc = json{{"oracle", "radial-ode"},
               {"grid", grid_json(model.grid)},
               {"L0", sol.L0},
               {"closed_form_scale", sol.closed_form_scale},
               {"model_ivp_deviation", ivp},
               {"flow", flow_summary(rep)},
               {"max_diff", diff}};
    summary = json{{"max_diff", diff}, {"model_ivp_deviation", ivp}, {"flow_converged", rep.converged}};
    failed = !rep.converged;
  }
  out.doc("oracle.json", doc);
  return {summary, failed};
}

}  // namespace

CommandOutcome run_command(Command cmd, const ScenarioConfig& cfg, const RunContext& ctx) {
  if (cmd == Command::Degree)
    return {json{{"rank", cfg.bundle.rank}, {"degree", parabolic_degree(cfg.bundle)}, {"slope", slope(cfg.bundle)}},
            false};
  if (cmd == Command::Stability) return {verdict_to_json(cfg.bundle, stability_classify(cfg.bundle)), false};

  OutputSet out(ctx.out_dir, cmd);
  CommandOutcome res;
  switch (cmd) {
    case Command::Model: res = cmd_model(cfg, out); break;
    case Command::Flow: res = cmd_flow(cfg, ctx, out); break;
    case Command::Continuation: res = cmd_continuation(cfg, out); break;
    case Command::Analyze: res = cmd_analyze(cfg, ctx, out); break;
    case Command::Extract: res = cmd_extract(cfg, ctx, out); break;
    case Command::Oracle: res = cmd_oracle(cfg, out); break;
    default: break;
  }
  out.finish();
  res.summary["command"] = command_name(cmd);
  res.summary["out_dir"] = ctx.out_dir;
  return res;
}

}  // namespace pg
