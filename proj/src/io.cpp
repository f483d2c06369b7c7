#include "pg/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace pg {

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed,
                std::vector<std::string>& errors) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) errors.push_back(fmt::format("{}.{}: unknown key", where, it.key()));
}

std::vector<JordanBlock> parse_blocks(const json& p, const std::string& where, std::vector<std::string>& errors) {
  std::vector<JordanBlock> out;
  if (!p.is_object()) {
    errors.push_back(where + ": expected an object");
    return out;
  }
  check_keys(p, where, {"blocks"}, errors);
  if (!p.contains("blocks") || !p["blocks"].is_array()) {
    errors.push_back(where + ".blocks: expected an array");
    return out;
  }
  for (size_t k = 0; k < p["blocks"].size(); ++k) {
    const json& b = p["blocks"][k];
    std::string w = fmt::format("{}.blocks[{}]", where, k);
    if (!b.is_object()) {
      errors.push_back(w + ": expected an object");
      continue;
    }
    check_keys(b, w, {"kappa_re", "kappa_im", "dim"}, errors);
    JordanBlock jb;
    if (!b.contains("kappa_re") || !b["kappa_re"].is_number())
      errors.push_back(w + ".kappa_re: expected a number");
    else
      jb.kappa.real(b["kappa_re"].get<double>());
    if (b.contains("kappa_im")) {
      if (!b["kappa_im"].is_number())
        errors.push_back(w + ".kappa_im: expected a number");
      else
        jb.kappa.imag(b["kappa_im"].get<double>());
    }
    if (!b.contains("dim") || !b["dim"].is_number_integer() || b["dim"].get<int>() < 1)
      errors.push_back(w + ".dim: expected a positive integer");
    else
      jb.dim = b["dim"].get<int>();
    out.push_back(jb);
  }
  return out;
}

std::vector<double> parse_numbers(const json& a, const std::string& where, std::vector<std::string>& errors) {
  std::vector<double> out;
  if (!a.is_array()) {
    errors.push_back(where + ": expected an array of numbers");
    return out;
  }
  for (size_t k = 0; k < a.size(); ++k) {
    if (!a[k].is_number())
      errors.push_back(fmt::format("{}[{}]: expected a number", where, k));
    else
      out.push_back(a[k].get<double>());
  }
  return out;
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

json prefix_json(const FlatSubbundleSpec& s) { return json{{"prefix_zero", s.prefix_zero}, {"prefix_infinity", s.prefix_infinity}}; }

}  // namespace

FlatBundleSpec bundle_from_json(const json& doc) {
  std::vector<std::string> errors;
  if (!doc.is_object()) fail(ErrorKind::ValidationError, "bundle: expected an object");
  check_keys(doc, "bundle", {"rank", "punctures", "weights"}, errors);
  int rank = 0;
  if (!doc.contains("rank") || !doc["rank"].is_number_integer() || doc["rank"].get<int>() < 1)
    errors.push_back("bundle.rank: expected a positive integer");
  else
    rank = doc["rank"].get<int>();
  std::vector<JordanBlock> zb, ib;
  if (!doc.contains("punctures") || !doc["punctures"].is_object()) {
    errors.push_back("bundle.punctures: expected an object with zero and infinity");
  } else {
    const json& p = doc["punctures"];
    check_keys(p, "bundle.punctures", {"zero", "infinity"}, errors);
    if (!p.contains("zero")) errors.push_back("bundle.punctures.zero: missing");
    else zb = parse_blocks(p["zero"], "bundle.punctures.zero", errors);
    if (!p.contains("infinity")) errors.push_back("bundle.punctures.infinity: missing");
    else ib = parse_blocks(p["infinity"], "bundle.punctures.infinity", errors);
  }
  std::vector<double> zw, iw;
  if (!doc.contains("weights") || !doc["weights"].is_object()) {
    errors.push_back("bundle.weights: expected an object with zero and infinity");
  } else {
    const json& w = doc["weights"];
    check_keys(w, "bundle.weights", {"zero", "infinity"}, errors);
    if (!w.contains("zero")) errors.push_back("bundle.weights.zero: missing");
    else zw = parse_numbers(w["zero"], "bundle.weights.zero", errors);
    if (!w.contains("infinity")) errors.push_back("bundle.weights.infinity: missing");
    else iw = parse_numbers(w["infinity"], "bundle.weights.infinity", errors);
  }
  if (errors.empty()) {
    if (zw.size() != zb.size())
      errors.push_back(fmt::format("bundle.weights.zero: {} weights for {} blocks", zw.size(), zb.size()));
    if (iw.size() != ib.size())
      errors.push_back(fmt::format("bundle.weights.infinity: {} weights for {} blocks", iw.size(), ib.size()));
  }
  if (!errors.empty()) {
    std::string msg;
    for (auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
    fail(ErrorKind::ValidationError, msg);
  }
  return make_bundle(rank, zb, zw, ib, iw);
}

json bundle_to_json(const FlatBundleSpec& b) {
  auto blocks = [](const PuncturePresentation& p) {
    json a = json::array();
    for (auto& bl : p.blocks) a.push_back({{"kappa_re", bl.kappa.real()}, {"kappa_im", bl.kappa.imag()}, {"dim", bl.dim}});
    return json{{"blocks", a}};
  };
  return json{{"rank", b.rank},
              {"punctures", {{"zero", blocks(b.zero)}, {"infinity", blocks(b.infinity)}}},
              {"weights", {{"zero", b.weights.zero}, {"infinity", b.weights.infinity}}}};
}

json subbundle_to_json(const FlatBundleSpec& b, const FlatSubbundleSpec& s) {
  json j = prefix_json(s);
  j["rank"] = s.rank();
  j["degree"] = parabolic_degree(b, &s);
  j["slope"] = slope(b, &s);
  return j;
}

json verdict_to_json(const FlatBundleSpec& b, const StabilityVerdict& v) {
  json j{{"class", stability_class_name(v.cls)},
         {"mu", v.mu},
         {"degree", parabolic_degree(b)},
         {"standard_family_only", v.standard_family_only}};
  if (v.witness) {
    j["witness"] = subbundle_to_json(b, *v.witness);
    j["witness_slope"] = v.witness_slope;
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

json flow_report_to_json(const FlowReport& r) {
  return json{{"converged", r.converged},
              {"final_residual", number(r.final_residual)},
              {"final_weighted_residual", number(r.final_weighted_residual)},
              {"decay_rate", number(r.decay_rate)},
              {"monotone", r.monotone},
              {"max_increase", number(r.max_increase)},
              {"flow_steps", r.flow_steps},
              {"rejected_steps", r.rejected_steps},
              {"newton_iterations", r.newton_iterations},
              {"diagnosis", r.diagnosis}};
}

json continuation_to_json(const ContinuationResult& res) {
  json rows = json::array();
  for (auto& r : res.rows)
    rows.push_back({{"X", r.X},
                    {"rho", r.rho},
                    {"sup_trace", r.sup_trace},
                    {"argmax_x", r.argmax_x},
                    {"converged", r.converged},
                    {"residual", number(r.residual)}});
  return json{{"verdict", res.verdict},
              {"strictly_increasing", res.strictly_increasing},
              {"final_relative_increase", number(res.final_relative_increase)},
              {"rows", rows}};
}

json destabilizer_to_json(const DestabilizerCandidate& c) {
  json table = json::array();
  for (auto& r : c.sigma_table) table.push_back({{"sigma", r.sigma}, {"rank", r.rank}, {"gap", r.gap}, {"spectrum", r.spectrum}});
  return json{{"rank", c.rank},
              {"flatness", c.flatness},
              {"idempotency", c.idempotency},
              {"matched", prefix_json(c.matched)},
              {"matched_distance", c.matched_distance},
              {"slope", c.slope},
              {"mu", c.mu},
              {"probe_x", c.probe_x},
              {"sigma_table", table}};
}

json degree_estimate_to_json(const DegreeEstimate& d) {
  return json{{"value", d.value}, {"truncated", d.truncated}, {"tail", d.tail}, {"sensitivity", d.sensitivity}};
}

json tameness_to_json(const TamenessReport& rep) {
  json ends = json::array();
  for (auto& e : rep.ends) {
    json blocks = json::array(), sections = json::array(), tail = json::array();
    for (auto& b : e.blocks)
      blocks.push_back({{"block", b.block},
                        {"configured", b.configured},
                        {"fitted", number(b.fitted)},
                        {"ci", number(b.ci)},
                        {"relative_error", number(b.relative_error)},
                        {"epsilon", number(b.epsilon)},
                        {"epsilon_ci", number(b.epsilon_ci)},
                        {"pass", b.pass}});
    for (auto& s : e.sections)
      sections.push_back({{"component", s.component},
                          {"block", s.block},
                          {"configured_weight", s.configured_weight},
                          {"fitted_weight", number(s.fitted_weight)},
                          {"configured_half_tau", s.configured_half_tau},
                          {"fitted_half_tau", number(s.fitted_half_tau)},
                          {"half_tau_ci", number(s.half_tau_ci)},
                          {"pass", s.pass}});
    for (auto& [t, v] : e.curvature_tail) tail.push_back({t, v});
    ends.push_back({{"puncture", e.puncture},
                    {"window", {e.t_lo, e.t_hi}},
                    {"window_nodes", e.window_nodes},
                    {"A", {{"curvature_tail", tail}, {"pass", e.pass_a}}},
                    {"B", {{"blocks", blocks}, {"pass", e.pass_b}}},
                    {"C", {{"sections", sections}, {"pass", e.pass_c}}},
                    {"D", {{"exponent", number(e.offdiag_exponent)}, {"ci", number(e.offdiag_ci)}, {"pass", e.pass_d}}}});
  }
  return json{{"pass", rep.pass}, {"weight_mismatch", rep.weight_mismatch}, {"ends", ends}};
}

json decay_profile_to_json(const DecayProfile& p) {
  return json{{"constant", p.constant}, {"exponent", number(p.exponent)}, {"bound", p.bound},
              {"exceeds_bound", p.exceeds_bound}};
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string scalar_field_csv(const ScalarField& f) {
  std::string s = "x,y,value\n";
  const CylinderGrid& g = f.grid;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j)
      s += fmt::format("{},{},{}\n", format_double(g.x(i)), format_double(g.y(j)), format_double(f(i, j)));
  return s;
}

std::string matrix_field_csv(const MatrixField& f) {
  std::string s = "x,y";
  for (int r = 0; r < f.n; ++r)
    for (int c = 0; c < f.n; ++c) s += fmt::format(",re_{}{},im_{}{}", r, c, r, c);
  s += "\n";
  const CylinderGrid& g = f.grid;
  for (int i = 0; i <= g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      s += format_double(g.x(i)) + "," + format_double(g.y(j));
      Mat m = f.at(i, j);
      for (int r = 0; r < f.n; ++r)
        for (int c = 0; c < f.n; ++c) s += "," + format_double(m(r, c).real()) + "," + format_double(m(r, c).imag());
      s += "\n";
    }
  return s;
}

json matrix_field_sidecar(const MatrixField& f) {
  return json{{"frame", frame_name(f.frame)},
              {"rank", f.n},
              {"grid", {{"X", f.grid.X}, {"Nx", f.grid.Nx}, {"Ny", f.grid.Ny}}}};
}

MatrixField read_matrix_field(const std::string& csv_path, const std::string& sidecar_path) {
  json side = read_json_file(sidecar_path);
  try {
    CylinderGrid g = build_grid(side.at("grid").at("X").get<double>(), side.at("grid").at("Nx").get<int>(),
                                side.at("grid").at("Ny").get<int>());
    int n = side.at("rank").get<int>();
    std::string fr = side.at("frame").get<std::string>();
    Frame frame = fr == "temporal" ? Frame::Temporal : fr == "parabolic" ? Frame::Parabolic : Frame::Unitary;
    MatrixField f(g, n, frame);
    std::ifstream in(csv_path);
    if (!in) fail(ErrorKind::IoError, "cannot read " + csv_path);
    std::string line;
    std::getline(in, line);
    for (int i = 0; i <= g.Nx; ++i)
      for (int j = 0; j < g.Ny; ++j) {
        if (!std::getline(in, line)) fail(ErrorKind::ParseError, csv_path + ": too few rows");
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (static_cast<int>(vals.size()) != 2 + 2 * n * n) fail(ErrorKind::ParseError, csv_path + ": wrong column count");
        Mat m(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) m(r, c) = cd(vals[2 + 2 * (r * n + c)], vals[3 + 2 * (r * n + c)]);
        f.set(i, j, m);
      }
    return f;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, sidecar_path + ": " + e.what());
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::ParseError, csv_path + ": non-numeric cell");
  }
}

std::string monitors_csv(const std::vector<FlowMonitors>& series) {
  std::string s = "t,dt,sup_residual,weighted_residual,sup_trace,det_error,energy\n";
  for (auto& m : series)
    s += fmt::format("{},{},{},{},{},{},{}\n", format_double(m.t), format_double(m.dt), format_double(m.sup_residual),
                     format_double(m.weighted_residual), format_double(m.sup_trace), format_double(m.det_error),
                     format_double(m.energy));
  return s;
}

std::string continuation_csv(const ContinuationResult& res) {
  std::string s = "X,rho,sup_trace,argmax_x,converged,residual\n";
  for (auto& r : res.rows)
    s += fmt::format("{},{},{},{},{},{}\n", format_double(r.X), format_double(r.rho), format_double(r.sup_trace),
                     format_double(r.argmax_x), r.converged ? 1 : 0, format_double(r.residual));
  return s;
}

std::string sigma_table_csv(const DestabilizerCandidate& c) {
  std::string s = "sigma,rank,gap,spectrum\n";
  for (auto& r : c.sigma_table) {
    std::string spec;
    for (double v : r.spectrum) spec += (spec.empty() ? "" : " ") + format_double(v);
    s += fmt::format("{},{},{},{}\n", format_double(r.sigma), r.rank, format_double(r.gap), spec);
  }
  return s;
}

std::string decay_profile_csv(const DecayProfile& p) {
  std::string s = "cutoff,integral\n";
  for (auto& [c, v] : p.table) s += format_double(c) + "," + format_double(v) + "\n";
  return s;
}

std::string manufactured_csv(const std::vector<ManufacturedRow>& rows) {
  std::string s = "Nx,dx,max_error,ratio\n";
  for (auto& r : rows) s += fmt::format("{},{},{},{}\n", r.Nx, format_double(r.dx), format_double(r.error), format_double(r.ratio));
  return s;
}

void write_text(const std::string& path, const std::string& content) {
  std::error_code ec;
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  if (ec) fail(ErrorKind::IoError, fmt::format("cannot create {}: {}", parent.string(), ec.message()));
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorKind::IoError, "write failed for " + path);
}

void write_json(const std::string& path, json doc) {
  if (doc.is_object()) doc["schema_version"] = kSchemaVersion;
  write_text(path, doc.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace pg
