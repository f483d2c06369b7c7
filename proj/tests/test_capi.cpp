#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "pg/pg_c.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kSplitBundle = R"({
  "rank": 2,
  "punctures": {
    "zero": {"blocks": [{"kappa_re": 0.0, "kappa_im": 0.25, "dim": 1}, {"kappa_re": 0.0, "kappa_im": 0.5, "dim": 1}]},
    "infinity": {"blocks": [{"kappa_re": 0.0, "kappa_im": 0.75, "dim": 1}, {"kappa_re": 0.0, "kappa_im": 0.5, "dim": 1}]}
  },
  "weights": {"zero": [1.0, 0.0], "infinity": [0.0, 0.0]}
})";

const char* kLineBundle = R"({
  "rank": 1,
  "punctures": {
    "zero": {"blocks": [{"kappa_re": 0.0, "kappa_im": 0.0, "dim": 1}]},
    "infinity": {"blocks": [{"kappa_re": 0.0, "kappa_im": 0.0, "dim": 1}]}
  },
  "weights": {"zero": [0.25], "infinity": [0.25]}
})";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("pg_capi_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& file, const json& doc) const {
    std::ofstream(path / file) << doc.dump(2);
    return (path / file).string();
  }
};

json config_with(const char* bundle, json grid) {
  return json{{"schema_version", 1}, {"bundle", json::parse(bundle)}, {"grid", std::move(grid)}};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  pg_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("C API bundle round trip") {
  pg_bundle* b = nullptr;
  REQUIRE(pg_bundle_from_json(kSplitBundle, &b) == PG_OK);
  CHECK(std::string(pg_last_error()).empty());
  CHECK(pg_bundle_rank(b) == 2);

  double deg = 0.0, mu = 0.0;
  CHECK(pg_bundle_degree(b, nullptr, 0, &deg) == PG_OK);
  CHECK(pg_bundle_slope(b, nullptr, 0, &mu) == PG_OK);
  CHECK(deg == doctest::Approx(1.0));
  CHECK(mu == doctest::Approx(0.5));

  // one prefix length per zero-end block in canonical order
  int prefix[] = {0, 1};
  CHECK(pg_bundle_slope(b, prefix, 2, &mu) == PG_OK);
  CHECK(mu == doctest::Approx(1.0));

  char* verdict = nullptr;
  REQUIRE(pg_bundle_stability_json(b, &verdict) == PG_OK);
  json v = json::parse(take(verdict));
  CHECK(v["class"] == "unstable");
  CHECK(v["witness_slope"].get<double>() == doctest::Approx(1.0));
  CHECK(v["mu"].get<double>() == doctest::Approx(0.5));
  pg_bundle_free(b);

  REQUIRE(pg_bundle_from_json(kLineBundle, &b) == PG_OK);
  REQUIRE(pg_bundle_stability_json(b, &verdict) == PG_OK);
  CHECK(json::parse(take(verdict))["class"] == "stable");
  CHECK(pg_bundle_degree(b, nullptr, 0, &deg) == PG_OK);
  CHECK(deg == doctest::Approx(0.5));
  pg_bundle_free(b);
}

TEST_CASE("C API error reporting") {
  pg_bundle* b = reinterpret_cast<pg_bundle*>(0x1);
  CHECK(pg_bundle_from_json("{not json", &b) == PG_ERR_VALIDATION);
  CHECK(b == nullptr);
  CHECK(std::string(pg_last_error_kind()) == "ParseError");

  json bad = json::parse(kSplitBundle);
  bad["weights"]["zero"] = {0.5};
  CHECK(pg_bundle_from_json(bad.dump().c_str(), &b) == PG_ERR_VALIDATION);
  CHECK(std::string(pg_last_error()).find("bundle.weights.zero: 1 weights for 2 blocks") != std::string::npos);

  CHECK(pg_bundle_from_json(nullptr, &b) == PG_ERR_NULL_ARGUMENT);
  CHECK(pg_bundle_from_json(kLineBundle, nullptr) == PG_ERR_NULL_ARGUMENT);
  CHECK(pg_bundle_degree(nullptr, nullptr, 0, nullptr) == PG_ERR_NULL_ARGUMENT);
  CHECK(pg_bundle_rank(nullptr) == 0);

  REQUIRE(pg_bundle_from_json(kSplitBundle, &b) == PG_OK);
  int too_long[] = {2, 0};
  double out = 0.0;
  CHECK(pg_bundle_degree(b, too_long, 2, &out) == PG_ERR_VALIDATION);
  CHECK(std::string(pg_last_error_kind()) == "NotAPrefix");
  CHECK(pg_bundle_degree(b, too_long, 1, &out) == PG_ERR_VALIDATION);
  CHECK(!std::string(pg_last_error_kind()).empty());
  // a successful call clears the previous error
  CHECK(pg_bundle_degree(b, nullptr, 0, &out) == PG_OK);
  CHECK(std::string(pg_last_error()).empty());
  pg_bundle_free(b);

  pg_bundle_free(nullptr);
  pg_string_free(nullptr);
  CHECK(std::string(pg_version()).size() > 0);
}

TEST_CASE("C API errors are per thread") {
  pg_bundle* b = nullptr;
  CHECK(pg_bundle_from_json("[", &b) == PG_ERR_VALIDATION);
  std::string other;
  std::thread t([&] { other = pg_last_error(); });
  t.join();
  CHECK(other.empty());
  CHECK(!std::string(pg_last_error()).empty());
}

TEST_CASE("config validation through the C API") {
  TempDir dir("validation");
  pg_scenario* s = nullptr;

  std::string ok = dir.write("ok.json", config_with(kLineBundle, {{"X", 5.0}, {"Nx", 50}, {"Ny", 16}}));
  REQUIRE(pg_scenario_load(ok.c_str(), &s) == PG_OK);
  pg_scenario_free(s);

  std::string odd = dir.write("odd.json", config_with(kLineBundle, {{"X", 5.0}, {"Nx", 50}, {"Ny", 15}}));
  CHECK(pg_scenario_load(odd.c_str(), &s) == PG_ERR_VALIDATION);
  CHECK(s == nullptr);
  CHECK(std::string(pg_last_error_kind()) == "ValidationError");
  CHECK(std::string(pg_last_error()).find("grid.Ny") != std::string::npos);

  // every problem is reported at once
  json many = config_with(kLineBundle, {{"X", 5.0}, {"Nx", 4}, {"Ny", 15}});
  many["bundle"]["weights"]["infinity"] = {0.1, 0.2};
  many["flow"] = {{"tol", -1.0}};
  std::string mp = dir.write("many.json", many);
  CHECK(pg_scenario_load(mp.c_str(), &s) == PG_ERR_VALIDATION);
  std::string msg = pg_last_error();
  for (const char* where : {"grid.Nx", "grid.Ny", "bundle.weights.infinity", "flow.tol"})
    CHECK_MESSAGE(msg.find(where) != std::string::npos, where);

  json unknown = config_with(kLineBundle, {{"X", 5.0}, {"Nx", 50}, {"Ny", 16}});
  unknown["grid"]["dz"] = 1;
  std::string up = dir.write("unknown.json", unknown);
  CHECK(pg_scenario_load(up.c_str(), &s) == PG_ERR_VALIDATION);
  CHECK(std::string(pg_last_error()).find("dz") != std::string::npos);

  json sched = config_with(kLineBundle, {{"X_schedule", {4.0, 5.0}}, {"Nx", 25}, {"Ny", 16}});
  std::string sp = dir.write("sched.json", sched);
  CHECK(pg_scenario_load(sp.c_str(), &s) == PG_ERR_VALIDATION);
  CHECK(std::string(pg_last_error()).find("grid.X_schedule") != std::string::npos);

  CHECK(pg_scenario_load((dir.path / "missing.json").string().c_str(), &s) == PG_ERR_VALIDATION);
  CHECK(std::string(pg_last_error_kind()) == "IoError");
}

TEST_CASE("scenario commands through the C API") {
  TempDir dir("run");
  pg_scenario* s = nullptr;
  std::string path = dir.write("unstable.json", config_with(kSplitBundle, {{"X", 5.0}, {"Nx", 50}, {"Ny", 16}}));
  REQUIRE(pg_scenario_load(path.c_str(), &s) == PG_OK);

  char* summary = nullptr;
  REQUIRE(pg_scenario_run(s, "degree", nullptr, 0, &summary) == PG_OK);
  json d = json::parse(take(summary));
  CHECK(d["degree"].get<double>() == doctest::Approx(1.0));
  CHECK(d["slope"].get<double>() == doctest::Approx(0.5));
  CHECK(d["rank"] == 2);

  REQUIRE(pg_scenario_run(s, "stability", nullptr, 0, &summary) == PG_OK);
  CHECK(json::parse(take(summary))["class"] == "unstable");

  CHECK(pg_scenario_run(s, "frobnicate", nullptr, 0, &summary) == PG_ERR_VALIDATION);
  CHECK(summary == nullptr);

  // continuation needs a schedule
  CHECK(pg_scenario_run(s, "continuation", (dir.path / "c").string().c_str(), 0, &summary) ==
        PG_ERR_VALIDATION);

  std::string out = (dir.path / "model").string();
  REQUIRE(pg_scenario_run(s, "model", out.c_str(), 0, &summary) == PG_OK);
  json m = json::parse(take(summary));
  CHECK(m["command"] == "model");
  CHECK(fs::exists(fs::path(out) / "manifest.json"));
  pg_scenario_free(s);
}
