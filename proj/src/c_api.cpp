#include "pg/pg_c.h"

#include <cstring>
#include <string>

#include "pg/scenario.hpp"

struct pg_bundle {
  pg::FlatBundleSpec spec;
};

struct pg_scenario {
  pg::ScenarioConfig config;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_kind;

void clear_error() {
  last_error.clear();
  last_kind.clear();
}

pg_status record(pg_status status, const std::string& kind, const std::string& msg) {
  last_kind = kind;
  last_error = msg;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
pg_status guarded(Fn&& fn) {
  clear_error();
  try {
    return fn();
  } catch (const pg::Error& e) {
    auto status = pg::exit_code_for(e.kind()) == 3 ? PG_ERR_NUMERICAL : PG_ERR_VALIDATION;
    return record(status, pg::error_kind_name(e.kind()), e.what());
  } catch (const std::exception& e) {
    return record(PG_ERR_INTERNAL, "Internal", e.what());
  } catch (...) {
    return record(PG_ERR_INTERNAL, "Internal", "unknown exception");
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const pg::FlatSubbundleSpec* optional_sub(const pg_bundle* b, const int* prefix, size_t len,
                                          pg::FlatSubbundleSpec& storage) {
  if (!prefix) return nullptr;
  storage = pg::make_subbundle(b->spec, std::vector<int>(prefix, prefix + len));
  return &storage;
}

}  // namespace

extern "C" {

const char* pg_version(void) { return "1.0.0"; }

const char* pg_last_error(void) { return last_error.c_str(); }

const char* pg_last_error_kind(void) { return last_kind.c_str(); }

pg_status pg_bundle_from_json(const char* json_text, pg_bundle** out) {
  if (!out) return record(PG_ERR_NULL_ARGUMENT, "NullArgument", "out is NULL");
  *out = nullptr;
  if (!json_text) return record(PG_ERR_NULL_ARGUMENT, "NullArgument", "json_text is NULL");
  return guarded([&] {
    pg::json doc;
    try {
      doc = pg::json::parse(json_text);
    } catch (const pg::json::parse_error& e) {
      pg::fail(pg::ErrorKind::ParseError, e.what());
    }
    *out = new pg_bundle{pg::bundle_from_json(doc)};
    return PG_OK;
  });
}

void pg_bundle_free(pg_bundle* bundle) { delete bundle; }

int pg_bundle_rank(const pg_bundle* bundle) { return bundle ? bundle->spec.rank : 0; }

pg_status pg_bundle_degree(const pg_bundle* bundle, const int* prefix, size_t prefix_len, double* out) {
  if (!bundle || !out) return record(PG_ERR_NULL_ARGUMENT, "NullArgument", "bundle or out is NULL");
  return guarded([&] {
    pg::FlatSubbundleSpec sub;
    *out = pg::parabolic_degree(bundle->spec, optional_sub(bundle, prefix, prefix_len, sub));
    return PG_OK;
  });
}

pg_status pg_bundle_slope(const pg_bundle* bundle, const int* prefix, size_t prefix_len, double* out) {
  if (!bundle || !out) return record(PG_ERR_NULL_ARGUMENT, "NullArgument", "bundle or out is NULL");
  return guarded([&] {
    pg::FlatSubbundleSpec sub;
    *out = pg::slope(bundle->spec, optional_sub(bundle, prefix, prefix_len, sub));
    return PG_OK;
  });
}

pg_status pg_bundle_stability_json(const pg_bundle* bundle, char** out) {
  if (!bundle || !out) return record(PG_ERR_NULL_ARGUMENT, "NullArgument", "bundle or out is NULL");
  *out = nullptr;
  return guarded([&] {
    *out = copy_string(pg::verdict_to_json(bundle->spec, pg::stability_classify(bundle->spec)).dump());
    return PG_OK;
  });
}

void pg_string_free(char* s) { delete[] s; }

pg_status pg_scenario_load(const char* config_path, pg_scenario** out) {
  if (!out) return record(PG_ERR_NULL_ARGUMENT, "NullArgument", "out is NULL");
  *out = nullptr;
  if (!config_path) return record(PG_ERR_NULL_ARGUMENT, "NullArgument", "config_path is NULL");
  return guarded([&] {
    *out = new pg_scenario{pg::parse_config(config_path)};
    return PG_OK;
  });
}

pg_status pg_scenario_run(pg_scenario* scenario, const char* command, const char* out_dir, unsigned seed,
                          char** summary) {
  if (!scenario || !command || !summary)
    return record(PG_ERR_NULL_ARGUMENT, "NullArgument", "scenario, command or summary is NULL");
  *summary = nullptr;
  return guarded([&] {
    pg::RunContext ctx{out_dir ? out_dir : scenario->config.out_dir, seed};
    pg::CommandOutcome res = pg::run_command(pg::parse_command(command), scenario->config, ctx);
    *summary = copy_string(res.summary.dump());
    if (res.numerical_failure)
      return record(PG_ERR_NUMERICAL, "NonConvergence", "run finished without reaching its target");
    return PG_OK;
  });
}

void pg_scenario_free(pg_scenario* scenario) { delete scenario; }

}  // extern "C"
