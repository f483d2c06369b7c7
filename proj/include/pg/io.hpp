#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pg/analysis.hpp"
#include "pg/bundle.hpp"
#include "pg/flow.hpp"
#include "pg/model.hpp"
#include "pg/reference.hpp"

namespace pg {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Bundle document: {"rank", "punctures": {"zero": {"blocks": [...]}, "infinity": ...}, "weights": {...}}.
// Shape problems raise ValidationError listing every offending field.
FlatBundleSpec bundle_from_json(const json& doc);
json bundle_to_json(const FlatBundleSpec& bundle);
json subbundle_to_json(const FlatBundleSpec& bundle, const FlatSubbundleSpec& sub);
json verdict_to_json(const FlatBundleSpec& bundle, const StabilityVerdict& v);

json flow_report_to_json(const FlowReport& rep);
json continuation_to_json(const ContinuationResult& res);
json destabilizer_to_json(const DestabilizerCandidate& cand);
json degree_estimate_to_json(const DegreeEstimate& d);
json tameness_to_json(const TamenessReport& rep);
json decay_profile_to_json(const DecayProfile& p);

// Shortest round-trip decimal text.
std::string format_double(double v);

std::string scalar_field_csv(const ScalarField& f);
// Columns x, y, then (re, im) for each entry in row-major matrix order.
std::string matrix_field_csv(const MatrixField& f);
json matrix_field_sidecar(const MatrixField& f);
MatrixField read_matrix_field(const std::string& csv_path, const std::string& sidecar_path);

std::string monitors_csv(const std::vector<FlowMonitors>& series);
std::string continuation_csv(const ContinuationResult& res);
std::string sigma_table_csv(const DestabilizerCandidate& cand);
std::string decay_profile_csv(const DecayProfile& p);
std::string manufactured_csv(const std::vector<ManufacturedRow>& rows);

// Writes text, creating parent directories. Raises IoError.
void write_text(const std::string& path, const std::string& content);
// Adds schema_version to objects and writes with two-space indentation.
void write_json(const std::string& path, json doc);
json read_json_file(const std::string& path);

}  // namespace pg
