#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "nlsinv/pairing.hpp"
#include "nlsinv/recovery.hpp"

namespace nlsinv {

/// 17-significant-digit decimal rendering; round-trips float64 exactly.
std::string format_full(double v);

/// FNV-1a 64-bit digest of a file's bytes, as a hex string.
std::string file_digest(const std::string& path);

// --- nonlinearity specs ---------------------------------------------------
// {"type":"polynomial","terms":[{"a":1.0,"p":2}]}, {"type":"saturating","a":1.0},
// {"type":"zero"}; "a" is a number or an [re, im] pair.

struct NonlinearitySpec {
    std::string type = "zero";     // "polynomial" | "saturating" | "zero"
    std::vector<PowerTerm> terms;  // polynomial case
    Complex a = 1.0;               // saturating case
    std::string label;

    Nonlinearity build() const;
};

NonlinearitySpec nl_spec_from_json(const nlohmann::json& j);
nlohmann::json nl_spec_to_json(const NonlinearitySpec& spec);
NonlinearitySpec nl_spec_from_file(const std::string& path);

// --- tables and datasets ----------------------------------------------------

void write_htable_csv(const std::string& path, const HTable& t);
HTable read_htable_csv(const std::string& path);

void write_dataset_csv(const std::string& path, const MeasurementDataset& ds);
MeasurementDataset read_dataset_csv(const std::string& path);

void write_recovered_json(const std::string& path, const RecoveredH& rh);
RecoveredH read_recovered_json(const std::string& path);

// --- run manifests ----------------------------------------------------------

struct RunManifest {
    std::string command;
    nlohmann::json parameters;
    std::string code_version;
    nlohmann::json input_digests;   // path -> digest
    nlohmann::json output_digests;  // path -> digest
    double wall_time_s = 0.0;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const std::string& path, const RunManifest& m);

extern const char* const code_version;

}  // namespace nlsinv
