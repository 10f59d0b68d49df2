#pragma once
#include <string>

#include "levystab/stability_bounds.hpp"

namespace levystab {

// Exit codes reported by the experiment runner (and the CLI):
//   0 success, 2 no solution, 3 non-equivalence / integrability failure,
//   4 configuration error.
struct ExperimentResult {
    int exit_code = 0;
    std::string report;       // json or csv text, ready to write
    std::string format = "json";
};

// Runs the experiment described by the config.  Pure function of
// (config, seed): identical inputs give byte-identical reports.
ExperimentResult run_experiment(const nlohmann::json& config);

// --set key=value with dotted paths; value parsed as a JSON literal when
// possible, as a string otherwise
void apply_override(nlohmann::json& config, const std::string& key, const std::string& value);

// FNV-1a 64-bit hash of the canonical config serialization
std::string config_hash(const nlohmann::json& config);

} // namespace levystab
