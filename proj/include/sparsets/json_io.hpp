#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "sparsets/dantzig.hpp"
#include "sparsets/diagnostics.hpp"
#include "sparsets/harness.hpp"
#include "sparsets/procsim.hpp"
#include "sparsets/scorelab.hpp"
#include "sparsets/twostep.hpp"

// JSON views of the library types. Readers throw ConfigError on missing or
// malformed fields; non-finite numbers are written as null.
namespace sparsets::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json read_json_file(const std::string& path);
// Pretty-printed with a trailing newline.
void write_json_file(const Json& value, const std::string& path);
std::string dump(const Json& value);

// Spec files carry a "type" of inar, minar1, ou or hawkes. Matrices are
// arrays of rows; minar1/ou accept "a_block" plus "blocks" in place of
// "a_matrix", and a scalar "eta"/"sigma_diag" is broadcast.
procsim::InarSpec inar_spec_from_json(const Json& j);
procsim::Minar1Spec minar1_spec_from_json(const Json& j);
procsim::OuSpec ou_spec_from_json(const Json& j);
procsim::HawkesSpec hawkes_spec_from_json(const Json& j);

Json to_json(const procsim::InarSpec& spec);
Json to_json(const procsim::Minar1Spec& spec);
Json to_json(const procsim::OuSpec& spec);
Json to_json(const procsim::HawkesSpec& spec);

Json to_json(const scorelab::LinearScoreSystem& sys);
Json to_json(const scorelab::WeightedScoreSystem& sys);
Json to_json(const dantzig::DantzigFit& fit);
Json to_json(const dantzig::CvReport& report);
Json to_json(const twostep::NuisanceEstimate& nuisance);
Json to_json(const twostep::TwoStepFit& fit);
Json to_json(const diagnostics::FInftyEstimate& estimate);
Json to_json(const diagnostics::NormalityReport& report);

harness::LambdaMode lambda_mode_from_json(const Json& j);
Json to_json(const harness::LambdaMode& mode);

// Built-in cases take n, reps, base_seed, lambda, tau, centered, hist_bins;
// the ou case also p (multiple of 4) and delta. Custom cases need "model".
harness::CaseConfig case_config_from_json(const Json& j);
Json to_json(const harness::CaseConfig& config);
Json to_json(const harness::CaseReport& report);

harness::HawkesConfig hawkes_config_from_json(const Json& j);
Json to_json(const harness::HawkesConfig& config);
Json to_json(const harness::HawkesReport& report);

}  // namespace sparsets::io
