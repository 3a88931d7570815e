#pragma once

#include "udgen/latent_space.hpp"
#include "udgen/policy.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace udgen {

/// Lossless JSON form of a sampling tally, used to hand a run from the
/// sampling stage to the reporting stage.
nlohmann::json policy_run_json(const PolicyRun& run);
PolicyRun policy_run_from_json(const nlohmann::json& j);

/// Per-cell target vs. empirical frequency, TV distance, generated/original
/// split against R_a, fallback count. Without draws the empirical entries are
/// null and `tv_defined` is false.
nlohmann::json policy_report_json(const PolicyRun& run, const PatchSpace& space);
std::string policy_report_text(const PolicyRun& run, const PatchSpace& space);

/// Writes `<stem>.json` and `<stem>.txt` into `dir`.
void write_policy_report(const std::filesystem::path& dir, const std::string& stem, const PolicyRun& run,
                         const PatchSpace& space);

}  // namespace udgen
