#pragma once

// Runs one configured experiment and persists results.csv, estimates.jsonl,
// couplings.jsonl (coupling commands) and manifest.json into config.out_dir.

#include "ftl/config.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ftl {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kManifestSchema = "ftl.manifest/1";

/// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

struct OutputFile {
    std::string name;
    std::uint64_t bytes = 0;
    std::uint64_t fnv1a64 = 0;
};

struct RunManifest {
    std::string config_json;
    std::string started_at;
    std::string finished_at;
    std::string status; // complete | partial
    std::string error;
    std::vector<OutputFile> files;
};

/// Fixed results.csv header of a command.
std::string_view results_header(Command c);

/// Executes the experiment. On failure a partial manifest and a PARTIAL marker are
/// written before the exception propagates.
RunManifest run_experiment(const ExperimentConfig& config);

} // namespace ftl
