#pragma once

#include "harmlens/errors.hpp"
#include "harmlens/extraction.hpp"
#include "harmlens/metrics.hpp"
#include "harmlens/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

namespace harmlens::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kQuarantineExitCode = 30;

struct RunConfig {
    std::filesystem::path corpus_path;
    extraction::BackendConfig backend;
    std::optional<std::filesystem::path> grouping_rules_path;
    int min_support = metrics::kDefaultMinSupport;
    metrics::PairScope pair_scope = metrics::PairScope::Incident;
    int top_value_categories = metrics::kDefaultTopValueCategories;  // <=0: all
    std::set<std::string> table_formats = {"csv", "json"};
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    bool verbose = false;
    bool count_none_matches = true;  // None/None cells count as agreement
};

// Reads the JSON config document; absent fields keep their defaults.
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

// Stage output locations under the configured output dir.
std::filesystem::path extraction_export_path(const RunConfig& config);
std::filesystem::path filtered_export_path(const RunConfig& config);
std::filesystem::path metrics_dir(const RunConfig& config);

struct ExtractOptions {
    bool allow_quarantine = false;
    std::optional<int> dump_prompt_incident;
};

int cmd_extract(RunConfig config, const ExtractOptions& options);
int cmd_filter(const RunConfig& config);
int cmd_metrics(const RunConfig& config);
int cmd_validate(const RunConfig& config, const std::filesystem::path& gold_path);
int cmd_synth(const RunConfig& config, const synth::PlantSpec& spec);
int cmd_rubric_export();

// Exit code for a failed run: the error class ordinal.
int exit_code_for(const Error& error);

}  // namespace harmlens::cli
