#pragma once

#include "harmlens/metrics.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace harmlens::reporting {

// Everything the emitted artifacts are derived from. The two count tables
// share the same N; `pairs` is computed over the causal table.
struct ReportBundle {
    metrics::CountTable causal;
    metrics::CountTable overall;
    metrics::AllPairs pairs;
    int min_support = metrics::kDefaultMinSupport;
    int top_value_categories = metrics::kDefaultTopValueCategories;
    nlohmann::json run_metadata = nlohmann::json::object();
};

struct FileEntry {
    std::string path;  // relative to the output dir
    std::string sha256;
    std::size_t bytes = 0;
};

// Writes the four analysis tables under <dir>/tables in the requested
// formats ("csv", "json"). File contents are deterministic: stable ordering,
// fixed rounding, no timestamps.
std::vector<FileEntry> emit_tables(const ReportBundle& bundle, const std::filesystem::path& dir,
                                   const std::set<std::string>& formats);

// Writes the four self-contained SVG charts under <dir>/plots.
std::vector<FileEntry> emit_plots(const ReportBundle& bundle, const std::filesystem::path& dir);

// Manifest over all emitted files; the timestamp lives here and nowhere
// inside the artifacts.
nlohmann::json manifest_json(const ReportBundle& bundle, const std::vector<FileEntry>& files,
                             bool include_timestamp = true);

}  // namespace harmlens::reporting
