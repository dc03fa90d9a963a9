#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace harmlens::corpus {

struct ReportRecord {
    int report_id = 0;
    int incident_id = 0;
    std::string title;
    std::string body;  // full report text, preserved verbatim
    std::optional<std::string> source_url;
    std::optional<std::string> published_date;  // ISO-8601
};

struct IncidentRecord {
    int incident_id = 0;
    std::string title;
    std::string description;
    std::vector<ReportRecord> reports;  // never empty after load
};

struct Corpus {
    std::vector<IncidentRecord> incidents;  // input order preserved
    nlohmann::json metadata = nlohmann::json::object();
};

struct CorpusStats {
    size_t incident_count = 0;
    size_t report_count = 0;
    size_t min_reports = 0;
    size_t max_reports = 0;
    double mean_reports = 0.0;      // rounded to 2 decimals
    double multi_report_share = 0.0;
};

// Loads and validates the corpus JSON document. Throws FileNotFound,
// MalformedInput (with record context), DuplicateIncidentId or
// EmptyReportBody. Incidents with a report count outside 1..1000 produce a
// warning on stderr, not an error.
Corpus load_corpus(const std::filesystem::path& path);

// Same validation applied to an in-memory document.
Corpus corpus_from_json(const nlohmann::json& doc);

nlohmann::json corpus_to_json(const Corpus& corpus);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace harmlens::corpus
