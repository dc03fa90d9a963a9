#include "harmlens/corpus.hpp"

#include "harmlens/errors.hpp"
#include "harmlens/text_fold.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

namespace harmlens::corpus {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& context, const std::string& what) {
    throw Error(Errc::MalformedInput, context + ": " + what);
}

int require_int(const json& obj, const char* key, const std::string& context) {
    if (!obj.contains(key)) malformed(context, std::string("missing \"") + key + "\"");
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) malformed(context, std::string("\"") + key + "\" must be an integer");
    return v.get<int>();
}

std::string require_string(const json& obj, const char* key, const std::string& context) {
    if (!obj.contains(key)) malformed(context, std::string("missing \"") + key + "\"");
    const auto& v = obj.at(key);
    if (!v.is_string()) malformed(context, std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           const std::string& context) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    if (!obj.at(key).is_string()) malformed(context, std::string("\"") + key + "\" must be a string or null");
    return obj.at(key).get<std::string>();
}

bool looks_like_iso_date(const std::string& s) {
    // YYYY-MM-DD, optionally followed by a time designator.
    if (s.size() < 10) return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(s[static_cast<size_t>(i)]))) return false;
    }
    if (s[4] != '-' || s[7] != '-') return false;
    return s.size() == 10 || s[10] == 'T' || s[10] == ' ';
}

ReportRecord parse_report(const json& node, int expected_incident_id, const std::string& context) {
    if (!node.is_object()) malformed(context, "report must be an object");
    ReportRecord report;
    report.report_id = require_int(node, "report_id", context);
    report.incident_id = require_int(node, "incident_id", context);
    report.title = require_string(node, "title", context);
    report.body = require_string(node, "body", context);
    report.source_url = optional_string(node, "source_url", context);
    report.published_date = optional_string(node, "published_date", context);

    if (report.incident_id != expected_incident_id) {
        malformed(context, "incident_id " + std::to_string(report.incident_id) +
                               " does not match enclosing incident " +
                               std::to_string(expected_incident_id));
    }
    if (text::trim(report.body).empty()) {
        throw Error(Errc::EmptyReportBody,
                    context + ": report " + std::to_string(report.report_id) + " has an empty body");
    }
    if (report.published_date && !looks_like_iso_date(*report.published_date)) {
        malformed(context, "published_date \"" + *report.published_date + "\" is not ISO-8601");
    }
    return report;
}

}  // namespace

Corpus corpus_from_json(const json& doc) {
    if (!doc.is_object()) malformed("document", "top level must be an object");
    if (!doc.contains("incidents") || !doc.at("incidents").is_array()) {
        malformed("document", "missing \"incidents\" array");
    }

    Corpus corpus;
    if (doc.contains("metadata")) {
        if (!doc.at("metadata").is_object()) malformed("document", "\"metadata\" must be an object");
        corpus.metadata = doc.at("metadata");
    }

    std::unordered_set<int> incident_ids;
    std::unordered_set<int> report_ids;
    size_t incident_index = 0;
    for (const auto& node : doc.at("incidents")) {
        std::string context = "incidents[" + std::to_string(incident_index) + "]";
        if (!node.is_object()) malformed(context, "incident must be an object");

        IncidentRecord incident;
        incident.incident_id = require_int(node, "incident_id", context);
        incident.title = require_string(node, "title", context);
        incident.description = require_string(node, "description", context);

        if (!incident_ids.insert(incident.incident_id).second) {
            throw Error(Errc::DuplicateIncidentId,
                        context + ": incident_id " + std::to_string(incident.incident_id) +
                            " appears more than once");
        }
        if (!node.contains("reports") || !node.at("reports").is_array()) {
            malformed(context, "missing \"reports\" array");
        }

        size_t report_index = 0;
        for (const auto& report_node : node.at("reports")) {
            std::string report_context = context + ".reports[" + std::to_string(report_index) + "]";
            ReportRecord report = parse_report(report_node, incident.incident_id, report_context);
            if (!report_ids.insert(report.report_id).second) {
                malformed(report_context,
                          "report_id " + std::to_string(report.report_id) + " appears more than once");
            }
            incident.reports.push_back(std::move(report));
            ++report_index;
        }
        if (incident.reports.empty()) {
            malformed(context, "incident " + std::to_string(incident.incident_id) + " has no reports");
        }
        if (incident.reports.size() > 1000) {
            std::cerr << "warning: incident " << incident.incident_id << " has "
                      << incident.reports.size() << " reports (expected 1..1000)\n";
        }
        corpus.incidents.push_back(std::move(incident));
        ++incident_index;
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        throw Error(Errc::FileNotFound, "corpus file not found: " + path.string());
    }
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw Error(Errc::FileNotFound, "cannot open corpus file: " + path.string());
    }
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::parse_error& e) {
        throw Error(Errc::MalformedInput, path.string() + ": " + e.what());
    }
    return corpus_from_json(doc);
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
    json doc;
    doc["metadata"] = corpus.metadata;
    json incidents = json::array();
    for (const auto& incident : corpus.incidents) {
        json reports = json::array();
        for (const auto& report : incident.reports) {
            json r = {
                {"report_id", report.report_id},
                {"incident_id", report.incident_id},
                {"title", report.title},
                {"body", report.body},
                {"source_url", report.source_url ? json(*report.source_url) : json(nullptr)},
                {"published_date",
                 report.published_date ? json(*report.published_date) : json(nullptr)},
            };
            reports.push_back(std::move(r));
        }
        incidents.push_back(json{{"incident_id", incident.incident_id},
                                 {"title", incident.title},
                                 {"description", incident.description},
                                 {"reports", std::move(reports)}});
    }
    doc["incidents"] = std::move(incidents);
    return doc;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.incident_count = corpus.incidents.size();
    if (corpus.incidents.empty()) return stats;

    size_t multi = 0;
    stats.min_reports = corpus.incidents.front().reports.size();
    for (const auto& incident : corpus.incidents) {
        const size_t n = incident.reports.size();
        stats.report_count += n;
        stats.min_reports = std::min(stats.min_reports, n);
        stats.max_reports = std::max(stats.max_reports, n);
        if (n > 1) ++multi;
    }
    const double mean = static_cast<double>(stats.report_count) /
                        static_cast<double>(stats.incident_count);
    stats.mean_reports = std::round(mean * 100.0) / 100.0;
    stats.multi_report_share =
        std::round(static_cast<double>(multi) / static_cast<double>(stats.incident_count) * 100.0) /
        100.0;
    return stats;
}

}  // namespace harmlens::corpus
