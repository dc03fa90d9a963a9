#include "harmlens/errors.hpp"
#include "harmlens/extraction.hpp"
#include "harmlens/hash.hpp"
#include "harmlens/normalization.hpp"
#include "harmlens/text_fold.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace harmlens::extraction {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using rubric::Category;

std::string strip_code_fence(const std::string& raw) {
    std::string s = text::trim(raw);
    if (s.rfind("```", 0) != 0) return s;
    const size_t first_newline = s.find('\n');
    if (first_newline == std::string::npos) return s;
    s.erase(0, first_newline + 1);
    const size_t closing = s.rfind("```");
    if (closing != std::string::npos) s.erase(closing);
    return text::trim(s);
}

std::optional<bool> parse_yes_no(const std::string& value) {
    const std::string v = text::to_lower(text::trim(value));
    if (v == "yes") return true;
    if (v == "no") return false;
    return std::nullopt;
}

std::optional<MarkerType> parse_marker_type(const std::string& value) {
    const std::string v = text::to_lower(text::trim(value));
    if (v == "extracted" || v == "explicit") return MarkerType::Extracted;
    if (v == "inferred") return MarkerType::Inferred;
    if (v == "none") return MarkerType::None;
    return std::nullopt;
}

bool is_not_mentioned(const std::string& value) {
    return text::to_lower(text::trim(value)) == "not mentioned";
}

// "None"/"N/A"/empty all mean absent for optional response fields.
bool is_absent_field(const json& node) {
    if (node.is_null()) return true;
    if (!node.is_string()) return false;
    const std::string v = text::to_lower(text::trim(node.get<std::string>()));
    return v.empty() || v == "none" || v == "n/a";
}

std::string string_or_empty(const ordered_json& obj, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_string()) return "";
    return obj.at(key).get<std::string>();
}

bool valid_subject_id(const std::string& subject_id, int incident_id) {
    const std::string prefix = std::to_string(incident_id) + "-S";
    if (subject_id.rfind(prefix, 0) != 0) return false;
    const std::string digits = subject_id.substr(prefix.size());
    if (digits.empty()) return false;
    bool nonzero = false;
    for (unsigned char c : digits) {
        if (!std::isdigit(c)) return false;
        if (c != '0') nonzero = true;
    }
    return nonzero;
}

std::set<int> parse_report_ids(const ordered_json& node, const std::string& field,
                               std::vector<Violation>& violations) {
    std::set<int> ids;
    auto take_one = [&](const json& v) {
        if (v.is_number_integer()) {
            ids.insert(v.get<int>());
            return;
        }
        if (v.is_string()) {
            try {
                ids.insert(std::stoi(v.get<std::string>()));
                return;
            } catch (...) {
            }
        }
        violations.push_back({ViolationKind::BadEnum, field, v.dump()});
    };
    if (node.is_array()) {
        for (const auto& v : node) take_one(v);
    } else if (!is_absent_field(node)) {
        take_one(node);
    }
    return ids;
}

MarkerRecord parse_marker_record(const ordered_json& node, const std::string& field,
                                 std::vector<Violation>& violations) {
    MarkerRecord record;
    if (!node.is_object()) {
        violations.push_back({ViolationKind::BadEnum, field, "category entry must be an object"});
        return record;
    }

    const std::string type_text = string_or_empty(node, "MarkerType");
    const auto type = parse_marker_type(type_text);
    if (!type) {
        violations.push_back({ViolationKind::BadEnum, field + ".MarkerType", type_text});
        return record;
    }
    record.marker_type = *type;

    const std::string marker_text = text::trim(string_or_empty(node, "Marker"));
    const std::string source_text =
        node.contains("Source") && !is_absent_field(node.at("Source"))
            ? text::trim(node.at("Source").get<std::string>())
            : "";
    const bool cq1_absent = !node.contains("DirectScore") || is_absent_field(node.at("DirectScore"));
    const bool cq2_absent =
        !node.contains("AlternateScore") || is_absent_field(node.at("AlternateScore"));
    const std::string harm_text = text::trim(string_or_empty(node, "MarkerHarm"));

    if (record.marker_type == MarkerType::None) {
        // None <=> Not mentioned <=> empty source <=> no judgment
        if (!marker_text.empty() && !is_not_mentioned(marker_text)) {
            violations.push_back({ViolationKind::BadEnum, field + ".Marker",
                                  marker_text + " (MarkerType None)"});
        }
        if (!source_text.empty()) {
            violations.push_back(
                {ViolationKind::BadEnum, field + ".Source", "non-empty for MarkerType None"});
        }
        if (!cq1_absent || !cq2_absent) {
            violations.push_back({ViolationKind::BadEnum, field + ".DirectScore",
                                  "judgment present for MarkerType None"});
        }
        if (!harm_text.empty()) {
            violations.push_back({ViolationKind::MarkerHarmWithoutCausalYes, field + ".MarkerHarm",
                                  "MarkerHarm on a None marker"});
        }
        record.marker = kNotMentioned;
        return record;
    }

    if (marker_text.empty() || is_not_mentioned(marker_text)) {
        violations.push_back({ViolationKind::BadEnum, field + ".Marker",
                              marker_text.empty() ? "(empty)" : marker_text});
    }
    record.marker = marker_text;

    if (source_text.empty()) {
        violations.push_back({ViolationKind::BadEnum, field + ".Source",
                              "empty for MarkerType " + std::string(marker_type_name(record.marker_type))});
    }
    record.source = source_text;

    rubric::CounterfactualJudgment judgment;
    const auto cq1 = cq1_absent ? std::nullopt : parse_yes_no(node.at("DirectScore").get<std::string>());
    const auto cq2 =
        cq2_absent ? std::nullopt : parse_yes_no(node.at("AlternateScore").get<std::string>());
    if (!cq1) {
        violations.push_back({ViolationKind::BadEnum, field + ".DirectScore",
                              cq1_absent ? "(missing)" : node.at("DirectScore").dump()});
    }
    if (!cq2) {
        violations.push_back({ViolationKind::BadEnum, field + ".AlternateScore",
                              cq2_absent ? "(missing)" : node.at("AlternateScore").dump()});
    }
    if (cq1 && cq2) {
        judgment.cq1_direct = *cq1;
        judgment.cq2_alternate = *cq2;
        judgment.reasoning = text::trim(string_or_empty(node, "Reasoning"));
        record.judgment = judgment;
    }

    if (!harm_text.empty()) {
        if (!(cq1 && cq2 && *cq1 && !*cq2)) {
            violations.push_back(
                {ViolationKind::MarkerHarmWithoutCausalYes, field + ".MarkerHarm", harm_text});
        } else {
            record.marker_harm = harm_text;
        }
    }
    return record;
}

HarmedSubject parse_subject(const ordered_json& node, int incident_id, const std::string& field,
                            std::vector<Violation>& violations) {
    HarmedSubject subject;
    subject.incident_id = incident_id;

    subject.subject_id = string_or_empty(node, "SubjectID");
    if (!valid_subject_id(subject.subject_id, incident_id)) {
        violations.push_back({ViolationKind::BadSubjectId, field + ".SubjectID", subject.subject_id});
    }

    subject.name = text::trim(string_or_empty(node, "Name"));
    if (subject.name.empty()) {
        violations.push_back({ViolationKind::BadEnum, field + ".Name", "(empty)"});
    }

    const std::string type_text = string_or_empty(node, "Type");
    const auto type = rubric::parse_subject_type(type_text);
    if (!type) {
        violations.push_back({ViolationKind::BadEnum, field + ".Type", type_text});
    } else {
        subject.subject_type = *type;
    }

    if (node.contains("ReportID")) {
        subject.report_ids = parse_report_ids(node.at("ReportID"), field + ".ReportID", violations);
    }

    if (!node.contains("Categories") || !node.at("Categories").is_object()) {
        for (const auto& info : rubric::rubric_definition().categories) {
            violations.push_back({ViolationKind::MissingCategory, field + ".Categories", info.name});
        }
        return subject;
    }

    const auto& categories = node.at("Categories");
    std::array<bool, rubric::kCategoryCount> seen{};
    for (auto it = categories.begin(); it != categories.end(); ++it) {
        const auto category = rubric::parse_category(it.key());
        if (!category) {
            violations.push_back({ViolationKind::BadEnum, field + ".Categories", it.key()});
            continue;
        }
        const size_t idx = static_cast<size_t>(*category);
        if (seen[idx]) {
            violations.push_back({ViolationKind::BadEnum, field + ".Categories",
                                  "duplicate entry for " + rubric::category_name(*category)});
            continue;
        }
        seen[idx] = true;
        subject.markers[idx] = parse_marker_record(
            it.value(), field + ".Categories." + rubric::category_name(*category), violations);
    }
    for (int i = 0; i < rubric::kCategoryCount; ++i) {
        if (!seen[static_cast<size_t>(i)]) {
            violations.push_back({ViolationKind::MissingCategory, field + ".Categories",
                                  rubric::category_name(static_cast<Category>(i))});
        }
    }
    return subject;
}

}  // namespace

const char* marker_type_name(MarkerType type) {
    switch (type) {
        case MarkerType::Extracted: return "Extracted";
        case MarkerType::Inferred: return "Inferred";
        case MarkerType::None: return "None";
    }
    return "None";
}

ExtractionResult parse_extraction(const std::string& raw, int incident_id) {
    std::vector<Violation> violations;
    ordered_json doc;
    try {
        doc = ordered_json::parse(strip_code_fence(raw));
    } catch (const json::parse_error& e) {
        violations.push_back({ViolationKind::NotJson, "", e.what()});
        throw ParseFailure(incident_id, std::move(violations));
    }
    if (!doc.is_object()) {
        violations.push_back({ViolationKind::NotJson, "", "top level is not a JSON object"});
        throw ParseFailure(incident_id, std::move(violations));
    }

    ExtractionResult result;
    result.incident_id = incident_id;
    result.description = string_or_empty(doc, "Description");
    result.rubric_version = rubric::rubric_definition().version;
    result.raw_response_hash = sha256_hex(raw);

    if (doc.contains("AI_Subjects")) {
        const auto& subjects = doc.at("AI_Subjects");
        if (!subjects.is_object()) {
            violations.push_back({ViolationKind::NotJson, "AI_Subjects", "must be an object"});
        } else {
            for (auto it = subjects.begin(); it != subjects.end(); ++it) {
                result.subjects.push_back(
                    parse_subject(it.value(), incident_id, it.key(), violations));
            }
        }
    }

    if (!violations.empty()) throw ParseFailure(incident_id, std::move(violations));
    return result;
}

namespace {

int marker_rank(MarkerType type) {
    switch (type) {
        case MarkerType::Extracted: return 2;
        case MarkerType::Inferred: return 1;
        case MarkerType::None: return 0;
    }
    return 0;
}

bool grouped_category(Category c) {
    return c == Category::Race || c == Category::Gender || c == Category::Class ||
           c == Category::Age;
}

// Marker values count as the same when they fold equal, one contains the
// other, or (for the grouped categories) both land in the same analysis
// bucket. The prompt's own merge example treats "Young" and "Teenage" as
// the same marker; only the bucket route captures that.
bool values_compatible(Category category, const std::string& a, const std::string& b) {
    if (text::names_equivalent(a, b)) return true;
    if (!grouped_category(category)) return false;
    const auto& rules = normalization::default_rules();
    const auto ga = normalization::group_value(category, a, rules);
    const auto gb = normalization::group_value(category, b, rules);
    return ga.rule_applied != normalization::RuleApplied::Unmapped &&
           gb.rule_applied != normalization::RuleApplied::Unmapped && ga.grouped == gb.grouped;
}

bool markers_conflict(const HarmedSubject& a, const HarmedSubject& b) {
    for (int i = 0; i < rubric::kCategoryCount; ++i) {
        const auto& ma = a.markers[static_cast<size_t>(i)];
        const auto& mb = b.markers[static_cast<size_t>(i)];
        if (ma.is_none() || mb.is_none()) continue;
        if (!values_compatible(static_cast<Category>(i), ma.marker, mb.marker)) return true;
    }
    return false;
}

int shared_marker_count(const HarmedSubject& a, const HarmedSubject& b) {
    int shared = 0;
    for (int i = 0; i < rubric::kCategoryCount; ++i) {
        const auto& ma = a.markers[static_cast<size_t>(i)];
        const auto& mb = b.markers[static_cast<size_t>(i)];
        if (ma.is_none() || mb.is_none()) continue;
        if (values_compatible(static_cast<Category>(i), ma.marker, mb.marker)) ++shared;
    }
    return shared;
}

bool can_merge(const HarmedSubject& a, const HarmedSubject& b) {
    if (a.subject_type != b.subject_type) {
        if (text::names_equivalent(a.name, b.name)) {
            std::cerr << "note: incident " << a.incident_id << ": not merging \"" << a.name
                      << "\" and \"" << b.name << "\" (subject_type conflict)\n";
        }
        return false;
    }
    if (markers_conflict(a, b)) return false;
    if (text::names_equivalent(a.name, b.name)) return true;
    // Descriptor-named groups also merge on overlapping identity context;
    // named individuals never do (distinct people share markers all the time).
    if (a.subject_type == rubric::SubjectType::Individual) return false;
    return shared_marker_count(a, b) >= 2;
}

void fold_into(HarmedSubject& dst, const HarmedSubject& src) {
    if (src.name.size() > dst.name.size()) dst.name = src.name;
    dst.report_ids.insert(src.report_ids.begin(), src.report_ids.end());
    for (int i = 0; i < rubric::kCategoryCount; ++i) {
        auto& md = dst.markers[static_cast<size_t>(i)];
        const auto& ms = src.markers[static_cast<size_t>(i)];
        if (marker_rank(ms.marker_type) > marker_rank(md.marker_type)) md = ms;
    }
}

void merge_incident(ExtractionResult& result) {
    auto& subjects = result.subjects;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < subjects.size() && !changed; ++i) {
            for (size_t j = i + 1; j < subjects.size() && !changed; ++j) {
                if (can_merge(subjects[i], subjects[j])) {
                    fold_into(subjects[i], subjects[j]);
                    subjects.erase(subjects.begin() + static_cast<std::ptrdiff_t>(j));
                    changed = true;
                }
            }
        }
    }
    for (size_t i = 0; i < subjects.size(); ++i) {
        subjects[i].subject_id =
            std::to_string(result.incident_id) + "-S" + std::to_string(i + 1);
    }
}

}  // namespace

std::vector<ExtractionResult> merge_subjects(std::vector<ExtractionResult> results) {
    for (auto& result : results) merge_incident(result);
    return results;
}

nlohmann::json result_to_json(const ExtractionResult& result) {
    json subjects = json::array();
    for (const auto& subject : result.subjects) {
        json markers = json::object();
        for (int i = 0; i < rubric::kCategoryCount; ++i) {
            const auto& m = subject.markers[static_cast<size_t>(i)];
            json node = {{"marker", m.marker}, {"marker_type", marker_type_name(m.marker_type)}};
            if (!m.is_none()) {
                node["source"] = m.source;
                node["cq1"] = m.judgment && m.judgment->cq1_direct ? "Yes" : "No";
                node["cq2"] = m.judgment && m.judgment->cq2_alternate ? "Yes" : "No";
                node["reasoning"] = m.judgment ? m.judgment->reasoning : "";
                node["marker_harm"] = m.marker_harm;
            }
            markers[rubric::category_name(static_cast<rubric::Category>(i))] = std::move(node);
        }
        subjects.push_back(json{{"subject_id", subject.subject_id},
                                {"incident_id", subject.incident_id},
                                {"report_ids", subject.report_ids},
                                {"name", subject.name},
                                {"subject_type", rubric::subject_type_name(subject.subject_type)},
                                {"markers", std::move(markers)}});
    }
    return json{{"incident_id", result.incident_id},
                {"description", result.description},
                {"subjects", std::move(subjects)},
                {"raw_response_hash", result.raw_response_hash},
                {"model_name", result.model_name},
                {"rubric_version", result.rubric_version},
                {"chunk_count", result.chunk_count}};
}

ExtractionResult result_from_json(const nlohmann::json& doc) {
    auto fail = [](const std::string& what) -> Error {
        return Error(Errc::MalformedInput, "extraction record: " + what);
    };
    ExtractionResult result;
    try {
        result.incident_id = doc.at("incident_id").get<int>();
        result.description = doc.value("description", "");
        result.raw_response_hash = doc.value("raw_response_hash", "");
        result.model_name = doc.value("model_name", "");
        result.rubric_version = doc.value("rubric_version", "");
        result.chunk_count = doc.value("chunk_count", 1);
        for (const auto& snode : doc.at("subjects")) {
            HarmedSubject subject;
            subject.subject_id = snode.at("subject_id").get<std::string>();
            subject.incident_id = snode.at("incident_id").get<int>();
            for (const auto& rid : snode.at("report_ids")) subject.report_ids.insert(rid.get<int>());
            subject.name = snode.at("name").get<std::string>();
            const auto type = rubric::parse_subject_type(snode.at("subject_type").get<std::string>());
            if (!type) throw fail("bad subject_type");
            subject.subject_type = *type;
            const auto& markers = snode.at("markers");
            for (int i = 0; i < rubric::kCategoryCount; ++i) {
                const auto category = static_cast<rubric::Category>(i);
                const auto& key = rubric::category_name(category);
                if (!markers.contains(key)) throw fail("missing marker for " + key);
                const auto& mnode = markers.at(key);
                MarkerRecord record;
                record.marker = mnode.at("marker").get<std::string>();
                const auto mtype = parse_marker_type(mnode.at("marker_type").get<std::string>());
                if (!mtype) throw fail("bad marker_type for " + key);
                record.marker_type = *mtype;
                if (!record.is_none()) {
                    record.source = mnode.value("source", "");
                    rubric::CounterfactualJudgment judgment;
                    const auto cq1 = parse_yes_no(mnode.at("cq1").get<std::string>());
                    const auto cq2 = parse_yes_no(mnode.at("cq2").get<std::string>());
                    if (!cq1 || !cq2) throw fail("bad judgment for " + key);
                    judgment.cq1_direct = *cq1;
                    judgment.cq2_alternate = *cq2;
                    judgment.reasoning = mnode.value("reasoning", "");
                    record.judgment = judgment;
                    record.marker_harm = mnode.value("marker_harm", "");
                }
                subject.markers[static_cast<size_t>(i)] = std::move(record);
            }
            result.subjects.push_back(std::move(subject));
        }
    } catch (const json::exception& e) {
        throw fail(e.what());
    }
    return result;
}

void write_results_jsonl(const std::filesystem::path& path,
                         const std::vector<ExtractionResult>& results) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    for (const auto& result : results) {
        out << result_to_json(result).dump() << "\n";
    }
    if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

std::vector<ExtractionResult> read_results_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::MissingExtraction, "cannot open " + path.string());
    std::vector<ExtractionResult> results;
    std::string line;
    size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (text::trim(line).empty()) continue;
        try {
            results.push_back(result_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw Error(Errc::MalformedInput,
                        path.string() + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    return results;
}

}  // namespace harmlens::extraction
