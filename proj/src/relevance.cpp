#include "harmlens/relevance.hpp"

namespace harmlens::relevance {

using extraction::ExtractionResult;
using extraction::HarmedSubject;
using extraction::MarkerRecord;

FilteredCorpus filter_relevant(const std::vector<ExtractionResult>& results) {
    FilteredCorpus filtered;
    for (const auto& incident : results) {
        ExtractionResult kept = incident;
        kept.subjects.clear();
        for (const auto& subject : incident.subjects) {
            HarmedSubject retained = subject;
            int relevant = 0;
            for (auto& marker : retained.markers) {
                if (marker.is_none()) continue;
                if (marker.causally_relevant()) {
                    ++relevant;
                } else {
                    marker = MarkerRecord{};  // reset to the None sentinel
                    ++filtered.dropped_markers;
                }
            }
            if (relevant > 0) {
                kept.subjects.push_back(std::move(retained));
            } else {
                ++filtered.dropped_subjects;
            }
        }
        if (!kept.subjects.empty()) {
            filtered.incidents.push_back(std::move(kept));
        } else {
            ++filtered.dropped_incidents;
        }
    }
    filtered.N = static_cast<int>(filtered.incidents.size());
    return filtered;
}

std::map<std::string, CategoryDropStats> relevance_report(
    const std::vector<ExtractionResult>& before, const FilteredCorpus& after) {
    std::map<std::string, CategoryDropStats> report;
    for (const auto& category : rubric::all_categories()) {
        report[rubric::category_name(category)] = CategoryDropStats{};
    }
    for (const auto& incident : before) {
        for (const auto& subject : incident.subjects) {
            for (int i = 0; i < rubric::kCategoryCount; ++i) {
                if (!subject.markers[static_cast<size_t>(i)].is_none()) {
                    report[rubric::category_name(static_cast<rubric::Category>(i))].overall += 1;
                }
            }
        }
    }
    for (const auto& incident : after.incidents) {
        for (const auto& subject : incident.subjects) {
            for (int i = 0; i < rubric::kCategoryCount; ++i) {
                if (!subject.markers[static_cast<size_t>(i)].is_none()) {
                    report[rubric::category_name(static_cast<rubric::Category>(i))].causal += 1;
                }
            }
        }
    }
    return report;
}

nlohmann::json summary_to_json(const FilteredCorpus& filtered,
                               const std::map<std::string, CategoryDropStats>& report) {
    nlohmann::json categories = nlohmann::json::object();
    for (const auto& [name, stats] : report) {
        categories[name] = {{"overall", stats.overall}, {"causal", stats.causal}};
    }
    return nlohmann::json{{"N", filtered.N},
                          {"retained_subjects", filtered.subject_count()},
                          {"dropped_markers", filtered.dropped_markers},
                          {"dropped_subjects", filtered.dropped_subjects},
                          {"dropped_incidents", filtered.dropped_incidents},
                          {"per_category_markers", std::move(categories)}};
}

}  // namespace harmlens::relevance
