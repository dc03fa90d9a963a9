#pragma once

#include "harmlens/extraction.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace harmlens::relevance {

// Analysis dataset after counterfactual filtering. Retained subjects keep
// their full 26-entry marker array; markers that failed the test are reset
// to the None sentinel.
struct FilteredCorpus {
    std::vector<extraction::ExtractionResult> incidents;  // ordered as input
    int dropped_markers = 0;
    int dropped_subjects = 0;
    int dropped_incidents = 0;
    int N = 0;  // retained incident count; denominator for every metric

    int subject_count() const {
        int count = 0;
        for (const auto& incident : incidents) count += static_cast<int>(incident.subjects.size());
        return count;
    }
};

// A marker survives iff cq1_direct == Yes and cq2_alternate == No. Subjects
// with no surviving marker are removed, then incidents with no surviving
// subject.
FilteredCorpus filter_relevant(const std::vector<extraction::ExtractionResult>& results);

struct CategoryDropStats {
    int overall = 0;  // markers present before filtering
    int causal = 0;   // markers retained as causally relevant
};

// Per-category marker counts before vs after filtering.
std::map<std::string, CategoryDropStats> relevance_report(
    const std::vector<extraction::ExtractionResult>& before, const FilteredCorpus& after);

nlohmann::json summary_to_json(const FilteredCorpus& filtered,
                               const std::map<std::string, CategoryDropStats>& report);

}  // namespace harmlens::relevance
