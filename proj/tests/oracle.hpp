#pragma once

// Brute-force recount oracle for the incident-level statistics. Written as
// naive full scans on purpose: it shares only the grouping rules with the
// production path, never its counting code.

#include "harmlens/metrics.hpp"
#include "harmlens/normalization.hpp"
#include "harmlens/relevance.hpp"

#include <string>
#include <vector>

namespace oracle {

using harmlens::metrics::ValueKey;
using harmlens::rubric::Category;

inline bool incident_has_category(const harmlens::extraction::ExtractionResult& incident,
                                  Category category) {
    for (const auto& subject : incident.subjects) {
        if (!subject.markers[static_cast<size_t>(category)].is_none()) return true;
    }
    return false;
}

inline bool incident_has_value(const harmlens::extraction::ExtractionResult& incident,
                               const ValueKey& key,
                               const harmlens::normalization::GroupingRules& rules) {
    for (const auto& subject : incident.subjects) {
        const auto& marker = subject.markers[static_cast<size_t>(key.category)];
        if (marker.is_none()) continue;
        const auto grouped = harmlens::normalization::group_value(key.category, marker.marker, rules);
        if (grouped.rule_applied != harmlens::normalization::RuleApplied::Unmapped &&
            grouped.grouped == key.value) {
            return true;
        }
    }
    return false;
}

inline bool subject_has_value(const harmlens::extraction::HarmedSubject& subject,
                              const ValueKey& key,
                              const harmlens::normalization::GroupingRules& rules) {
    const auto& marker = subject.markers[static_cast<size_t>(key.category)];
    if (marker.is_none()) return false;
    const auto grouped = harmlens::normalization::group_value(key.category, marker.marker, rules);
    return grouped.rule_applied != harmlens::normalization::RuleApplied::Unmapped &&
           grouped.grouped == key.value;
}

inline int count_category(const harmlens::relevance::FilteredCorpus& corpus, Category category) {
    int count = 0;
    for (const auto& incident : corpus.incidents) {
        if (incident_has_category(incident, category)) ++count;
    }
    return count;
}

inline int count_value(const harmlens::relevance::FilteredCorpus& corpus, const ValueKey& key,
                       const harmlens::normalization::GroupingRules& rules) {
    int count = 0;
    for (const auto& incident : corpus.incidents) {
        if (incident_has_value(incident, key, rules)) ++count;
    }
    return count;
}

inline int count_category_pair(const harmlens::relevance::FilteredCorpus& corpus, Category a,
                               Category b, harmlens::metrics::PairScope scope) {
    int count = 0;
    for (const auto& incident : corpus.incidents) {
        bool hit = false;
        if (scope == harmlens::metrics::PairScope::Incident) {
            hit = incident_has_category(incident, a) && incident_has_category(incident, b);
        } else {
            for (const auto& subject : incident.subjects) {
                if (!subject.markers[static_cast<size_t>(a)].is_none() &&
                    !subject.markers[static_cast<size_t>(b)].is_none()) {
                    hit = true;
                }
            }
        }
        if (hit) ++count;
    }
    return count;
}

inline int count_value_pair(const harmlens::relevance::FilteredCorpus& corpus, const ValueKey& a,
                            const ValueKey& b, harmlens::metrics::PairScope scope,
                            const harmlens::normalization::GroupingRules& rules) {
    int count = 0;
    for (const auto& incident : corpus.incidents) {
        bool hit = false;
        if (scope == harmlens::metrics::PairScope::Incident) {
            hit = incident_has_value(incident, a, rules) && incident_has_value(incident, b, rules);
        } else {
            for (const auto& subject : incident.subjects) {
                if (subject_has_value(subject, a, rules) && subject_has_value(subject, b, rules)) {
                    hit = true;
                }
            }
        }
        if (hit) ++count;
    }
    return count;
}

// Every distinct grouped value observed anywhere in the corpus.
inline std::vector<ValueKey> all_values(const harmlens::relevance::FilteredCorpus& corpus,
                                        const harmlens::normalization::GroupingRules& rules) {
    std::vector<ValueKey> values;
    for (const auto& incident : corpus.incidents) {
        for (const auto& subject : incident.subjects) {
            for (int c = 0; c < harmlens::rubric::kCategoryCount; ++c) {
                const auto& marker = subject.markers[static_cast<size_t>(c)];
                if (marker.is_none()) continue;
                const auto category = static_cast<Category>(c);
                const auto grouped =
                    harmlens::normalization::group_value(category, marker.marker, rules);
                if (grouped.rule_applied == harmlens::normalization::RuleApplied::Unmapped) continue;
                ValueKey key{category, grouped.grouped};
                bool seen = false;
                for (const auto& existing : values) {
                    if (existing == key) seen = true;
                }
                if (!seen) values.push_back(key);
            }
        }
    }
    return values;
}

// Exact rational: num/den with integer cross-multiplied comparison.
struct Rational {
    long long num = 0;
    long long den = 1;

    bool equals(const Rational& other) const { return num * other.den == other.num * den; }
    double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

}  // namespace oracle
