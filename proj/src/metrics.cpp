#include "harmlens/metrics.hpp"

#include "harmlens/errors.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace harmlens::metrics {

namespace {

using extraction::ExtractionResult;
using extraction::HarmedSubject;
using rubric::Category;

struct IncidentSets {
    std::set<Category> categories;
    std::set<ValueKey> values;
    std::vector<std::set<Category>> per_subject_categories;
    std::vector<std::set<ValueKey>> per_subject_values;
};

IncidentSets collect_incident(const ExtractionResult& incident,
                              const normalization::GroupingRules& rules,
                              normalization::GroupingLog* log) {
    IncidentSets sets;
    for (const auto& subject : incident.subjects) {
        std::set<Category> subject_categories;
        std::set<ValueKey> subject_values;
        for (int i = 0; i < rubric::kCategoryCount; ++i) {
            const auto& marker = subject.markers[static_cast<size_t>(i)];
            if (marker.is_none()) continue;
            const auto category = static_cast<Category>(i);
            subject_categories.insert(category);
            const auto grouped = normalization::group_value(category, marker.marker, rules);
            if (log != nullptr) log->record(grouped);
            if (grouped.rule_applied != normalization::RuleApplied::Unmapped) {
                subject_values.insert(ValueKey{category, grouped.grouped});
            }
        }
        sets.categories.insert(subject_categories.begin(), subject_categories.end());
        sets.values.insert(subject_values.begin(), subject_values.end());
        sets.per_subject_categories.push_back(std::move(subject_categories));
        sets.per_subject_values.push_back(std::move(subject_values));
    }
    return sets;
}

template <typename T>
std::set<std::pair<T, T>> unordered_pairs(const std::set<T>& items) {
    std::set<std::pair<T, T>> pairs;
    for (auto a = items.begin(); a != items.end(); ++a) {
        for (auto b = std::next(a); b != items.end(); ++b) {
            pairs.emplace(*a, *b);
        }
    }
    return pairs;
}

std::set<ValuePair> cross_category_pairs(const std::set<ValueKey>& values) {
    std::set<ValuePair> pairs;
    for (auto a = values.begin(); a != values.end(); ++a) {
        for (auto b = std::next(a); b != values.end(); ++b) {
            if (a->category != b->category) pairs.emplace(*a, *b);
        }
    }
    return pairs;
}

void require_nonempty(const CountTable& table) {
    if (table.N == 0) throw Error(Errc::EmptyCorpus, "metric undefined over an empty corpus (N=0)");
}

int lookup(const std::map<ValueKey, int>& m, const ValueKey& k) {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
}

}  // namespace

CountTable build_count_table(const relevance::FilteredCorpus& corpus,
                             const normalization::GroupingRules& rules, CountMode mode,
                             PairScope scope,
                             const std::vector<extraction::ExtractionResult>* prefilter,
                             normalization::GroupingLog* log) {
    CountTable table;
    table.mode = mode;
    table.pair_scope = scope;
    table.N = corpus.N;

    // Overall mode reads marker presence from the pre-filter results of the
    // retained incidents, so every count stays bounded by N.
    std::unordered_map<int, const ExtractionResult*> prefilter_by_id;
    if (mode == CountMode::Overall) {
        if (prefilter == nullptr) {
            throw Error(Errc::BadConfig, "Overall counting requires the pre-filter extraction set");
        }
        for (const auto& result : *prefilter) prefilter_by_id[result.incident_id] = &result;
    }

    for (const auto& incident : corpus.incidents) {
        const ExtractionResult* source = &incident;
        if (mode == CountMode::Overall) {
            auto it = prefilter_by_id.find(incident.incident_id);
            if (it == prefilter_by_id.end()) {
                throw Error(Errc::BadConfig, "pre-filter set is missing incident " +
                                                 std::to_string(incident.incident_id));
            }
            source = it->second;
        }
        const IncidentSets sets = collect_incident(*source, rules, log);

        for (const auto& category : sets.categories) table.n_c[category] += 1;
        for (const auto& value : sets.values) table.n_v[value] += 1;

        std::set<CategoryPair> category_pairs;
        std::set<ValuePair> value_pairs;
        if (scope == PairScope::Incident) {
            category_pairs = unordered_pairs(sets.categories);
            value_pairs = cross_category_pairs(sets.values);
        } else {
            for (const auto& subject_categories : sets.per_subject_categories) {
                auto pairs = unordered_pairs(subject_categories);
                category_pairs.insert(pairs.begin(), pairs.end());
            }
            for (const auto& subject_values : sets.per_subject_values) {
                auto pairs = cross_category_pairs(subject_values);
                value_pairs.insert(pairs.begin(), pairs.end());
            }
        }
        for (const auto& pair : category_pairs) table.n_cc[pair] += 1;
        for (const auto& pair : value_pairs) table.n_vv[pair] += 1;
    }
    return table;
}

double category_prevalence(const CountTable& table, rubric::Category c) {
    require_nonempty(table);
    auto it = table.n_c.find(c);
    const int count = it == table.n_c.end() ? 0 : it->second;
    return static_cast<double>(count) / static_cast<double>(table.N);
}

double value_prevalence(const CountTable& table, const ValueKey& v) {
    require_nonempty(table);
    return static_cast<double>(lookup(table.n_v, v)) / static_cast<double>(table.N);
}

double intersectional_score(const CountTable& table, rubric::Category c1, rubric::Category c2) {
    if (c1 == c2) {
        throw Error(Errc::SameCategory,
                    "intersectional score needs two distinct categories, got " +
                        rubric::category_name(c1) + " twice");
    }
    require_nonempty(table);
    const CategoryPair key = c1 < c2 ? CategoryPair{c1, c2} : CategoryPair{c2, c1};
    auto it = table.n_cc.find(key);
    const int count = it == table.n_cc.end() ? 0 : it->second;
    return static_cast<double>(count) / static_cast<double>(table.N);
}

AmplificationEdge amplification_score(const CountTable& table, const ValueKey& v1,
                                      const ValueKey& v2, int min_support) {
    if (v1.category == v2.category) {
        throw Error(Errc::SameCategory, "amplification needs values from distinct categories");
    }
    require_nonempty(table);
    const int n1 = lookup(table.n_v, v1);
    const int n2 = lookup(table.n_v, v2);
    if (n1 == 0 || n2 == 0) {
        throw Error(Errc::ZeroMarginal, "marginal count is zero for \"" +
                                            (n1 == 0 ? v1.value : v2.value) +
                                            "\"; expected count undefined");
    }
    AmplificationEdge edge;
    edge.value_a = std::min(v1, v2);
    edge.value_b = std::max(v1, v2);
    const ValuePair key{edge.value_a, edge.value_b};
    auto it = table.n_vv.find(key);
    edge.observed = it == table.n_vv.end() ? 0 : it->second;
    edge.expected = static_cast<double>(n1) * static_cast<double>(n2) /
                    static_cast<double>(table.N);
    edge.score = static_cast<double>(edge.observed) / edge.expected;
    edge.support_ok = edge.observed >= min_support;
    return edge;
}

AllPairs all_pairs(const CountTable& table, int min_support, int top_value_categories) {
    AllPairs out;
    require_nonempty(table);

    for (int i = 0; i < rubric::kCategoryCount; ++i) {
        for (int j = i + 1; j < rubric::kCategoryCount; ++j) {
            const CategoryPair key{static_cast<Category>(i), static_cast<Category>(j)};
            auto it = table.n_cc.find(key);
            PairMatrixEntry entry;
            entry.category_a = key.first;
            entry.category_b = key.second;
            entry.count = it == table.n_cc.end() ? 0 : it->second;
            entry.share = static_cast<double>(entry.count) / static_cast<double>(table.N);
            out.matrix.push_back(entry);
        }
    }

    // value universe: the most prevalent categories, by count then list order
    std::set<Category> allowed;
    if (top_value_categories > 0) {
        std::vector<std::pair<int, Category>> ranked;
        for (const auto& [category, count] : table.n_c) ranked.emplace_back(count, category);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (size_t i = 0; i < ranked.size() && i < static_cast<size_t>(top_value_categories);
             ++i) {
            allowed.insert(ranked[i].second);
        }
    }

    for (const auto& [pair, observed] : table.n_vv) {
        (void)observed;
        if (top_value_categories > 0 &&
            (!allowed.count(pair.first.category) || !allowed.count(pair.second.category))) {
            continue;
        }
        out.edges.push_back(amplification_score(table, pair.first, pair.second, min_support));
    }
    std::sort(out.edges.begin(), out.edges.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.value_a != b.value_a) return a.value_a < b.value_a;
        return a.value_b < b.value_b;
    });
    return out;
}

}  // namespace harmlens::metrics
