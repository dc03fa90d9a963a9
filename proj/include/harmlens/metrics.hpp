#pragma once

#include "harmlens/normalization.hpp"
#include "harmlens/relevance.hpp"
#include "harmlens/rubric.hpp"

#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace harmlens::metrics {

enum class CountMode { Causal, Overall };
enum class PairScope { Incident, SameSubject };

struct ValueKey {
    rubric::Category category;
    std::string value;  // grouped value

    auto operator<=>(const ValueKey&) const = default;
};

using CategoryPair = std::pair<rubric::Category, rubric::Category>;  // first < second
using ValuePair = std::pair<ValueKey, ValueKey>;                     // first < second

// Incident-level indicator counts. Multiple qualifying subjects within one
// incident contribute exactly once to every count.
struct CountTable {
    CountMode mode = CountMode::Causal;
    PairScope pair_scope = PairScope::Incident;
    int N = 0;
    std::map<rubric::Category, int> n_c;
    std::map<ValueKey, int> n_v;
    std::map<CategoryPair, int> n_cc;
    std::map<ValuePair, int> n_vv;
};

struct AmplificationEdge {
    ValueKey value_a;
    ValueKey value_b;
    int observed = 0;
    double expected = 0.0;
    double score = 0.0;
    bool support_ok = false;
};

struct PairMatrixEntry {
    rubric::Category category_a;
    rubric::Category category_b;
    int count = 0;
    double share = 0.0;
};

struct AllPairs {
    std::vector<PairMatrixEntry> matrix;       // all unordered category pairs
    std::vector<AmplificationEdge> edges;      // score desc, then lexicographic
};

inline constexpr int kDefaultMinSupport = 5;
inline constexpr int kDefaultTopValueCategories = 6;

// Causal mode counts the filtered corpus. Overall mode counts pre-filter
// marker presence restricted to the retained incidents (the denominator
// stays N), which is what the causal/overall contrast plots consume; it
// requires `prefilter`. Unmapped grouped values are excluded from value
// counts and recorded in `log` when given.
CountTable build_count_table(const relevance::FilteredCorpus& corpus,
                             const normalization::GroupingRules& rules, CountMode mode,
                             PairScope scope = PairScope::Incident,
                             const std::vector<extraction::ExtractionResult>* prefilter = nullptr,
                             normalization::GroupingLog* log = nullptr);

double category_prevalence(const CountTable& table, rubric::Category c);
double value_prevalence(const CountTable& table, const ValueKey& v);

// n_{c1,c2} / N, symmetric in its arguments.
double intersectional_score(const CountTable& table, rubric::Category c1, rubric::Category c2);

// observed / expected with expected = n_v1 * n_v2 / N.
AmplificationEdge amplification_score(const CountTable& table, const ValueKey& v1,
                                      const ValueKey& v2, int min_support = kDefaultMinSupport);

// Full category-pair matrix plus the value-pair edge list. Value pairs are
// restricted to the `top_value_categories` most prevalent categories
// (<= 0 lifts the restriction).
AllPairs all_pairs(const CountTable& table, int min_support = kDefaultMinSupport,
                   int top_value_categories = kDefaultTopValueCategories);

}  // namespace harmlens::metrics
