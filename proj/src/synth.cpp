#include "harmlens/synth.hpp"

#include "harmlens/errors.hpp"
#include "harmlens/normalization.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace harmlens::synth {

namespace {

using extraction::ExtractionResult;
using extraction::HarmedSubject;
using extraction::MarkerRecord;
using extraction::MarkerType;
using metrics::ValueKey;
using rubric::Category;

// splitmix64: tiny, portable, identical everywhere. std::shuffle and the
// standard distributions are implementation-defined, which would break the
// byte-identical regeneration guarantee.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    int below(int n) { return n <= 0 ? 0 : static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[static_cast<size_t>(below(static_cast<int>(i)))]);
        }
    }
};

MarkerRecord causal_marker(const std::string& value) {
    MarkerRecord marker;
    marker.marker = value;
    marker.marker_type = MarkerType::Extracted;
    marker.source = "\"" + value + "\"";
    rubric::CounterfactualJudgment judgment;
    judgment.cq1_direct = true;
    judgment.cq2_alternate = false;
    judgment.reasoning = "the system keyed on this attribute";
    marker.judgment = judgment;
    marker.marker_harm = "Subjects identified as " + value + " were singled out by the system.";
    return marker;
}

ValueKey grouped_key(Category category, const std::string& raw) {
    const auto grouped =
        normalization::group_value(category, raw, normalization::default_rules());
    if (grouped.rule_applied == normalization::RuleApplied::Unmapped) {
        throw Error(Errc::BadConfig,
                    "planted marker \"" + raw + "\" does not map to a grouped value");
    }
    return ValueKey{category, grouped.grouped};
}

}  // namespace

SynthOutput synth_extraction(const PlantSpec& spec) {
    if (spec.n_incidents <= 0) throw Error(Errc::BadConfig, "n_incidents must be positive");

    // capacity/consistency checks and grouped-key derivation
    struct ResolvedPair {
        PlantedPair plant;
        ValueKey key_a;
        ValueKey key_b;
    };
    std::vector<ResolvedPair> resolved;
    std::set<Category> planted_categories;
    std::set<ValueKey> planted_keys;
    int capacity = 0;
    for (const auto& pair : spec.pairs) {
        if (pair.joint < 0 || pair.marginal_a < pair.joint || pair.marginal_b < pair.joint) {
            throw Error(Errc::BadConfig, "joint count exceeds a marginal");
        }
        if (pair.category_a == pair.category_b) {
            throw Error(Errc::BadConfig, "a planted pair needs two distinct categories");
        }
        ResolvedPair r{pair, grouped_key(pair.category_a, pair.marker_a),
                       grouped_key(pair.category_b, pair.marker_b)};
        for (const auto& key : {r.key_a, r.key_b}) {
            if (!planted_keys.insert(key).second) {
                throw Error(Errc::BadConfig, "grouped value \"" + key.value +
                                                 "\" is planted twice; blocks would entangle");
            }
        }
        planted_categories.insert(pair.category_a);
        planted_categories.insert(pair.category_b);
        capacity += pair.marginal_a + pair.marginal_b - pair.joint;
        resolved.push_back(std::move(r));
    }
    if (capacity > spec.n_incidents) {
        throw Error(Errc::BadConfig, "planted counts need " + std::to_string(capacity) +
                                         " incidents but only " +
                                         std::to_string(spec.n_incidents) + " requested");
    }

    // filler keeps unplanted incidents alive through the relevance filter
    Category filler_category = Category::HealthStatus;
    for (const auto& category : rubric::all_categories()) {
        if (!planted_categories.count(category) && category != Category::Age &&
            category != Category::Race && category != Category::Gender &&
            category != Category::Class) {
            filler_category = category;
            break;
        }
    }
    const std::string filler_value = "synthetic cohort";

    // random incident order, deterministic in the seed
    Rng rng(spec.seed * 0x9e3779b97f4a7c15ULL + 1);
    std::vector<int> slots(static_cast<size_t>(spec.n_incidents));
    for (int i = 0; i < spec.n_incidents; ++i) slots[static_cast<size_t>(i)] = i + 1;
    rng.shuffle(slots);

    struct IncidentPlan {
        std::vector<std::pair<Category, std::string>> markers;
    };
    std::vector<IncidentPlan> plans(static_cast<size_t>(spec.n_incidents));
    size_t cursor = 0;
    for (const auto& r : resolved) {
        for (int k = 0; k < r.plant.marginal_a + r.plant.marginal_b - r.plant.joint; ++k) {
            auto& plan = plans[cursor + static_cast<size_t>(k)];
            if (k < r.plant.joint) {
                plan.markers.emplace_back(r.plant.category_a, r.plant.marker_a);
                plan.markers.emplace_back(r.plant.category_b, r.plant.marker_b);
            } else if (k < r.plant.marginal_a) {
                plan.markers.emplace_back(r.plant.category_a, r.plant.marker_a);
            } else {
                plan.markers.emplace_back(r.plant.category_b, r.plant.marker_b);
            }
        }
        cursor += static_cast<size_t>(r.plant.marginal_a + r.plant.marginal_b - r.plant.joint);
    }
    for (auto& plan : plans) {
        if (plan.markers.empty()) plan.markers.emplace_back(filler_category, filler_value);
    }

    SynthOutput output;
    output.corpus.metadata = nlohmann::json{{"source", "synthetic"},
                                            {"seed", spec.seed},
                                            {"incidents", spec.n_incidents}};
    for (int i = 0; i < spec.n_incidents; ++i) {
        const int incident_id = slots[static_cast<size_t>(i)];
        const auto& plan = plans[static_cast<size_t>(i)];

        std::ostringstream body;
        body << "Synthetic incident " << incident_id << ". The system affected subjects marked by";
        for (const auto& [category, value] : plan.markers) {
            body << " " << rubric::category_name(category) << "=" << value << ";";
        }

        corpus::IncidentRecord incident;
        incident.incident_id = incident_id;
        incident.title = "Synthetic incident " + std::to_string(incident_id);
        incident.description = "Planted-count synthetic incident.";
        corpus::ReportRecord report;
        report.report_id = incident_id;
        report.incident_id = incident_id;
        report.title = incident.title;
        report.body = body.str();
        incident.reports.push_back(std::move(report));
        output.corpus.incidents.push_back(std::move(incident));

        ExtractionResult result;
        result.incident_id = incident_id;
        result.description = "A synthetic system was deployed and misbehaved.";
        result.model_name = "synthetic";
        result.rubric_version = rubric::rubric_definition().version;
        HarmedSubject subject;
        subject.subject_id = std::to_string(incident_id) + "-S1";
        subject.incident_id = incident_id;
        subject.report_ids = {incident_id};
        subject.name = "Synthetic cohort " + std::to_string(incident_id);
        subject.subject_type = rubric::SubjectType::GroupOfPersons;
        for (const auto& [category, value] : plan.markers) {
            subject.markers[static_cast<size_t>(category)] = causal_marker(value);
        }
        result.subjects.push_back(std::move(subject));
        result.raw_response_hash = std::string(64, '0');
        output.results.push_back(std::move(result));
    }
    std::sort(output.corpus.incidents.begin(), output.corpus.incidents.end(),
              [](const auto& a, const auto& b) { return a.incident_id < b.incident_id; });
    std::sort(output.results.begin(), output.results.end(),
              [](const auto& a, const auto& b) { return a.incident_id < b.incident_id; });

    // exact expected counts, assembled from the plant itself
    output.expected.mode = metrics::CountMode::Causal;
    output.expected.N = spec.n_incidents;
    int filler_count = 0;
    for (const auto& plan : plans) {
        if (plan.markers.size() == 1 && plan.markers[0].first == filler_category) ++filler_count;
    }
    const ValueKey filler_key = grouped_key(filler_category, filler_value);
    if (filler_count > 0) {
        output.expected.n_c[filler_category] = filler_count;
        output.expected.n_v[filler_key] = filler_count;
    }
    for (const auto& r : resolved) {
        output.expected.n_c[r.plant.category_a] += r.plant.marginal_a;
        output.expected.n_c[r.plant.category_b] += r.plant.marginal_b;
        output.expected.n_v[r.key_a] += r.plant.marginal_a;
        output.expected.n_v[r.key_b] += r.plant.marginal_b;
        if (r.plant.joint > 0) {
            const auto category_pair =
                r.plant.category_a < r.plant.category_b
                    ? metrics::CategoryPair{r.plant.category_a, r.plant.category_b}
                    : metrics::CategoryPair{r.plant.category_b, r.plant.category_a};
            output.expected.n_cc[category_pair] += r.plant.joint;
            const auto value_pair = r.key_a < r.key_b ? metrics::ValuePair{r.key_a, r.key_b}
                                                      : metrics::ValuePair{r.key_b, r.key_a};
            output.expected.n_vv[value_pair] += r.plant.joint;
        }
    }
    return output;
}

std::vector<ExtractionResult> random_extraction_set(std::uint64_t seed, int max_incidents) {
    Rng rng(seed * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL);

    static const std::vector<std::pair<Category, std::vector<std::string>>> kValuePools = {
        {Category::Gender, {"Female", "Male", "non-binary", "women", "boys"}},
        {Category::Age, {"teenager", "34", "8-year-old", "senior", "16-year-old", "young adults"}},
        {Category::Class, {"gig worker", "politician", "nurse", "small business owner", "wealthy"}},
        {Category::Race, {"Black", "White", "Asian", "people of color"}},
        {Category::Nationality, {"American", "German", "Indian", "Argentine"}},
        {Category::Geography, {"rural", "urban", "capital city"}},
        {Category::PoliticalIdentity, {"conservative", "progressive", "activist", "elite"}},
        {Category::Religion, {"Muslim", "Christian"}},
        {Category::Ability, {"disabled", "able-bodied"}},
    };

    const int n_incidents = 1 + rng.below(max_incidents);
    std::vector<ExtractionResult> results;
    for (int i = 0; i < n_incidents; ++i) {
        ExtractionResult result;
        result.incident_id = (i + 1) * 10 + rng.below(7);
        result.description = "A randomized system was deployed and misbehaved.";
        result.model_name = "synthetic";
        result.rubric_version = rubric::rubric_definition().version;
        result.raw_response_hash = std::string(64, 'f');

        const int n_subjects = 1 + rng.below(3);
        for (int s = 0; s < n_subjects; ++s) {
            HarmedSubject subject;
            subject.incident_id = result.incident_id;
            subject.subject_id =
                std::to_string(result.incident_id) + "-S" + std::to_string(s + 1);
            subject.report_ids = {result.incident_id};
            subject.name = "Random cohort " + std::to_string(result.incident_id) + "-" +
                           std::to_string(s + 1);
            subject.subject_type = rubric::SubjectType::GroupOfPersons;

            const int n_markers = rng.below(5);
            for (int m = 0; m < n_markers; ++m) {
                const auto& [category, pool] =
                    kValuePools[static_cast<size_t>(rng.below(static_cast<int>(kValuePools.size())))];
                const std::string& value = pool[static_cast<size_t>(
                    rng.below(static_cast<int>(pool.size())))];
                MarkerRecord marker;
                marker.marker = value;
                marker.marker_type = rng.below(2) == 0 ? MarkerType::Extracted : MarkerType::Inferred;
                marker.source = marker.marker_type == MarkerType::Extracted
                                    ? "\"" + value + "\""
                                    : "inferred from context mentioning " + value;
                rubric::CounterfactualJudgment judgment;
                judgment.cq1_direct = rng.below(2) == 0;
                judgment.cq2_alternate = rng.below(2) == 0;
                if (judgment.cq1_direct) judgment.reasoning = "the system reacted to " + value;
                marker.judgment = judgment;
                if (judgment.cq1_direct && !judgment.cq2_alternate) {
                    marker.marker_harm = "Subjects who were " + value + " were harmed.";
                }
                subject.markers[static_cast<size_t>(category)] = std::move(marker);
            }
            result.subjects.push_back(std::move(subject));
        }
        results.push_back(std::move(result));
    }
    return results;
}

nlohmann::json count_table_to_json(const metrics::CountTable& table) {
    nlohmann::json n_c = nlohmann::json::object();
    for (const auto& [category, count] : table.n_c) {
        n_c[rubric::category_name(category)] = count;
    }
    nlohmann::json n_v = nlohmann::json::array();
    for (const auto& [key, count] : table.n_v) {
        n_v.push_back(nlohmann::json{{"category", rubric::category_name(key.category)},
                                     {"value", key.value},
                                     {"count", count}});
    }
    nlohmann::json n_cc = nlohmann::json::array();
    for (const auto& [pair, count] : table.n_cc) {
        n_cc.push_back(nlohmann::json{{"category_a", rubric::category_name(pair.first)},
                                      {"category_b", rubric::category_name(pair.second)},
                                      {"count", count}});
    }
    nlohmann::json n_vv = nlohmann::json::array();
    for (const auto& [pair, count] : table.n_vv) {
        n_vv.push_back(nlohmann::json{{"category_a", rubric::category_name(pair.first.category)},
                                      {"value_a", pair.first.value},
                                      {"category_b", rubric::category_name(pair.second.category)},
                                      {"value_b", pair.second.value},
                                      {"count", count}});
    }
    return nlohmann::json{{"N", table.N},
                          {"mode", table.mode == metrics::CountMode::Causal ? "causal" : "overall"},
                          {"n_c", std::move(n_c)},
                          {"n_v", std::move(n_v)},
                          {"n_cc", std::move(n_cc)},
                          {"n_vv", std::move(n_vv)}};
}

}  // namespace harmlens::synth
