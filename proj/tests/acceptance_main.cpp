// Acceptance suite: one criterion per section, one [PASS]/[FAIL] line each.
// Exits non-zero if any criterion fails.

#include "harmlens/agreement.hpp"
#include "harmlens/cli.hpp"
#include "harmlens/corpus.hpp"
#include "harmlens/errors.hpp"
#include "harmlens/extraction.hpp"
#include "harmlens/metrics.hpp"
#include "harmlens/normalization.hpp"
#include "harmlens/prompt.hpp"
#include "harmlens/relevance.hpp"
#include "harmlens/reporting.hpp"
#include "harmlens/synth.hpp"

#include "oracle.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

using namespace harmlens;
using metrics::CountMode;
using metrics::PairScope;
using metrics::ValueKey;
using rubric::Category;

namespace {

const std::filesystem::path kSourceDir(HARMLENS_SOURCE_DIR);

int g_failed_criteria = 0;

struct CheckFailure {
    std::string message;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure{message};
}

template <typename T>
void require_eq(const T& actual, const T& expected, const std::string& what) {
    if (!(actual == expected)) {
        std::ostringstream oss;
        oss << what << ": got " << actual << ", expected " << expected;
        throw CheckFailure{oss.str()};
    }
}

void run_criterion(int number, const std::string& name, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
        body();
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        std::cout << "[PASS] criterion " << number << ": " << name << " (" << ms << " ms)\n";
    } catch (const CheckFailure& failure) {
        ++g_failed_criteria;
        std::cout << "[FAIL] criterion " << number << ": " << name << "\n        "
                  << failure.message << "\n";
    } catch (const std::exception& error) {
        ++g_failed_criteria;
        std::cout << "[FAIL] criterion " << number << ": " << name
                  << "\n        unexpected: " << error.what() << "\n";
    }
}

void require_runtime_below(const std::chrono::steady_clock::time_point& start, long limit_ms,
                           const std::string& what) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    require(ms < limit_ms,
            what + " took " + std::to_string(ms) + " ms (limit " + std::to_string(limit_ms) + ")");
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    require(file.good(), "cannot read " + path.string());
    std::stringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

// --- criterion 1: metric-oracle equivalence ------------------------------------

void criterion_oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    const auto& rules = normalization::default_rules();
    const std::uint64_t first_seed = 1;
    const std::uint64_t last_seed = 200;
    int corpora_checked = 0;

    for (std::uint64_t seed = first_seed; seed <= last_seed; ++seed) {
        const auto results = synth::random_extraction_set(seed, 50);
        const auto corpus = relevance::filter_relevant(results);
        if (corpus.N == 0) continue;
        ++corpora_checked;

        const auto table = metrics::build_count_table(corpus, rules, CountMode::Causal);
        const std::string tag = " (seed " + std::to_string(seed) + ")";
        require_eq(table.N, corpus.N, "N" + tag);

        // Eq. 1: per-category incident counts and prevalence ratios
        for (const auto& category : rubric::all_categories()) {
            const int expected = oracle::count_category(corpus, category);
            const auto it = table.n_c.find(category);
            const int actual = it == table.n_c.end() ? 0 : it->second;
            require_eq(actual, expected, "n_c[" + rubric::category_name(category) + "]" + tag);
            require(metrics::category_prevalence(table, category) ==
                        static_cast<double>(expected) / static_cast<double>(corpus.N),
                    "prevalence ratio mismatch" + tag);
        }
        // Eq. 2: per-value incident counts
        const auto values = oracle::all_values(corpus, rules);
        require_eq(values.size(), table.n_v.size(), "distinct value count" + tag);
        for (const auto& value : values) {
            const int expected = oracle::count_value(corpus, value, rules);
            require_eq(table.n_v.at(value), expected, "n_v[" + value.value + "]" + tag);
            require(metrics::value_prevalence(table, value) ==
                        static_cast<double>(expected) / static_cast<double>(corpus.N),
                    "value prevalence ratio mismatch" + tag);
        }
        // Eq. 3: every category pair, symmetric
        for (int a = 0; a < rubric::kCategoryCount; ++a) {
            for (int b = a + 1; b < rubric::kCategoryCount; ++b) {
                const auto ca = static_cast<Category>(a);
                const auto cb = static_cast<Category>(b);
                const int expected =
                    oracle::count_category_pair(corpus, ca, cb, PairScope::Incident);
                const auto it = table.n_cc.find({ca, cb});
                require_eq(it == table.n_cc.end() ? 0 : it->second, expected,
                           "n_cc pair count" + tag);
                const double score = metrics::intersectional_score(table, ca, cb);
                require(score == static_cast<double>(expected) / static_cast<double>(corpus.N),
                        "intersectional ratio mismatch" + tag);
                require(score == metrics::intersectional_score(table, cb, ca),
                        "intersectional symmetry" + tag);
            }
        }
        // Eqs. 4-5: joint counts plus exact rational score comparison
        for (const auto& [pair, observed] : table.n_vv) {
            const int oracle_joint = oracle::count_value_pair(corpus, pair.first, pair.second,
                                                              PairScope::Incident, rules);
            require_eq(observed, oracle_joint, "n_vv joint count" + tag);
            const int n1 = table.n_v.at(pair.first);
            const int n2 = table.n_v.at(pair.second);
            const auto edge = metrics::amplification_score(table, pair.first, pair.second, 1);
            require(edge.expected == static_cast<double>(n1) * static_cast<double>(n2) /
                                         static_cast<double>(corpus.N),
                    "expected-count formula" + tag);
            require(edge.score == static_cast<double>(observed) / edge.expected,
                    "score formula" + tag);

            const int oracle_n1 = oracle::count_value(corpus, pair.first, rules);
            const int oracle_n2 = oracle::count_value(corpus, pair.second, rules);
            const oracle::Rational oracle_score{
                static_cast<long long>(oracle_joint) * corpus.N,
                static_cast<long long>(oracle_n1) * oracle_n2};
            const oracle::Rational impl_score{static_cast<long long>(edge.observed) * table.N,
                                              static_cast<long long>(n1) * n2};
            require(impl_score.equals(oracle_score), "amplification rational mismatch" + tag);
        }
    }
    require(corpora_checked >= 150,
            "too few non-empty corpora: " + std::to_string(corpora_checked));
    std::cout << "        seeds " << first_seed << ".." << last_seed << ", " << corpora_checked
              << " non-empty corpora\n";
    require_runtime_below(start, 10000, "oracle equivalence");
}

// --- criterion 2: planted pair counts reproduce the reference shares -------------

void criterion_planted_pairs() {
    const auto start = std::chrono::steady_clock::now();
    synth::PlantSpec spec;
    spec.n_incidents = 711;
    spec.seed = 20250901;
    spec.pairs.push_back({Category::Nationality, "American", 120, Category::PoliticalIdentity,
                          "voters", 150, 83});
    spec.pairs.push_back(
        {Category::Class, "gig worker", 60, Category::Race, "people of color", 70, 40});
    spec.pairs.push_back({Category::Gender, "women", 80, Category::Race, "White", 50, 39});

    const auto output = synth::synth_extraction(spec);
    const auto corpus = relevance::filter_relevant(output.results);
    require_eq(corpus.N, 711, "N after filtering");
    const auto table =
        metrics::build_count_table(corpus, normalization::default_rules(), CountMode::Causal);

    require_eq(table.n_cc.at({Category::Nationality, Category::PoliticalIdentity}), 83,
               "planted 83 pair");
    const double score_83 =
        metrics::intersectional_score(table, Category::Nationality, Category::PoliticalIdentity);
    require(std::abs(score_83 - 0.1167) <= 0.0005,
            "83/711 -> " + std::to_string(score_83) + ", want 0.1167 within 1-decimal-percent");

    const double score_40 = metrics::intersectional_score(table, Category::Class, Category::Race);
    require(std::abs(score_40 * 100.0 - 5.6) <= 0.05,
            "40/711 -> " + std::to_string(score_40 * 100.0) + "%, want 5.6%");
    const double score_39 = metrics::intersectional_score(table, Category::Gender, Category::Race);
    require(std::abs(score_39 * 100.0 - 5.5) <= 0.05,
            "39/711 -> " + std::to_string(score_39 * 100.0) + "%, want 5.5%");
    require_runtime_below(start, 1000, "planted pair reproduction");
}

// --- criterion 3: amplification formula checks ----------------------------------

void criterion_amplification() {
    {
        synth::PlantSpec spec;
        spec.n_incidents = 100;
        spec.seed = 31;
        spec.pairs.push_back(
            {Category::Gender, "Female", 10, Category::Class, "gig worker", 20, 4});
        const auto table = metrics::build_count_table(
            relevance::filter_relevant(synth::synth_extraction(spec).results),
            normalization::default_rules(), CountMode::Causal);
        const auto edge = metrics::amplification_score(
            table, ValueKey{Category::Gender, "Female"}, ValueKey{Category::Class, "Lower"}, 1);
        require(edge.expected == 2.0, "expected count must be exactly 2.0");
        require(edge.score == 2.0, "planted score must be exactly 2.000");
        require(edge.score * edge.expected == static_cast<double>(edge.observed),
                "score times expected must reproduce the observed count");
    }
    {
        synth::PlantSpec spec;  // observed equals n1*n2/N: independence baseline
        spec.n_incidents = 100;
        spec.seed = 32;
        spec.pairs.push_back({Category::Gender, "Male", 10, Category::Class, "politician", 20, 2});
        const auto table = metrics::build_count_table(
            relevance::filter_relevant(synth::synth_extraction(spec).results),
            normalization::default_rules(), CountMode::Causal);
        const auto edge = metrics::amplification_score(
            table, ValueKey{Category::Gender, "Male"}, ValueKey{Category::Class, "Upper"}, 1);
        require(edge.score == 1.0, "independent plant must score exactly 1.000");
    }
    {
        // reference causal prevalences: elite 13.2%, upper 7.5%, N=711
        const int n_elite = static_cast<int>(std::lround(0.132 * 711));  // 94
        const int n_upper = static_cast<int>(std::lround(0.075 * 711));  // 53
        const double expected = static_cast<double>(n_elite) * n_upper / 711.0;
        const int observed = static_cast<int>(std::lround(2.85 * expected));

        synth::PlantSpec spec;
        spec.n_incidents = 711;
        spec.seed = 33;
        spec.pairs.push_back({Category::PoliticalIdentity, "elite", n_elite, Category::Class,
                              "politician", n_upper, observed});
        const auto table = metrics::build_count_table(
            relevance::filter_relevant(synth::synth_extraction(spec).results),
            normalization::default_rules(), CountMode::Causal);
        const auto edge =
            metrics::amplification_score(table, ValueKey{Category::PoliticalIdentity, "elite"},
                                         ValueKey{Category::Class, "Upper"}, 1);
        require(std::abs(edge.score - 2.85) <= 0.05,
                "reconstructed elite/upper score " + std::to_string(edge.score) +
                    ", want 2.85 within 0.05");
    }
}

// --- criterion 4: agreement formulas --------------------------------------------

agreement::LabelVector binary_vector(std::uint64_t seed, size_t n, int bias) {
    agreement::LabelVector v;
    std::uint64_t state = seed;
    auto next = [&state] {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        return z ^ (z >> 31);
    };
    for (size_t i = 0; i < n; ++i) {
        v.items.emplace_back("i" + std::to_string(i),
                             next() % static_cast<std::uint64_t>(bias) == 0 ? "Yes" : "No");
    }
    return v;
}

void criterion_agreement() {
    auto make_pair_vectors = [](int n, int disagreements) {
        agreement::LabelVector a;
        agreement::LabelVector b;
        for (int i = 0; i < n; ++i) {
            a.items.emplace_back("i" + std::to_string(i), "Yes");
            b.items.emplace_back("i" + std::to_string(i), i < disagreements ? "No" : "Yes");
        }
        return std::make_pair(a, b);
    };

    {
        const auto [a, b] = make_pair_vectors(50, 4);  // p_o = 0.92
        const auto stats = agreement::pabak(a, b);
        require(std::abs(stats.p_o - 0.92) < 1e-12, "p_o must be 0.92");
        require(*stats.pabak == 2.0 * stats.p_o - 1.0, "PABAK formula identity (exact)");
        require(std::abs(*stats.pabak - 0.84) < 1e-12, "PABAK(0.92) must be 0.84");
    }
    {
        const auto [a, b] = make_pair_vectors(50, 6);  // p_o = 0.88
        const auto stats = agreement::pabak(a, b);
        require(*stats.pabak == 2.0 * stats.p_o - 1.0, "PABAK formula identity (exact)");
        require(std::abs(*stats.pabak - 0.76) < 1e-12, "PABAK(0.88) must be 0.76");
    }
    {
        // 2x2 table a=45, b=5, c=5, d=45 over 100 items
        agreement::LabelVector a;
        agreement::LabelVector b;
        int item = 0;
        auto add = [&](int count, const char* la, const char* lb) {
            for (int i = 0; i < count; ++i, ++item) {
                a.items.emplace_back("i" + std::to_string(item), la);
                b.items.emplace_back("i" + std::to_string(item), lb);
            }
        };
        add(45, "Yes", "Yes");
        add(5, "Yes", "No");
        add(5, "No", "Yes");
        add(45, "No", "No");
        const auto stats = agreement::cohen_kappa(a, b);
        require(std::abs(stats.p_o - 0.90) < 1e-12, "p_o must be 0.90");
        require(std::abs(stats.p_e - 0.50) < 1e-12, "p_e must be 0.50");
        require(stats.kappa.has_value(), "kappa defined on the 45/5/5/45 table");
        require(std::abs(*stats.kappa - 0.80) <= 1e-12,
                "kappa " + std::to_string(*stats.kappa) + ", want 0.80 within 1e-12");
    }
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const size_t n = 2 + seed % 37;
        const auto a = binary_vector(seed * 3 + 1, n, 2);
        const auto b = binary_vector(seed * 7 + 5, n, 3);
        require(agreement::percent_agreement(a, b) == agreement::percent_agreement(b, a),
                "percent agreement symmetry, seed " + std::to_string(seed));
        const auto ab = agreement::pabak(a, b);
        const auto ba = agreement::pabak(b, a);
        require(*ab.pabak == *ba.pabak, "PABAK symmetry, seed " + std::to_string(seed));
        require(*ab.pabak == 2.0 * ab.p_o - 1.0, "PABAK identity, seed " + std::to_string(seed));
        const auto kab = agreement::cohen_kappa(a, b);
        const auto kba = agreement::cohen_kappa(b, a);
        require(std::abs(kab.p_e - kba.p_e) < 1e-15, "p_e symmetry, seed " + std::to_string(seed));
        require(kab.kappa.has_value() == kba.kappa.has_value(),
                "kappa definedness symmetry, seed " + std::to_string(seed));
        if (kab.kappa) {
            require(std::abs(*kab.kappa - *kba.kappa) < 1e-12,
                    "kappa symmetry, seed " + std::to_string(seed));
        }
    }
}

// --- criterion 5: relevance semantics --------------------------------------------

void criterion_relevance() {
    {
        // worked example: gender {Yes,No} kept, nationality {No,Yes} dropped
        auto girls = test_support::typed_subject(
            188, 1, "Girls in the province",
            {{Category::Gender, test_support::typed_marker("girls", true, false)},
             {Category::Nationality, test_support::typed_marker("Argentine", false, true)}});
        const auto filtered =
            relevance::filter_relevant({test_support::typed_result(188, {girls})});
        require_eq(filtered.N, 1, "incident retained");
        require_eq(filtered.subject_count(), 1, "subject retained");
        const auto& subject = filtered.incidents.front().subjects.front();
        require(!subject.marker(Category::Gender).is_none(), "gender marker retained");
        require(subject.marker(Category::Nationality).is_none(), "nationality marker removed");
    }
    {
        // a {Yes,Yes} marker is always removed; cascade drops subject and incident
        auto subject = test_support::typed_subject(
            2, 1, "Someone", {{Category::Age, test_support::typed_marker("teen", true, true)}});
        const auto filtered =
            relevance::filter_relevant({test_support::typed_result(2, {subject})});
        require_eq(filtered.N, 0, "Yes/Yes marker cascades the incident away");
        require_eq(filtered.dropped_subjects, 1, "subject cascade");
        require_eq(filtered.dropped_incidents, 1, "incident cascade");
    }
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto results = synth::random_extraction_set(seed, 20);
        const auto once = relevance::filter_relevant(results);
        for (const auto& incident : once.incidents) {
            require(!incident.subjects.empty(), "no empty incidents survive");
            for (const auto& subject : incident.subjects) {
                int relevant = 0;
                for (const auto& marker : subject.markers) {
                    if (marker.is_none()) continue;
                    require(marker.judgment.has_value() && marker.judgment->cq1_direct &&
                                !marker.judgment->cq2_alternate,
                            "retained markers are cq1=Yes cq2=No, seed " + std::to_string(seed));
                    ++relevant;
                }
                require(relevant > 0, "no empty subjects survive");
            }
        }
        const auto twice = relevance::filter_relevant(once.incidents);
        require_eq(twice.N, once.N, "idempotence N, seed " + std::to_string(seed));
        require_eq(twice.dropped_markers, 0, "no markers dropped on refilter");
        require_eq(twice.dropped_subjects, 0, "no subjects dropped on refilter");
        require_eq(twice.dropped_incidents, 0, "no incidents dropped on refilter");
        require_eq(twice.incidents.size(), once.incidents.size(), "idempotence size");
        for (size_t i = 0; i < once.incidents.size(); ++i) {
            require(extraction::result_to_json(once.incidents[i]) ==
                        extraction::result_to_json(twice.incidents[i]),
                    "idempotence content, seed " + std::to_string(seed));
        }
    }
}

// --- criterion 6: end-to-end golden run ------------------------------------------

void criterion_golden_run() {
    const auto start = std::chrono::steady_clock::now();
    const auto base = std::filesystem::temp_directory_path() / "hl_acceptance_golden";
    std::filesystem::remove_all(base);

    auto run_pipeline = [&](const std::filesystem::path& out_dir) {
        cli::RunConfig config;
        config.corpus_path = kSourceDir / "fixtures" / "corpus5.json";
        config.backend.kind = extraction::BackendKind::Replay;
        config.backend.model_name = "fixture-replay";
        config.backend.cache_dir = kSourceDir / "fixtures" / "cache";
        config.backend.max_parallel = 2;
        config.min_support = 1;
        config.output_dir = out_dir;
        require_eq(cli::cmd_extract(config, {}), 0, "extract exit code");
        require_eq(cli::cmd_filter(config), 0, "filter exit code");
        require_eq(cli::cmd_metrics(config), 0, "metrics exit code");
    };
    run_pipeline(base / "run_a");
    run_pipeline(base / "run_b");

    const std::vector<std::string> compared = {
        "extract/extraction.jsonl",
        "filter/filtered.jsonl",
        "filter/relevance_summary.json",
        "metrics/normalization_report.json",
        "metrics/tables/category_prevalence.csv",
        "metrics/tables/category_prevalence.json",
        "metrics/tables/value_prevalence.csv",
        "metrics/tables/value_prevalence.json",
        "metrics/tables/category_pairs.csv",
        "metrics/tables/category_pairs.json",
        "metrics/tables/amplification_edges.csv",
        "metrics/tables/amplification_edges.json",
        "metrics/plots/category_prevalence.svg",
        "metrics/plots/value_prevalence.svg",
        "metrics/plots/category_pair_heatmap.svg",
        "metrics/plots/amplification_edges.svg",
    };
    for (const auto& relative : compared) {
        require(slurp(base / "run_a" / relative) == slurp(base / "run_b" / relative),
                relative + " differs between consecutive runs");
    }

    const auto normalization_report =
        nlohmann::json::parse(slurp(base / "run_a" / "metrics" / "normalization_report.json"));
    const auto& class_map = normalization_report.at("mapped").at("Class");
    require_eq(class_map.at("gig worker").get<std::string>(), std::string("Lower"),
               "gig worker grouping");
    require_eq(class_map.at("politician").get<std::string>(), std::string("Upper"),
               "politician grouping");
    require_eq(class_map.at("small business owner").get<std::string>(), std::string("Middle"),
               "small business owner grouping");

    // the filtered export carries the documented fixture counts
    const auto filtered =
        extraction::read_results_jsonl(base / "run_a" / "filter" / "filtered.jsonl");
    require_eq(filtered.size(), static_cast<size_t>(4), "retained incidents");
    size_t subjects = 0;
    for (const auto& result : filtered) subjects += result.subjects.size();
    require_eq(subjects, static_cast<size_t>(6), "retained subjects");

    require_runtime_below(start, 5000, "golden run");
}

// --- criterion 7: parser robustness -----------------------------------------------

void criterion_parser_robustness() {
    using test_support::categories_json;
    using test_support::marker_json;
    using test_support::response_json;
    using test_support::subject_json;

    struct Malformed {
        int incident_id;
        ViolationKind kind;
        std::string raw;
    };
    std::vector<Malformed> malformed;

    auto valid_subject = [&](int id) {
        return subject_json(id, 1, "Affected group " + std::to_string(id), "Group of persons",
                            categories_json({{"Ability",
                                              marker_json("disabled", "Extracted", "Yes", "No",
                                                          "The system rejected them.")}}));
    };

    // 4x NotJson
    malformed.push_back({1, ViolationKind::NotJson, "The incident involved several people."});
    malformed.push_back({2, ViolationKind::NotJson, "{\"IncidentID\": \"2\", \"AI_Subjects\": "});
    malformed.push_back({3, ViolationKind::NotJson, "```json\nnot even close\n```"});
    malformed.push_back({4, ViolationKind::NotJson, "[1, 2, 3]"});
    // 4x MissingCategory
    for (int id = 5; id <= 8; ++id) {
        auto subject = valid_subject(id);
        const char* victim =
            id == 5 ? "Caste" : id == 6 ? "Race" : id == 7 ? "Gender Identity" : "Specie";
        subject["Categories"].erase(victim);
        malformed.push_back({id, ViolationKind::MissingCategory, response_json(id, {subject})});
    }
    // 4x BadEnum
    {
        auto s9 = subject_json(9, 1, "Someone", "Cyborg", categories_json());
        malformed.push_back({9, ViolationKind::BadEnum, response_json(9, {s9})});
        auto s10 = valid_subject(10);
        s10["Categories"]["Ability"]["MarkerType"] = "Guessed";
        malformed.push_back({10, ViolationKind::BadEnum, response_json(10, {s10})});
        auto s11 = valid_subject(11);
        s11["Categories"]["Ability"]["DirectScore"] = "Maybe";
        malformed.push_back({11, ViolationKind::BadEnum, response_json(11, {s11})});
        auto s12 = valid_subject(12);
        s12["Categories"]["Religion"]["DirectScore"] = "Yes";  // judgment on a None marker
        malformed.push_back({12, ViolationKind::BadEnum, response_json(12, {s12})});
    }
    // 4x MarkerHarmWithoutCausalYes
    {
        auto make_harm_case = [&](int id, const char* cq1, const char* cq2) {
            auto subject = subject_json(
                id, 1, "Someone", "Individual",
                categories_json({{"Gender",
                                  marker_json("Woman", "Extracted", cq1, cq2,
                                              "A harm sentence that must not be here.")}}));
            return response_json(id, {subject});
        };
        malformed.push_back(
            {13, ViolationKind::MarkerHarmWithoutCausalYes, make_harm_case(13, "No", "Yes")});
        malformed.push_back(
            {14, ViolationKind::MarkerHarmWithoutCausalYes, make_harm_case(14, "Yes", "Yes")});
        malformed.push_back(
            {15, ViolationKind::MarkerHarmWithoutCausalYes, make_harm_case(15, "No", "No")});
        auto s16 = valid_subject(16);
        s16["Categories"]["Caste"]["MarkerHarm"] = "Harm on a None marker.";
        malformed.push_back(
            {16, ViolationKind::MarkerHarmWithoutCausalYes, response_json(16, {s16})});
    }
    // 4x BadSubjectId
    {
        auto make_id_case = [&](int id, const std::string& subject_id) {
            auto subject = valid_subject(id);
            subject["SubjectID"] = subject_id;
            return response_json(id, {subject});
        };
        malformed.push_back({17, ViolationKind::BadSubjectId, make_id_case(17, "99-S1")});
        malformed.push_back({18, ViolationKind::BadSubjectId, make_id_case(18, "S1")});
        malformed.push_back({19, ViolationKind::BadSubjectId, make_id_case(19, "19-X1")});
        malformed.push_back({20, ViolationKind::BadSubjectId, make_id_case(20, "20-S0")});
    }
    require_eq(malformed.size(), static_cast<size_t>(20), "malformed fixture count");

    // 25 single-report incidents; 21..25 get valid responses
    corpus::Corpus corpus;
    for (int id = 1; id <= 25; ++id) {
        corpus::IncidentRecord incident;
        incident.incident_id = id;
        incident.title = "Synthetic incident " + std::to_string(id);
        incident.description = "Robustness fixture.";
        corpus::ReportRecord report;
        report.report_id = id;
        report.incident_id = id;
        report.title = incident.title;
        report.body = "A system affected a group of disabled people.";
        incident.reports.push_back(report);
        corpus.incidents.push_back(incident);
    }

    extraction::BackendConfig config;
    config.kind = extraction::BackendKind::Replay;
    config.model_name = "robustness";
    const auto workdir = std::filesystem::temp_directory_path() / "hl_acceptance_robustness";
    std::filesystem::remove_all(workdir);
    config.cache_dir = workdir / "cache";
    config.quarantine_dir = workdir / "quarantine";
    config.max_parallel = 4;

    const auto& rubric_def = rubric::rubric_definition();
    const auto cache_dir = config.cache_dir / config.model_name / rubric_def.version;
    std::filesystem::create_directories(cache_dir);
    auto write_cache = [&](int incident_id, const std::string& raw) {
        const auto request = prompt::build_prompt(
            corpus.incidents[static_cast<size_t>(incident_id - 1)], rubric_def);
        const nlohmann::json entry = {
            {"incident_id", incident_id},
            {"model", config.model_name},
            {"rubric_version", rubric_def.version},
            {"temperature", 0.0},
            {"chunks", nlohmann::json::array({{{"chunk_index", 0},
                                               {"prompt_hash", request.prompt_hash},
                                               {"raw_response", raw},
                                               {"attempts", 1}}})},
        };
        std::ofstream out(cache_dir / (std::to_string(incident_id) + ".json"), std::ios::trunc);
        out << entry.dump(1);
    };
    for (const auto& bad : malformed) write_cache(bad.incident_id, bad.raw);
    for (int id = 21; id <= 25; ++id) write_cache(id, response_json(id, {valid_subject(id)}));

    const auto run = extraction::run_extraction(corpus, config);

    require_eq(run.results.size(), static_cast<size_t>(5), "healthy incidents survive");
    for (size_t i = 0; i < run.results.size(); ++i) {
        require_eq(run.results[i].incident_id, 21 + static_cast<int>(i),
                   "surviving incident ids");
        require_eq(run.results[i].subjects.size(), static_cast<size_t>(1),
                   "surviving subject counts");
    }
    require_eq(run.quarantined.size(), static_cast<size_t>(20), "quarantined incident count");
    for (const auto& bad : malformed) {
        const auto it =
            std::find_if(run.quarantined.begin(), run.quarantined.end(),
                         [&](const extraction::QuarantineRecord& record) {
                             return record.incident_id == bad.incident_id;
                         });
        require(it != run.quarantined.end(),
                "incident " + std::to_string(bad.incident_id) + " was not quarantined");
        require(it->reason.find(violation_kind_name(bad.kind)) != std::string::npos,
                "incident " + std::to_string(bad.incident_id) + " reason \"" + it->reason +
                    "\" lacks " + violation_kind_name(bad.kind));
        require(std::filesystem::exists(config.quarantine_dir /
                                        (std::to_string(bad.incident_id) + ".txt")),
                "quarantine file missing for " + std::to_string(bad.incident_id));
    }
    size_t quarantine_files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(config.quarantine_dir)) {
        (void)entry;
        ++quarantine_files;
    }
    require_eq(quarantine_files, static_cast<size_t>(20), "exactly the bad incidents quarantined");
}

}  // namespace

int main() {
    std::cout << "acceptance suite\n";
    run_criterion(1, "metric-oracle equivalence on 200 random corpora",
                  criterion_oracle_equivalence);
    run_criterion(2, "planted pair counts reproduce the reference shares",
                  criterion_planted_pairs);
    run_criterion(3, "amplification formula checks", criterion_amplification);
    run_criterion(4, "agreement formulas (PABAK, Cohen's kappa, symmetry)", criterion_agreement);
    run_criterion(5, "relevance semantics and cascade removal", criterion_relevance);
    run_criterion(6, "end-to-end golden run determinism", criterion_golden_run);
    run_criterion(7, "parser robustness and quarantine isolation", criterion_parser_robustness);

    if (g_failed_criteria > 0) {
        std::cout << g_failed_criteria << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all 7 criteria passed\n";
    return 0;
}
