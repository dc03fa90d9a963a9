#include "harmlens/relevance.hpp"

#include "harmlens/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace harmlens;
using namespace test_support;
using rubric::Category;

TEST_CASE("the pregnancy-scoring worked example: gender stays, nationality goes") {
    auto girls = typed_subject(188, 1, "Girls in the province",
                               {{Category::Gender, typed_marker("girls", true, false)},
                                {Category::Nationality, typed_marker("Argentine", false, true)}});
    const auto filtered = relevance::filter_relevant({typed_result(188, {girls})});

    REQUIRE(filtered.N == 1);                       // incident retained
    REQUIRE(filtered.incidents.front().subjects.size() == 1);  // subject retained
    const auto& subject = filtered.incidents.front().subjects.front();
    CHECK_FALSE(subject.marker(Category::Gender).is_none());        // retained
    CHECK(subject.marker(Category::Nationality).is_none());         // removed
    CHECK(filtered.dropped_markers == 1);
    CHECK(filtered.dropped_subjects == 0);
    CHECK(filtered.dropped_incidents == 0);
}

TEST_CASE("a Yes/Yes marker is removed") {
    auto subject = typed_subject(2, 1, "Someone",
                                 {{Category::Age, typed_marker("teenager", true, true)}});
    const auto filtered = relevance::filter_relevant({typed_result(2, {subject})});
    CHECK(filtered.N == 0);  // only marker fails, cascade removes everything
    CHECK(filtered.dropped_subjects == 1);
    CHECK(filtered.dropped_incidents == 1);
}

TEST_CASE("cascade: empty subjects then empty incidents are removed") {
    auto keeps = typed_subject(3, 1, "Kept group",
                               {{Category::Class, typed_marker("gig worker", true, false)}});
    auto drops = typed_subject(3, 2, "Dropped group",
                               {{Category::Geography, typed_marker("urban", false, true)}});
    auto gone = typed_subject(4, 1, "Gone group",
                              {{Category::Education, typed_marker("student", false, false)}});
    const auto filtered = relevance::filter_relevant(
        {typed_result(3, {keeps, drops}), typed_result(4, {gone})});
    CHECK(filtered.N == 1);
    CHECK(filtered.subject_count() == 1);
    CHECK(filtered.dropped_subjects == 2);
    CHECK(filtered.dropped_incidents == 1);
}

TEST_CASE("relevance_report counts markers overall vs causal") {
    // five Gender markers across subjects, three pass the test
    std::vector<extraction::ExtractionResult> results;
    results.push_back(typed_result(
        10, {typed_subject(10, 1, "A", {{Category::Gender, typed_marker("women", true, false)}}),
             typed_subject(10, 2, "B", {{Category::Gender, typed_marker("women", true, true)}})}));
    results.push_back(typed_result(
        11, {typed_subject(11, 1, "C", {{Category::Gender, typed_marker("girls", true, false)}}),
             typed_subject(11, 2, "D", {{Category::Gender, typed_marker("men", false, true)}})}));
    results.push_back(typed_result(
        12, {typed_subject(12, 1, "E", {{Category::Gender, typed_marker("women", true, false)}})}));

    const auto filtered = relevance::filter_relevant(results);
    const auto report = relevance::relevance_report(results, filtered);
    CHECK(report.at("Gender").overall == 5);
    CHECK(report.at("Gender").causal == 3);
    CHECK(report.at("Caste").overall == 0);  // never emitted
    CHECK(report.at("Caste").causal == 0);
}

TEST_CASE("filtering is monotone and idempotent") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto results = synth::random_extraction_set(seed, 15);
        const auto once = relevance::filter_relevant(results);
        CHECK(once.N <= static_cast<int>(results.size()));
        size_t subjects_before = 0;
        for (const auto& result : results) subjects_before += result.subjects.size();
        CHECK(once.subject_count() <= static_cast<int>(subjects_before));

        const auto twice = relevance::filter_relevant(once.incidents);
        CHECK(twice.N == once.N);
        CHECK(twice.dropped_markers == 0);
        CHECK(twice.dropped_subjects == 0);
        CHECK(twice.dropped_incidents == 0);
        REQUIRE(twice.incidents.size() == once.incidents.size());
        for (size_t i = 0; i < once.incidents.size(); ++i) {
            CHECK(extraction::result_to_json(twice.incidents[i]) ==
                  extraction::result_to_json(once.incidents[i]));
        }

        // every retained marker satisfies the counterfactual test
        for (const auto& incident : once.incidents) {
            for (const auto& subject : incident.subjects) {
                bool any_relevant = false;
                for (const auto& marker : subject.markers) {
                    if (marker.is_none()) continue;
                    CHECK(marker.judgment->cq1_direct);
                    CHECK_FALSE(marker.judgment->cq2_alternate);
                    any_relevant = true;
                }
                CHECK(any_relevant);
            }
        }
    }
}

TEST_CASE("filtering is order independent") {
    const auto results = synth::random_extraction_set(42, 20);
    auto reversed = results;
    std::reverse(reversed.begin(), reversed.end());
    const auto forward = relevance::filter_relevant(results);
    const auto backward = relevance::filter_relevant(reversed);
    CHECK(forward.N == backward.N);
    CHECK(forward.subject_count() == backward.subject_count());
    CHECK(forward.dropped_markers == backward.dropped_markers);

    auto ids = [](const relevance::FilteredCorpus& corpus) {
        std::set<int> out;
        for (const auto& incident : corpus.incidents) out.insert(incident.incident_id);
        return out;
    };
    CHECK(ids(forward) == ids(backward));
}
