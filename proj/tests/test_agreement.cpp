#include "harmlens/agreement.hpp"

#include "harmlens/errors.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

using namespace harmlens;
using namespace test_support;
using agreement::Facet;
using agreement::LabelVector;
using rubric::Category;

namespace {

LabelVector vector_of(const std::vector<std::string>& labels) {
    LabelVector v;
    for (size_t i = 0; i < labels.size(); ++i) {
        v.items.emplace_back("item" + std::to_string(i), labels[i]);
    }
    return v;
}

// portable deterministic bits for the property checks
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

TEST_CASE("percent agreement: identical, partial, misaligned") {
    const auto a = vector_of({"x", "y", "z"});
    CHECK(agreement::percent_agreement(a, a) == 1.0);

    std::vector<std::string> forty_six_match(50, "Yes");
    std::vector<std::string> other(50, "Yes");
    for (int i = 0; i < 4; ++i) other[static_cast<size_t>(i)] = "No";
    CHECK(agreement::percent_agreement(vector_of(forty_six_match), vector_of(other)) ==
          doctest::Approx(0.92));

    LabelVector disjoint;
    disjoint.items = {{"other-id", "x"}, {"another", "y"}, {"third", "z"}};
    try {
        agreement::percent_agreement(a, disjoint);
        FAIL("expected MisalignedVectors");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MisalignedVectors);
    }
}

TEST_CASE("Cohen's kappa on the 45/5/5/45 table") {
    std::vector<std::string> rater_a;
    std::vector<std::string> rater_b;
    for (int i = 0; i < 45; ++i) { rater_a.push_back("Yes"); rater_b.push_back("Yes"); }
    for (int i = 0; i < 5; ++i) { rater_a.push_back("Yes"); rater_b.push_back("No"); }
    for (int i = 0; i < 5; ++i) { rater_a.push_back("No"); rater_b.push_back("Yes"); }
    for (int i = 0; i < 45; ++i) { rater_a.push_back("No"); rater_b.push_back("No"); }
    const auto stats = agreement::cohen_kappa(vector_of(rater_a), vector_of(rater_b));
    CHECK(stats.p_o == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(stats.p_e == doctest::Approx(0.50).epsilon(1e-12));
    REQUIRE(stats.kappa.has_value());
    CHECK(*stats.kappa == doctest::Approx(0.80).epsilon(1e-12));
}

TEST_CASE("kappa is 1 for identical vectors and 0 at chance") {
    const auto identical = vector_of({"a", "b", "a", "b"});
    const auto perfect = agreement::cohen_kappa(identical, identical);
    REQUIRE(perfect.kappa.has_value());
    CHECK(*perfect.kappa == doctest::Approx(1.0));

    // rater B constant: p_o equals p_e, so kappa is exactly 0
    const auto a = vector_of({"Yes", "Yes", "Yes", "No"});
    const auto b = vector_of({"Yes", "Yes", "Yes", "Yes"});
    const auto chance = agreement::cohen_kappa(a, b);
    CHECK(chance.p_o == doctest::Approx(chance.p_e));
    REQUIRE(chance.kappa.has_value());
    CHECK(*chance.kappa == doctest::Approx(0.0));
}

TEST_CASE("kappa is undefined when both raters are the same constant") {
    const auto constant = vector_of({"Yes", "Yes", "Yes"});
    const auto stats = agreement::cohen_kappa(constant, constant);
    CHECK(stats.kappa_undefined);
    CHECK_FALSE(stats.kappa.has_value());
}

TEST_CASE("PABAK reproduces the reference pairs") {
    std::vector<std::string> a(50, "Yes");
    auto b = a;
    for (int i = 0; i < 4; ++i) b[static_cast<size_t>(i)] = "No";
    const auto stats_92 = agreement::pabak(vector_of(a), vector_of(b));
    CHECK(stats_92.p_o == doctest::Approx(0.92).epsilon(1e-12));
    REQUIRE(stats_92.pabak.has_value());
    CHECK(*stats_92.pabak == doctest::Approx(0.84).epsilon(1e-12));
    CHECK(*stats_92.pabak == 2.0 * stats_92.p_o - 1.0);  // exact formula identity

    for (int i = 4; i < 6; ++i) b[static_cast<size_t>(i)] = "No";
    const auto stats_88 = agreement::pabak(vector_of(a), vector_of(b));
    CHECK(*stats_88.pabak == doctest::Approx(0.76).epsilon(1e-12));

    const auto perfect = agreement::pabak(vector_of(a), vector_of(a));
    CHECK(*perfect.pabak == 1.0);
}

TEST_CASE("PABAK rejects non-binary label spaces") {
    const auto a = vector_of({"Yes", "No", "Maybe"});
    try {
        agreement::pabak(a, a);
        FAIL("expected NonBinaryLabels");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NonBinaryLabels);
    }
}

TEST_CASE("pabak equals 2*percent_agreement - 1 on random binary vectors") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const size_t n = 1 + mix(seed) % 40;
        std::vector<std::string> a;
        std::vector<std::string> b;
        for (size_t i = 0; i < n; ++i) {
            a.push_back(mix(seed * 1000 + i) % 2 == 0 ? "Yes" : "No");
            b.push_back(mix(seed * 2000 + i) % 3 == 0 ? "Yes" : "No");
        }
        const auto va = vector_of(a);
        const auto vb = vector_of(b);
        const double p_o = agreement::percent_agreement(va, vb);
        const auto stats = agreement::pabak(va, vb);
        CHECK(*stats.pabak == 2.0 * p_o - 1.0);

        // symmetry in the raters
        const auto swapped = agreement::pabak(vb, va);
        CHECK(*swapped.pabak == *stats.pabak);
        CHECK(agreement::percent_agreement(vb, va) == p_o);
        if (n >= 2) {
            const auto k1 = agreement::cohen_kappa(va, vb);
            const auto k2 = agreement::cohen_kappa(vb, va);
            CHECK(k1.p_e == doctest::Approx(k2.p_e).epsilon(1e-12));
            CHECK(k1.kappa.has_value() == k2.kappa.has_value());
            if (k1.kappa && k2.kappa) CHECK(*k1.kappa == doctest::Approx(*k2.kappa).epsilon(1e-12));
        }
    }
}

// --- accuracy against gold ----------------------------------------------------

namespace {

std::vector<extraction::ExtractionResult> model_two_subjects() {
    auto naga = typed_subject(102, 1, "Naga Munchetty",
                              {{Category::Gender, typed_marker("Woman", true, false)},
                               {Category::Class, typed_marker("Celebrity", true, false)}},
                              rubric::SubjectType::Individual);
    naga.report_ids = {4};
    auto taylor = typed_subject(102, 2, "Taylor Swift",
                                {{Category::Gender, typed_marker("Women", true, false)},
                                 {Category::Class, typed_marker("High-profile", true, false)}},
                                rubric::SubjectType::Individual);
    taylor.report_ids = {4};
    return {typed_result(102, {naga, taylor})};
}

std::vector<agreement::GoldRecord> matching_gold() {
    auto record = [](const std::string& name, Category category, const std::string& marker,
                     bool cq1, bool cq2) {
        agreement::GoldRecord r;
        r.report_id = 4;
        r.subject_name = name;
        r.subject_type = "Individual";
        r.category = category;
        r.marker = marker;
        r.cq1 = cq1;
        r.cq2 = cq2;
        return r;
    };
    return {record("Naga Munchetty", Category::Gender, "Woman", true, false),
            record("Naga Munchetty", Category::Class, "Celebrity", true, false),
            record("Taylor Swift", Category::Gender, "Women", true, false),
            record("Taylor Swift", Category::Class, "High-profile", true, false)};
}

}  // namespace

TEST_CASE("gold equal to the model scores 1.0 on every facet") {
    const auto model = model_two_subjects();
    const auto gold = matching_gold();
    for (const auto facet :
         {Facet::SubjectIdentification, Facet::CategoryValues, Facet::CausalRelevance}) {
        const auto out = agreement::accuracy_vs_gold(model, gold, facet);
        CHECK(out.accuracy == doctest::Approx(1.0));
    }
}

TEST_CASE("one flipped gender value costs exactly one of 52 judgments") {
    const auto model = model_two_subjects();
    auto gold = matching_gold();
    gold[0].marker = "Man";  // seeded disagreement
    const auto out = agreement::accuracy_vs_gold(model, gold, Facet::CategoryValues);
    CHECK(out.compared == 52);  // 2 subjects x 26 categories
    CHECK(out.accuracy == doctest::Approx(51.0 / 52.0));
    CHECK(out.misattribution.at("Gender") == doctest::Approx(0.5));  // 1 of 2 subjects
    CHECK(out.misattribution.at("Caste") == 0.0);
}

TEST_CASE("excluding None/None cells shrinks the comparison set") {
    const auto model = model_two_subjects();
    const auto gold = matching_gold();
    const auto strict =
        agreement::accuracy_vs_gold(model, gold, Facet::CategoryValues, false);
    CHECK(strict.compared == 4);  // only cells where either side has a value
    CHECK(strict.accuracy == doctest::Approx(1.0));
}

TEST_CASE("causal relevance facet compares the binary retained outcome") {
    const auto model = model_two_subjects();
    auto gold = matching_gold();
    gold[1].cq2 = true;  // gold says Class not retained for Naga
    const auto out = agreement::accuracy_vs_gold(model, gold, Facet::CausalRelevance);
    CHECK(out.compared == 52);
    CHECK(out.accuracy == doctest::Approx(51.0 / 52.0));
}

TEST_CASE("unmatched gold subjects are reported, not scored") {
    const auto model = model_two_subjects();
    auto gold = matching_gold();
    agreement::GoldRecord extra;
    extra.report_id = 4;
    extra.subject_name = "Megan Thee Stallion";
    extra.subject_type = "Individual";
    extra.category = Category::Gender;
    extra.marker = "Women";
    extra.cq1 = true;
    extra.cq2 = false;
    gold.push_back(extra);
    const auto out = agreement::accuracy_vs_gold(model, gold, Facet::SubjectIdentification);
    CHECK(out.gold_only_subjects == 1);
    CHECK(out.accuracy == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("no overlapping reports raises NoOverlap") {
    const auto model = model_two_subjects();
    auto gold = matching_gold();
    for (auto& record : gold) record.report_id = 999;
    try {
        agreement::accuracy_vs_gold(model, gold, Facet::SubjectIdentification);
        FAIL("expected NoOverlap");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NoOverlap);
    }
}

TEST_CASE("gold CSV loading validates the header and rows") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto good = dir / "gold_ok.csv";
    {
        std::ofstream out(good, std::ios::trunc);
        out << "report_id,subject_name,subject_type,category,marker,cq1,cq2\n"
            << "4,\"Doe, Jane\",Individual,Gender,female,Yes,No\n";
    }
    const auto records = agreement::load_gold_csv(good);
    REQUIRE(records.size() == 1);
    CHECK(records.front().subject_name == "Doe, Jane");
    CHECK(records.front().category == Category::Gender);
    CHECK(records.front().cq1);

    const auto bad_header = dir / "gold_bad_header.csv";
    {
        std::ofstream out(bad_header, std::ios::trunc);
        out << "report,subject,category\n1,x,Gender\n";
    }
    try {
        agreement::load_gold_csv(bad_header);
        FAIL("expected GoldFormatError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::GoldFormatError);
    }

    const auto bad_category = dir / "gold_bad_cat.csv";
    {
        std::ofstream out(bad_category, std::ios::trunc);
        out << "report_id,subject_name,subject_type,category,marker,cq1,cq2\n"
            << "4,Jane,Individual,Income,low,Yes,No\n";
    }
    try {
        agreement::load_gold_csv(bad_category);
        FAIL("expected GoldFormatError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::GoldFormatError);
    }
}
