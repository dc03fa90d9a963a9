#include "harmlens/rubric.hpp"

#include <doctest.h>

using namespace harmlens::rubric;

TEST_CASE("rubric has exactly 26 categories in list order") {
    const auto& rubric = rubric_definition();
    REQUIRE(rubric.categories.size() == 26);
    CHECK(rubric.categories.front().name == "Race");
    CHECK(rubric.categories[21].name == "Caste");  // item 22
    CHECK(rubric.categories[25].name == "Species");
    for (size_t i = 0; i < rubric.categories.size(); ++i) {
        CHECK(rubric.categories[i].id == static_cast<Category>(i));
    }
}

TEST_CASE("every category carries at least two exemplary values") {
    for (const auto& info : rubric_definition().categories) {
        CHECK(info.exemplary_values.size() >= 2);
    }
}

TEST_CASE("caste and species carry their flagship example values") {
    const auto& categories = rubric_definition().categories;
    const auto& caste = categories[static_cast<size_t>(Category::Caste)];
    CHECK(caste.exemplary_values[0] == "Brahmin");
    CHECK(caste.exemplary_values[1] == "Dalit");
    const auto& species = categories[static_cast<size_t>(Category::Species)];
    CHECK(species.exemplary_values[0] == "Human");
    CHECK(species.exemplary_values[1] == "nonhuman animal");
}

TEST_CASE("is_valid_category is case and whitespace tolerant") {
    CHECK(is_valid_category("Political Identity"));
    CHECK(is_valid_category("political identity"));
    CHECK(is_valid_category("PoliticalIdentity"));
    CHECK(is_valid_category("  Skin  Tone "));
    CHECK_FALSE(is_valid_category("Income"));
    CHECK_FALSE(is_valid_category(""));
}

TEST_CASE("Specie is accepted as an alias for Species") {
    const auto parsed = parse_category("Specie");
    REQUIRE(parsed.has_value());
    CHECK(*parsed == Category::Species);
    CHECK(category_name(*parsed) == "Species");
}

TEST_CASE("subject type parsing tolerates the skeleton spellings") {
    CHECK(parse_subject_type("Individual") == SubjectType::Individual);
    CHECK(parse_subject_type("Group of persons") == SubjectType::GroupOfPersons);
    CHECK(parse_subject_type("Organizations") == SubjectType::Organization);
    CHECK(parse_subject_type("organization") == SubjectType::Organization);
    CHECK(parse_subject_type("NATURE") == SubjectType::Nature);
    CHECK_FALSE(parse_subject_type("Robot").has_value());
}

TEST_CASE("the rubric constant is shared, not rebuilt") {
    CHECK(&rubric_definition() == &rubric_definition());
    CHECK(rubric_definition().version == "1.0.0");
}
