#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace harmlens::rubric {

// Identity categories in their canonical list order (1-26). The set is
// closed; every stage indexes categories through this enum.
enum class Category : int {
    Race = 0,
    Gender,
    GenderIdentity,
    Class,
    Sexuality,
    Nationality,
    Ability,
    GenderExpression,
    Heritage,
    Age,
    Appearance,
    Language,
    SkinTone,
    Religion,
    ReproductiveStatus,
    BodySize,
    Education,
    ImmigrationStatus,
    Geography,
    Indigeneity,
    FamilyStatus,
    Caste,
    PoliticalIdentity,
    Neurodiversity,
    HealthStatus,
    Species,
};

inline constexpr int kCategoryCount = 26;

enum class SubjectType : int {
    Individual = 0,
    GroupOfPersons,
    Society,
    Organization,
    Nature,
    Other,
};

inline constexpr int kSubjectTypeCount = 6;

struct CounterfactualJudgment {
    bool cq1_direct = false;    // the incident happened because of the marker
    bool cq2_alternate = false; // it would still have happened without it
    std::string reasoning;      // may be empty when cq1_direct is false
};

struct CategoryInfo {
    Category id;
    std::string name;  // canonical display name, e.g. "Political Identity"
    std::vector<std::string> exemplary_values;
};

struct Rubric {
    std::string version;
    std::vector<CategoryInfo> categories;  // list order 1..26
    std::vector<std::string> subject_type_names;
    std::string cq1_template;  // "[marker]" placeholder
    std::string cq2_template;
};

// The static rubric constant. Category order matches the prompt's numbered list.
const Rubric& rubric_definition();

const std::string& category_name(Category c);
const std::string& subject_type_name(SubjectType t);

// Canonical lookup: case-insensitive, whitespace/punctuation tolerant.
// "Specie" is accepted as an alias for Species (the prompt skeleton uses
// the singular form).
std::optional<Category> parse_category(std::string_view name);
bool is_valid_category(std::string_view name);

// Tolerant subject-type lookup ("Organizations", "group of persons", ...).
std::optional<SubjectType> parse_subject_type(std::string_view name);

std::array<Category, kCategoryCount> all_categories();

}  // namespace harmlens::rubric
