#pragma once

#include "harmlens/rubric.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace harmlens::normalization {

// Canonical grouped value names used in all outputs.
inline constexpr const char* kRaceWhite = "White";
inline constexpr const char* kRacePoc = "People of color";
inline constexpr const char* kGenderFemale = "Female";
inline constexpr const char* kGenderMale = "Male";
inline constexpr const char* kGenderOther = "Other";
inline constexpr const char* kClassLower = "Lower";
inline constexpr const char* kClassMiddle = "Middle";
inline constexpr const char* kClassUpper = "Upper";
inline constexpr const char* kAgeChildren = "Children 1-9";
inline constexpr const char* kAgeAdolescents = "Adolescents 10-19";
inline constexpr const char* kAgeYoungerAdults = "Younger adults 20-24";
inline constexpr const char* kAgeAdults = "Adults 25-59";
inline constexpr const char* kAgeOlderAdults = "Older adults 60-99";

enum class RuleApplied { Lexicon, Range, Passthrough, Unmapped };

const char* rule_applied_name(RuleApplied rule);

struct GroupedValue {
    rubric::Category category;
    std::string raw;
    std::string grouped;  // empty only when rule_applied == Unmapped
    RuleApplied rule_applied = RuleApplied::Unmapped;
};

// Term keys are stored folded (lowercase, punctuation collapsed).
struct GroupingRules {
    std::vector<std::string> race_white_terms;
    std::vector<std::string> race_poc_terms;
    std::vector<std::string> gender_female_terms;
    std::vector<std::string> gender_male_terms;
    std::vector<std::string> gender_other_terms;
    std::map<std::string, std::string> class_lexicon;  // term -> Lower/Middle/Upper
    std::map<std::string, std::string> age_synonyms;   // term -> age bucket name
};

// Bundled defaults. "gig worker" maps to Lower, "politician" to Upper,
// "small business owner" to Middle, and so on.
const GroupingRules& default_rules();

// Defaults when path is absent; otherwise the file's sections extend or
// override the defaults. Lexicon sections accept an object or an array of
// [term, group] pairs; duplicate terms within a file raise MalformedRules.
GroupingRules load_grouping_rules(const std::optional<std::filesystem::path>& path);

// Maps a raw marker value to its analysis value. Race, gender and class go
// through term lexicons, age through numeric/range/synonym parsing, every
// other category is a lowercased/trimmed passthrough. Throws EmptyValue.
GroupedValue group_value(rubric::Category category, const std::string& raw,
                         const GroupingRules& rules);

// Bucket for an age in whole years; ages outside 1..99 do not map.
std::optional<std::string> age_bucket(int years);

// Accumulates raw->grouped observations for normalization_report.json.
class GroupingLog {
public:
    void record(const GroupedValue& value);
    nlohmann::json to_json() const;

private:
    // category name -> raw -> grouped (or count for unmapped)
    std::map<std::string, std::map<std::string, std::string>> mapped_;
    std::map<std::string, std::map<std::string, int>> unmapped_;
};

}  // namespace harmlens::normalization
