#include "harmlens/normalization.hpp"

#include "harmlens/errors.hpp"
#include "harmlens/text_fold.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>

namespace harmlens::normalization {

namespace {

using nlohmann::json;
using rubric::Category;

// Whole-word phrase containment on folded strings: "white" matches
// "white woman" but not "whitelist".
bool contains_phrase(const std::string& haystack, const std::string& phrase) {
    if (phrase.empty()) return false;
    size_t pos = 0;
    while ((pos = haystack.find(phrase, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || haystack[pos - 1] == ' ';
        const size_t end = pos + phrase.size();
        const bool right_ok = end == haystack.size() || haystack[end] == ' ';
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

struct TermMatch {
    std::string term;
    std::string group;
};

// Longest matching term wins; ties break lexicographically on the term so
// results never depend on container order.
std::optional<TermMatch> best_match(const std::string& folded,
                                    const std::vector<std::pair<std::string, std::string>>& terms) {
    std::optional<TermMatch> best;
    for (const auto& [term, group] : terms) {
        if (folded == term || contains_phrase(folded, term)) {
            if (!best || term.size() > best->term.size() ||
                (term.size() == best->term.size() && term < best->term)) {
                best = TermMatch{term, group};
            }
        }
    }
    return best;
}

std::vector<std::pair<std::string, std::string>> race_terms(const GroupingRules& rules) {
    std::vector<std::pair<std::string, std::string>> terms;
    for (const auto& t : rules.race_white_terms) terms.emplace_back(t, kRaceWhite);
    for (const auto& t : rules.race_poc_terms) terms.emplace_back(t, kRacePoc);
    return terms;
}

std::vector<std::pair<std::string, std::string>> gender_terms(const GroupingRules& rules) {
    std::vector<std::pair<std::string, std::string>> terms;
    for (const auto& t : rules.gender_female_terms) terms.emplace_back(t, kGenderFemale);
    for (const auto& t : rules.gender_male_terms) terms.emplace_back(t, kGenderMale);
    for (const auto& t : rules.gender_other_terms) terms.emplace_back(t, kGenderOther);
    return terms;
}

bool is_age_unit(const std::string& token, std::initializer_list<const char*> units) {
    for (const char* unit : units) {
        if (token == unit) return true;
    }
    return false;
}

// Numeric age forms: "16", "16 year old", "aged 25 59" (ranges take the
// midpoint), "16 month old" and other sub-year units land in the child
// bucket per the grouping rules.
std::optional<GroupedValue> parse_numeric_age(Category category, const std::string& raw,
                                              const std::string& folded) {
    std::vector<std::string> tokens;
    {
        std::string tok;
        for (char c : folded) {
            if (c == ' ') {
                if (!tok.empty()) tokens.push_back(tok);
                tok.clear();
            } else {
                tok.push_back(c);
            }
        }
        if (!tok.empty()) tokens.push_back(tok);
    }

    std::vector<long> numbers;
    bool sub_year_unit = false;
    for (size_t i = 0; i < tokens.size(); ++i) {
        const std::string& tok = tokens[i];
        if (std::all_of(tok.begin(), tok.end(),
                        [](unsigned char c) { return std::isdigit(c); }) &&
            !tok.empty() && tok.size() <= 4) {
            numbers.push_back(std::stol(tok));
            if (i + 1 < tokens.size() &&
                is_age_unit(tokens[i + 1], {"month", "months", "week", "weeks", "day", "days"})) {
                sub_year_unit = true;
            }
        }
    }
    if (numbers.empty()) return std::nullopt;

    if (sub_year_unit) {
        return GroupedValue{category, raw, kAgeChildren, RuleApplied::Range};
    }
    long years = numbers[0];
    if (numbers.size() >= 2) years = (numbers[0] + numbers[1]) / 2;  // written range midpoint
    const auto bucket = age_bucket(static_cast<int>(years));
    if (!bucket) return GroupedValue{category, raw, "", RuleApplied::Unmapped};
    return GroupedValue{category, raw, *bucket, RuleApplied::Range};
}

const std::vector<std::string>& age_bucket_names() {
    static const std::vector<std::string> names = {kAgeChildren, kAgeAdolescents,
                                                   kAgeYoungerAdults, kAgeAdults, kAgeOlderAdults};
    return names;
}

std::optional<std::string> parse_age_bucket_name(const std::string& value) {
    const std::string folded = text::fold(value);
    for (const auto& name : age_bucket_names()) {
        if (folded == text::fold(name)) return name;
        // first word is enough: "children", "adolescents", ...
        const std::string head = text::fold(name).substr(0, text::fold(name).find(' '));
        if (folded == head) return name;
    }
    return std::nullopt;
}

std::optional<std::string> parse_class_bucket_name(const std::string& value) {
    const std::string folded = text::fold(value);
    if (folded == "lower" || folded == "lower class") return kClassLower;
    if (folded == "middle" || folded == "middle class") return kClassMiddle;
    if (folded == "upper" || folded == "upper class") return kClassUpper;
    return std::nullopt;
}

GroupingRules make_default_rules() {
    GroupingRules rules;
    rules.race_white_terms = {"white", "whites", "caucasian", "white people"};
    rules.race_poc_terms = {
        "person of color", "people of color",  "black",           "african american",
        "african",         "hispanic",         "latino",          "latina",
        "latinx",          "asian",            "asian american",  "south asian",
        "east asian",      "southeast asian",  "native american", "indigenous",
        "arab",            "middle eastern",   "romani",          "mixed race",
        "biracial",        "multiracial",      "non white",       "brown",
        "pacific islander", "aboriginal",
    };
    rules.gender_female_terms = {"female", "females", "woman", "women", "girl", "girls",
                                 "lady",   "ladies",  "mother", "mothers"};
    rules.gender_male_terms = {"male", "males", "man", "men", "boy", "boys", "father", "fathers"};
    rules.gender_other_terms = {"non binary", "nonbinary", "genderqueer", "genderfluid",
                                "agender",    "other"};

    auto put = [](std::map<std::string, std::string>& m, std::initializer_list<const char*> terms,
                  const char* group) {
        for (const char* term : terms) m.emplace(text::fold(term), group);
    };
    put(rules.class_lexicon,
        {"gig worker", "low income", "working class", "lower class", "poor", "poverty",
         "unemployed", "welfare recipient", "homeless", "minimum wage", "laborer", "labourer",
         "farm worker", "factory worker", "domestic worker", "delivery driver", "courier",
         "janitor", "cashier", "cleaner", "migrant worker", "warehouse worker", "waitress",
         "waiter", "tenant"},
        kClassLower);
    put(rules.class_lexicon,
        {"small business owner", "middle class", "middle income", "teacher", "nurse",
         "office worker", "accountant", "clerk", "civil servant", "shopkeeper", "engineer",
         "technician", "salaried employee"},
        kClassMiddle);
    put(rules.class_lexicon,
        {"politician", "celebrity", "celebrities", "high profile", "wealthy", "rich",
         "millionaire", "billionaire", "executive", "ceo", "elite", "political elite",
         "upper class", "aristocrat", "investor", "senator", "minister", "royal", "tycoon",
         "mogul", "media personality", "public figure", "affluent"},
        kClassUpper);

    put(rules.age_synonyms,
        {"infant", "baby", "babies", "toddler", "toddlers", "child", "children", "kid", "kids",
         "preschooler", "newborn"},
        kAgeChildren);
    put(rules.age_synonyms,
        {"teenager", "teenagers", "teen", "teens", "teenage", "adolescent", "adolescents",
         "youth", "young", "schoolchild", "schoolchildren"},
        kAgeAdolescents);
    put(rules.age_synonyms, {"young adult", "young adults", "twenty something", "college aged"},
        kAgeYoungerAdults);
    put(rules.age_synonyms,
        {"adult", "adults", "middle aged", "grown up", "working age"}, kAgeAdults);
    put(rules.age_synonyms,
        {"senior", "seniors", "elderly", "older adult", "older adults", "retiree", "retirees",
         "pensioner", "pensioners", "octogenarian", "older people", "old people"},
        kAgeOlderAdults);
    return rules;
}

// Lexicon sections accept {"term": "Group"} objects or [["term","Group"]]
// pair arrays; only the array form can detect duplicate terms (JSON object
// parsing collapses repeated keys).
void merge_lexicon_section(const json& node, const std::string& section,
                           std::map<std::string, std::string>& target,
                           const std::function<std::optional<std::string>(const std::string&)>&
                               parse_group) {
    std::vector<std::pair<std::string, std::string>> entries;
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            if (!it.value().is_string()) {
                throw Error(Errc::MalformedRules, section + ": values must be strings");
            }
            entries.emplace_back(it.key(), it.value().get<std::string>());
        }
    } else if (node.is_array()) {
        for (const auto& pair : node) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
                !pair[1].is_string()) {
                throw Error(Errc::MalformedRules, section + ": entries must be [term, group] pairs");
            }
            entries.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
        }
    } else {
        throw Error(Errc::MalformedRules, section + ": must be an object or pair array");
    }

    std::map<std::string, std::string> file_terms;
    for (const auto& [raw_term, raw_group] : entries) {
        const std::string term = text::fold(raw_term);
        if (term.empty()) throw Error(Errc::MalformedRules, section + ": empty term");
        const auto group = parse_group(raw_group);
        if (!group) {
            throw Error(Errc::MalformedRules,
                        section + ": unknown group \"" + raw_group + "\" for \"" + raw_term + "\"");
        }
        if (!file_terms.emplace(term, *group).second) {
            throw Error(Errc::MalformedRules, section + ": duplicate term \"" + raw_term + "\"");
        }
    }
    for (const auto& [term, group] : file_terms) target[term] = group;  // override or extend
}

void merge_term_list(const json& node, const std::string& section,
                     std::vector<std::string>& target) {
    if (!node.is_array()) throw Error(Errc::MalformedRules, section + ": must be an array");
    std::map<std::string, bool> file_terms;
    for (const auto& v : node) {
        if (!v.is_string()) throw Error(Errc::MalformedRules, section + ": entries must be strings");
        const std::string term = text::fold(v.get<std::string>());
        if (term.empty()) throw Error(Errc::MalformedRules, section + ": empty term");
        if (!file_terms.emplace(term, true).second) {
            throw Error(Errc::MalformedRules, section + ": duplicate term \"" + v.get<std::string>() + "\"");
        }
        if (std::find(target.begin(), target.end(), term) == target.end()) {
            target.push_back(term);
        }
    }
}

}  // namespace

const char* rule_applied_name(RuleApplied rule) {
    switch (rule) {
        case RuleApplied::Lexicon: return "Lexicon";
        case RuleApplied::Range: return "Range";
        case RuleApplied::Passthrough: return "Passthrough";
        case RuleApplied::Unmapped: return "Unmapped";
    }
    return "Unmapped";
}

const GroupingRules& default_rules() {
    static const GroupingRules rules = make_default_rules();
    return rules;
}

GroupingRules load_grouping_rules(const std::optional<std::filesystem::path>& path) {
    GroupingRules rules = default_rules();
    if (!path) return rules;

    std::ifstream file(*path, std::ios::binary);
    if (!file) throw Error(Errc::FileNotFound, "grouping rules file not found: " + path->string());
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::parse_error& e) {
        throw Error(Errc::MalformedRules, path->string() + ": " + e.what());
    }
    if (!doc.is_object()) throw Error(Errc::MalformedRules, "rules file must be a JSON object");

    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& section = it.key();
        if (section == "race_white_terms") {
            merge_term_list(it.value(), section, rules.race_white_terms);
        } else if (section == "race_poc_terms") {
            merge_term_list(it.value(), section, rules.race_poc_terms);
        } else if (section == "gender_female_terms") {
            merge_term_list(it.value(), section, rules.gender_female_terms);
        } else if (section == "gender_male_terms") {
            merge_term_list(it.value(), section, rules.gender_male_terms);
        } else if (section == "gender_other_terms") {
            merge_term_list(it.value(), section, rules.gender_other_terms);
        } else if (section == "class_lexicon") {
            merge_lexicon_section(it.value(), section, rules.class_lexicon,
                                  parse_class_bucket_name);
        } else if (section == "age_synonyms") {
            merge_lexicon_section(it.value(), section, rules.age_synonyms, parse_age_bucket_name);
        } else {
            throw Error(Errc::MalformedRules, "unknown section \"" + section + "\"");
        }
    }
    return rules;
}

std::optional<std::string> age_bucket(int years) {
    if (years >= 1 && years <= 9) return kAgeChildren;
    if (years >= 10 && years <= 19) return kAgeAdolescents;
    if (years >= 20 && years <= 24) return kAgeYoungerAdults;
    if (years >= 25 && years <= 59) return kAgeAdults;
    if (years >= 60 && years <= 99) return kAgeOlderAdults;
    return std::nullopt;
}

GroupedValue group_value(rubric::Category category, const std::string& raw,
                         const GroupingRules& rules) {
    const std::string trimmed = text::trim(raw);
    if (trimmed.empty() || text::to_lower(trimmed) == "not mentioned") {
        throw Error(Errc::EmptyValue, "cannot group an empty marker value");
    }
    const std::string folded = text::fold(trimmed);

    switch (category) {
        case Category::Race: {
            const auto match = best_match(folded, race_terms(rules));
            if (match) return {category, raw, match->group, RuleApplied::Lexicon};
            return {category, raw, "", RuleApplied::Unmapped};
        }
        case Category::Gender: {
            const auto match = best_match(folded, gender_terms(rules));
            if (match) return {category, raw, match->group, RuleApplied::Lexicon};
            return {category, raw, "", RuleApplied::Unmapped};
        }
        case Category::Class: {
            auto exact = rules.class_lexicon.find(folded);
            if (exact != rules.class_lexicon.end()) {
                return {category, raw, exact->second, RuleApplied::Lexicon};
            }
            std::vector<std::pair<std::string, std::string>> terms(rules.class_lexicon.begin(),
                                                                   rules.class_lexicon.end());
            const auto match = best_match(folded, terms);
            if (match) return {category, raw, match->group, RuleApplied::Lexicon};
            return {category, raw, "", RuleApplied::Unmapped};
        }
        case Category::Age: {
            if (auto numeric = parse_numeric_age(category, raw, folded)) return *numeric;
            auto exact = rules.age_synonyms.find(folded);
            if (exact != rules.age_synonyms.end()) {
                return {category, raw, exact->second, RuleApplied::Lexicon};
            }
            std::vector<std::pair<std::string, std::string>> terms(rules.age_synonyms.begin(),
                                                                   rules.age_synonyms.end());
            const auto match = best_match(folded, terms);
            if (match) return {category, raw, match->group, RuleApplied::Lexicon};
            return {category, raw, "", RuleApplied::Unmapped};
        }
        default:
            return {category, raw, text::to_lower(trimmed), RuleApplied::Passthrough};
    }
}

void GroupingLog::record(const GroupedValue& value) {
    const std::string& category = rubric::category_name(value.category);
    if (value.rule_applied == RuleApplied::Unmapped) {
        unmapped_[category][value.raw] += 1;
    } else {
        mapped_[category][value.raw] = value.grouped;
    }
}

nlohmann::json GroupingLog::to_json() const {
    return nlohmann::json{{"mapped", mapped_}, {"unmapped", unmapped_}};
}

}  // namespace harmlens::normalization
