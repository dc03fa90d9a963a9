#include "harmlens/rubric.hpp"

#include <cctype>
#include <unordered_map>

namespace harmlens::rubric {

namespace {

Rubric make_rubric() {
    Rubric r;
    r.version = "1.0.0";
    r.categories = {
        {Category::Race, "Race", {"White", "Black"}},
        {Category::Gender, "Gender", {"Male", "Female"}},
        {Category::GenderIdentity, "Gender Identity", {"Cisgender", "Trans"}},
        {Category::Class, "Class", {"Upper class", "Working class"}},
        {Category::Sexuality, "Sexuality", {"Heterosexual", "Gay"}},
        {Category::Nationality, "Nationality", {"German", "Syrian"}},
        {Category::Ability, "Ability", {"Able-bodied", "Disabled"}},
        {Category::GenderExpression, "Gender Expression",
         {"Masculine", "Feminine", "gender nonconforming"}},
        {Category::Heritage, "Heritage",
         {"European descent", "African American", "Indigenous heritage", "diasporic"}},
        {Category::Age, "Age", {"Teenager", "Adult", "Middle-aged", "Senior"}},
        {Category::Appearance, "Appearance",
         {"Conventionally attractive", "perceived as unattractive"}},
        {Category::Language, "Language", {"Anglophone", "English as a second language"}},
        {Category::SkinTone, "Skin Tone", {"Light", "Dark"}},
        {Category::Religion, "Religion", {"Christian", "Muslim"}},
        {Category::ReproductiveStatus, "Reproductive Status", {"Fertile", "Infertile"}},
        {Category::BodySize, "Body Size", {"Thin", "fat", "obese"}},
        {Category::Education, "Education",
         {"Student", "professor", "vocational trainee", "graduate of an elite university",
          "self-taught"}},
        {Category::ImmigrationStatus, "Immigration Status",
         {"Citizen", "permanent resident", "temporary visa holder", "undocumented migrant"}},
        {Category::Geography, "Geography",
         {"Urban", "rural", "remote region", "informal settlement", "university town",
          "capital city"}},
        {Category::Indigeneity, "Indigeneity",
         {"Indigenous person", "settler descendant", "colonizer lineage"}},
        {Category::FamilyStatus, "Family Status",
         {"Single", "married", "divorced", "single parent", "caregiver"}},
        {Category::Caste, "Caste", {"Brahmin", "Dalit"}},
        {Category::PoliticalIdentity, "Political Identity",
         {"Progressive", "conservative", "libertarian", "socialist"}},
        {Category::Neurodiversity, "Neurodiversity", {"Neurotypical", "autistic", "ADHD"}},
        {Category::HealthStatus, "Health Status",
         {"Mentally well", "living with depression", "chronically ill"}},
        {Category::Species, "Species", {"Human", "nonhuman animal", "plant", "insect"}},
    };
    r.subject_type_names = {"Individual", "Group of persons", "Society",
                            "Organization", "Nature",           "Other"};
    r.cq1_template = "Did this incident happen because the AI Subject was [marker]?";
    r.cq2_template = "Would this incident still have happened if the AI Subject was not [marker]?";
    return r;
}

// Key for tolerant lookup: lowercase alphanumerics only.
std::string lookup_key(std::string_view name) {
    std::string key;
    key.reserve(name.size());
    for (unsigned char c : name) {
        if (std::isalnum(c)) key.push_back(static_cast<char>(std::tolower(c)));
    }
    return key;
}

const std::unordered_map<std::string, Category>& category_index() {
    static const std::unordered_map<std::string, Category> index = [] {
        std::unordered_map<std::string, Category> m;
        for (const auto& info : rubric_definition().categories) {
            m.emplace(lookup_key(info.name), info.id);
        }
        m.emplace("specie", Category::Species);  // prompt skeleton alias
        return m;
    }();
    return index;
}

const std::unordered_map<std::string, SubjectType>& subject_type_index() {
    static const std::unordered_map<std::string, SubjectType> index = [] {
        std::unordered_map<std::string, SubjectType> m;
        const auto& names = rubric_definition().subject_type_names;
        for (int i = 0; i < kSubjectTypeCount; ++i) {
            m.emplace(lookup_key(names[static_cast<size_t>(i)]), static_cast<SubjectType>(i));
        }
        m.emplace("organizations", SubjectType::Organization);  // skeleton plural
        m.emplace("group", SubjectType::GroupOfPersons);
        m.emplace("groupofperson", SubjectType::GroupOfPersons);
        m.emplace("anindividual", SubjectType::Individual);
        return m;
    }();
    return index;
}

}  // namespace

const Rubric& rubric_definition() {
    static const Rubric rubric = make_rubric();
    return rubric;
}

const std::string& category_name(Category c) {
    return rubric_definition().categories[static_cast<size_t>(c)].name;
}

const std::string& subject_type_name(SubjectType t) {
    return rubric_definition().subject_type_names[static_cast<size_t>(t)];
}

std::optional<Category> parse_category(std::string_view name) {
    const auto& index = category_index();
    auto it = index.find(lookup_key(name));
    if (it == index.end()) return std::nullopt;
    return it->second;
}

bool is_valid_category(std::string_view name) {
    return parse_category(name).has_value();
}

std::optional<SubjectType> parse_subject_type(std::string_view name) {
    const auto& index = subject_type_index();
    auto it = index.find(lookup_key(name));
    if (it == index.end()) return std::nullopt;
    return it->second;
}

std::array<Category, kCategoryCount> all_categories() {
    std::array<Category, kCategoryCount> out{};
    for (int i = 0; i < kCategoryCount; ++i) out[static_cast<size_t>(i)] = static_cast<Category>(i);
    return out;
}

}  // namespace harmlens::rubric
