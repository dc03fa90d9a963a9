#include "harmlens/agreement.hpp"

#include "harmlens/csv.hpp"
#include "harmlens/errors.hpp"
#include "harmlens/text_fold.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace harmlens::agreement {

namespace {

std::map<std::string, std::string> to_map(const LabelVector& v, const char* which) {
    std::map<std::string, std::string> m;
    for (const auto& [id, label] : v.items) {
        if (!m.emplace(id, label).second) {
            throw Error(Errc::MisalignedVectors,
                        std::string(which) + " vector has duplicate item id \"" + id + "\"");
        }
    }
    return m;
}

// Aligned maps with identical id sets, or MisalignedVectors.
std::pair<std::map<std::string, std::string>, std::map<std::string, std::string>> align(
    const LabelVector& a, const LabelVector& b) {
    auto ma = to_map(a, "first");
    auto mb = to_map(b, "second");
    if (ma.size() != mb.size()) {
        throw Error(Errc::MisalignedVectors, "vectors have different item counts (" +
                                                 std::to_string(ma.size()) + " vs " +
                                                 std::to_string(mb.size()) + ")");
    }
    for (const auto& [id, label] : ma) {
        (void)label;
        if (!mb.count(id)) {
            throw Error(Errc::MisalignedVectors, "item \"" + id + "\" present for one rater only");
        }
    }
    return {std::move(ma), std::move(mb)};
}

std::optional<bool> canonical_binary(const std::string& label) {
    const std::string v = text::to_lower(text::trim(label));
    if (v == "yes" || v == "y" || v == "true" || v == "1") return true;
    if (v == "no" || v == "n" || v == "false" || v == "0") return false;
    return std::nullopt;
}

}  // namespace

double percent_agreement(const LabelVector& a, const LabelVector& b) {
    const auto [ma, mb] = align(a, b);
    if (ma.empty()) throw Error(Errc::TooFewItems, "cannot compute agreement over zero items");
    size_t matches = 0;
    for (const auto& [id, label] : ma) {
        if (mb.at(id) == label) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(ma.size());
}

AgreementStats cohen_kappa(const LabelVector& a, const LabelVector& b) {
    const auto [ma, mb] = align(a, b);
    if (ma.size() < 2) throw Error(Errc::TooFewItems, "Cohen's kappa needs at least 2 items");

    AgreementStats stats;
    stats.n_items = ma.size();

    size_t matches = 0;
    std::map<std::string, size_t> marginal_a;
    std::map<std::string, size_t> marginal_b;
    for (const auto& [id, label] : ma) {
        const std::string& other = mb.at(id);
        if (label == other) ++matches;
        marginal_a[label] += 1;
        marginal_b[other] += 1;
    }
    const double n = static_cast<double>(stats.n_items);
    stats.p_o = static_cast<double>(matches) / n;
    for (const auto& [label, count_a] : marginal_a) {
        auto it = marginal_b.find(label);
        if (it == marginal_b.end()) continue;
        stats.p_e += (static_cast<double>(count_a) / n) * (static_cast<double>(it->second) / n);
    }
    if (stats.p_e == 1.0) {
        stats.kappa_undefined = true;
    } else {
        stats.kappa = (stats.p_o - stats.p_e) / (1.0 - stats.p_e);
    }
    return stats;
}

AgreementStats pabak(const LabelVector& a, const LabelVector& b) {
    const auto [ma, mb] = align(a, b);
    if (ma.empty()) throw Error(Errc::TooFewItems, "PABAK needs at least 1 item");

    size_t matches = 0;
    for (const auto& [id, label] : ma) {
        const auto la = canonical_binary(label);
        const auto lb = canonical_binary(mb.at(id));
        if (!la || !lb) {
            throw Error(Errc::NonBinaryLabels,
                        "PABAK requires Yes/No labels; got \"" + (la ? mb.at(id) : label) + "\"");
        }
        if (*la == *lb) ++matches;
    }
    AgreementStats stats;
    stats.n_items = ma.size();
    stats.p_o = static_cast<double>(matches) / static_cast<double>(ma.size());
    stats.p_e = 0.5;  // prevalence- and bias-adjusted chance level
    stats.pabak = 2.0 * stats.p_o - 1.0;
    return stats;
}

std::vector<GoldRecord> load_gold_csv(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(Errc::GoldFormatError, "cannot open gold file: " + path.string());
    std::stringstream buffer;
    buffer << file.rdbuf();
    const auto rows = csv::parse(buffer.str());
    if (rows.empty()) throw Error(Errc::GoldFormatError, "gold file is empty");

    static const std::vector<std::string> kColumns = {
        "report_id", "subject_name", "subject_type", "category", "marker", "cq1", "cq2"};
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < rows[0].size(); ++i) {
        index[text::to_lower(text::trim(rows[0][i]))] = i;
    }
    for (const auto& column : kColumns) {
        if (!index.count(column)) {
            throw Error(Errc::GoldFormatError, "gold file header is missing \"" + column + "\"");
        }
    }

    std::vector<GoldRecord> records;
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() < rows[0].size()) {
            throw Error(Errc::GoldFormatError,
                        "row " + std::to_string(r + 1) + " has too few fields");
        }
        GoldRecord record;
        try {
            record.report_id = std::stoi(row[index.at("report_id")]);
        } catch (...) {
            throw Error(Errc::GoldFormatError,
                        "row " + std::to_string(r + 1) + ": report_id is not an integer");
        }
        record.subject_name = text::trim(row[index.at("subject_name")]);
        record.subject_type = text::trim(row[index.at("subject_type")]);
        const std::string category_text = row[index.at("category")];
        const auto category = rubric::parse_category(category_text);
        if (!category) {
            throw Error(Errc::GoldFormatError, "row " + std::to_string(r + 1) +
                                                   ": unknown category \"" + category_text + "\"");
        }
        record.category = *category;
        record.marker = text::trim(row[index.at("marker")]);
        const auto cq1 = canonical_binary(row[index.at("cq1")]);
        const auto cq2 = canonical_binary(row[index.at("cq2")]);
        record.cq1 = cq1.value_or(false);
        record.cq2 = cq2.value_or(true);
        if (record.subject_name.empty()) {
            throw Error(Errc::GoldFormatError,
                        "row " + std::to_string(r + 1) + ": empty subject_name");
        }
        records.push_back(std::move(record));
    }
    return records;
}

namespace {

struct GoldSubject {
    int report_id = 0;
    std::string name;
    std::string folded_name;
    // category -> (marker, retained)
    std::map<rubric::Category, GoldRecord> markers;
};

std::vector<GoldSubject> group_gold(const std::vector<GoldRecord>& gold) {
    std::map<std::pair<int, std::string>, GoldSubject> grouped;
    for (const auto& record : gold) {
        const std::string folded = text::fold(record.subject_name);
        auto& subject = grouped[{record.report_id, folded}];
        subject.report_id = record.report_id;
        subject.name = record.subject_name;
        subject.folded_name = folded;
        subject.markers[record.category] = record;
    }
    std::vector<GoldSubject> out;
    out.reserve(grouped.size());
    for (auto& [key, subject] : grouped) out.push_back(std::move(subject));
    return out;
}

bool gold_marker_is_none(const GoldRecord& record) {
    const std::string folded = text::to_lower(text::trim(record.marker));
    return folded.empty() || folded == "not mentioned" || folded == "none";
}

struct MatchedPair {
    const GoldSubject* gold;
    const extraction::HarmedSubject* model;
};

struct Alignment {
    std::vector<MatchedPair> pairs;
    size_t gold_only = 0;
    size_t model_only = 0;
    size_t union_size = 0;
};

// Model subjects are restricted to the reports the gold sample covers; gold
// annotation is per report, the extraction set spans the whole corpus.
Alignment align_subjects(const std::vector<extraction::ExtractionResult>& model,
                         const std::vector<GoldSubject>& gold_subjects) {
    std::set<int> gold_reports;
    for (const auto& subject : gold_subjects) gold_reports.insert(subject.report_id);

    std::vector<const extraction::HarmedSubject*> candidates;
    for (const auto& incident : model) {
        for (const auto& subject : incident.subjects) {
            const bool covers = std::any_of(subject.report_ids.begin(), subject.report_ids.end(),
                                            [&](int id) { return gold_reports.count(id) > 0; });
            if (covers) candidates.push_back(&subject);
        }
    }
    if (candidates.empty() && !gold_subjects.empty()) {
        throw Error(Errc::NoOverlap, "no model subject covers any gold-annotated report");
    }

    Alignment alignment;
    std::set<const extraction::HarmedSubject*> used;
    for (const auto& gold_subject : gold_subjects) {
        const extraction::HarmedSubject* best = nullptr;
        for (const auto* candidate : candidates) {
            if (used.count(candidate)) continue;
            if (!candidate->report_ids.count(gold_subject.report_id)) continue;
            if (text::fold(candidate->name) == gold_subject.folded_name) {
                best = candidate;
                break;
            }
        }
        if (best != nullptr) {
            used.insert(best);
            alignment.pairs.push_back({&gold_subject, best});
        } else {
            ++alignment.gold_only;
        }
    }
    alignment.model_only = candidates.size() - used.size();
    alignment.union_size = alignment.pairs.size() + alignment.gold_only + alignment.model_only;
    return alignment;
}

bool model_marker_retained(const extraction::MarkerRecord& marker) {
    return !marker.is_none() && marker.causally_relevant();
}

bool gold_marker_retained(const GoldRecord& record) {
    return !gold_marker_is_none(record) && record.cq1 && !record.cq2;
}

}  // namespace

FacetAccuracy accuracy_vs_gold(const std::vector<extraction::ExtractionResult>& model,
                               const std::vector<GoldRecord>& gold, Facet facet,
                               bool count_none_matches) {
    if (gold.empty()) throw Error(Errc::GoldFormatError, "gold set has no records");
    const auto gold_subjects = group_gold(gold);
    const auto alignment = align_subjects(model, gold_subjects);

    FacetAccuracy out;
    out.gold_only_subjects = alignment.gold_only;
    out.model_only_subjects = alignment.model_only;

    if (facet == Facet::SubjectIdentification) {
        out.compared = alignment.union_size;
        out.accuracy = alignment.union_size == 0
                           ? 0.0
                           : static_cast<double>(alignment.pairs.size()) /
                                 static_cast<double>(alignment.union_size);
        return out;
    }

    size_t compared = 0;
    size_t matches = 0;
    std::map<std::string, size_t> disagreements;
    for (const auto& pair : alignment.pairs) {
        for (int i = 0; i < rubric::kCategoryCount; ++i) {
            const auto category = static_cast<rubric::Category>(i);
            const auto& model_marker = pair.model->markers[static_cast<size_t>(i)];
            auto gold_it = pair.gold->markers.find(category);
            const bool gold_none =
                gold_it == pair.gold->markers.end() || gold_marker_is_none(gold_it->second);

            bool cell_match = false;
            bool skip = false;
            if (facet == Facet::CategoryValues) {
                if (gold_none && model_marker.is_none()) {
                    cell_match = true;
                    skip = !count_none_matches;
                } else if (!gold_none && !model_marker.is_none()) {
                    cell_match =
                        text::names_equivalent(gold_it->second.marker, model_marker.marker);
                }
            } else {  // CausalRelevance: binary retained / not retained
                const bool gold_retained =
                    gold_it != pair.gold->markers.end() && gold_marker_retained(gold_it->second);
                const bool model_retained = model_marker_retained(model_marker);
                cell_match = gold_retained == model_retained;
                skip = !count_none_matches && gold_none && model_marker.is_none();
            }
            if (skip) continue;
            ++compared;
            if (cell_match) {
                ++matches;
            } else {
                disagreements[rubric::category_name(category)] += 1;
            }
        }
    }
    out.compared = compared;
    out.accuracy =
        compared == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(compared);
    if (!alignment.pairs.empty()) {
        for (const auto& category : rubric::all_categories()) {
            const auto& name = rubric::category_name(category);
            auto it = disagreements.find(name);
            const double rate = it == disagreements.end()
                                    ? 0.0
                                    : static_cast<double>(it->second) /
                                          static_cast<double>(alignment.pairs.size());
            out.misattribution[name] = rate;
        }
    }
    return out;
}

std::pair<LabelVector, LabelVector> gold_label_vectors(
    const std::vector<extraction::ExtractionResult>& model, const std::vector<GoldRecord>& gold,
    Facet facet) {
    const auto gold_subjects = group_gold(gold);
    const auto alignment = align_subjects(model, gold_subjects);

    LabelVector gold_vector;
    LabelVector model_vector;
    for (const auto& pair : alignment.pairs) {
        const std::string base =
            std::to_string(pair.gold->report_id) + ":" + pair.gold->folded_name + ":";
        for (int i = 0; i < rubric::kCategoryCount; ++i) {
            const auto category = static_cast<rubric::Category>(i);
            const std::string id = base + rubric::category_name(category);
            const auto& model_marker = pair.model->markers[static_cast<size_t>(i)];
            auto gold_it = pair.gold->markers.find(category);
            const bool gold_none =
                gold_it == pair.gold->markers.end() || gold_marker_is_none(gold_it->second);

            if (facet == Facet::CausalRelevance) {
                const bool gold_retained = !gold_none && gold_marker_retained(gold_it->second);
                gold_vector.items.emplace_back(id, gold_retained ? "Yes" : "No");
                model_vector.items.emplace_back(
                    id, model_marker_retained(model_marker) ? "Yes" : "No");
            } else {
                gold_vector.items.emplace_back(
                    id, gold_none ? "None" : text::fold(gold_it->second.marker));
                model_vector.items.emplace_back(
                    id, model_marker.is_none() ? "None" : text::fold(model_marker.marker));
            }
        }
    }
    return {std::move(gold_vector), std::move(model_vector)};
}

}  // namespace harmlens::agreement
