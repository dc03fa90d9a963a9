#pragma once

#include "harmlens/extraction.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace harmlens::agreement {

struct LabelVector {
    // item ids must be unique; two comparable vectors share the same id set
    std::vector<std::pair<std::string, std::string>> items;
};

struct AgreementStats {
    double p_o = 0.0;
    double p_e = 0.0;
    std::optional<double> kappa;   // empty when p_e == 1 (undefined)
    std::optional<double> pabak;   // binary labels only
    bool kappa_undefined = false;
    size_t n_items = 0;
};

double percent_agreement(const LabelVector& a, const LabelVector& b);

// p_e from both raters' marginal label distributions;
// kappa = (p_o - p_e) / (1 - p_e).
AgreementStats cohen_kappa(const LabelVector& a, const LabelVector& b);

// 2*p_o - 1 over a binary (Yes/No after canonicalization) label space.
AgreementStats pabak(const LabelVector& a, const LabelVector& b);

enum class Facet { SubjectIdentification, CategoryValues, CausalRelevance };

struct GoldRecord {
    int report_id = 0;
    std::string subject_name;
    std::string subject_type;
    rubric::Category category;
    std::string marker;  // "Not mentioned" rows are allowed and mean None
    bool cq1 = false;
    bool cq2 = false;
};

// CSV columns: report_id, subject_name, subject_type, category, marker,
// cq1, cq2. Header row required. Throws GoldFormatError.
std::vector<GoldRecord> load_gold_csv(const std::filesystem::path& path);

struct FacetAccuracy {
    double accuracy = 0.0;
    size_t compared = 0;
    // per-category disagreement share over matched subjects
    std::map<std::string, double> misattribution;
    size_t model_only_subjects = 0;  // coverage issues, reported separately
    size_t gold_only_subjects = 0;
};

// Facet-specific accuracy of the model extractions against the gold set.
// Subjects are matched by folded name within each incident; None/None cells
// count as matches unless `count_none_matches` is false.
FacetAccuracy accuracy_vs_gold(const std::vector<extraction::ExtractionResult>& model,
                               const std::vector<GoldRecord>& gold, Facet facet,
                               bool count_none_matches = true);

// Aligned (subject x category) label vectors for the kappa/PABAK statistics
// reported next to the accuracies. The second vector holds the model labels.
std::pair<LabelVector, LabelVector> gold_label_vectors(
    const std::vector<extraction::ExtractionResult>& model, const std::vector<GoldRecord>& gold,
    Facet facet);

}  // namespace harmlens::agreement
