#include "harmlens/errors.hpp"

#include <sstream>

namespace harmlens {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::FileNotFound: return "FileNotFound";
        case Errc::MalformedInput: return "MalformedInput";
        case Errc::DuplicateIncidentId: return "DuplicateIncidentId";
        case Errc::EmptyReportBody: return "EmptyReportBody";
        case Errc::EmptyIncident: return "EmptyIncident";
        case Errc::OversizePrompt: return "OversizePrompt";
        case Errc::BackendUnavailable: return "BackendUnavailable";
        case Errc::RateLimited: return "RateLimited";
        case Errc::ParseFailure: return "ParseFailure";
        case Errc::CacheWriteFailure: return "CacheWriteFailure";
        case Errc::MalformedRules: return "MalformedRules";
        case Errc::EmptyValue: return "EmptyValue";
        case Errc::EmptyCorpus: return "EmptyCorpus";
        case Errc::SameCategory: return "SameCategory";
        case Errc::ZeroMarginal: return "ZeroMarginal";
        case Errc::MisalignedVectors: return "MisalignedVectors";
        case Errc::TooFewItems: return "TooFewItems";
        case Errc::NonBinaryLabels: return "NonBinaryLabels";
        case Errc::GoldFormatError: return "GoldFormatError";
        case Errc::NoOverlap: return "NoOverlap";
        case Errc::MissingExtraction: return "MissingExtraction";
        case Errc::IoError: return "IoError";
        case Errc::BadConfig: return "BadConfig";
    }
    return "UnknownError";
}

const char* violation_kind_name(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::NotJson: return "NotJson";
        case ViolationKind::MissingCategory: return "MissingCategory";
        case ViolationKind::BadEnum: return "BadEnum";
        case ViolationKind::MarkerHarmWithoutCausalYes: return "MarkerHarmWithoutCausalYes";
        case ViolationKind::BadSubjectId: return "BadSubjectId";
    }
    return "UnknownViolation";
}

std::string ParseFailure::describe(int incident_id, const std::vector<Violation>& violations) {
    std::ostringstream oss;
    oss << "incident " << incident_id << ": ";
    for (size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) oss << "; ";
        oss << violation_kind_name(violations[i].kind);
        if (!violations[i].field.empty()) oss << " at " << violations[i].field;
        if (!violations[i].detail.empty()) oss << " (" << violations[i].detail << ")";
    }
    if (violations.empty()) oss << "no violations recorded";
    return oss.str();
}

}  // namespace harmlens
