#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace harmlens {

// Error classes map 1:1 onto CLI exit codes (see cli.cpp).
enum class Errc {
    FileNotFound = 1,
    MalformedInput,
    DuplicateIncidentId,
    EmptyReportBody,
    EmptyIncident,
    OversizePrompt,
    BackendUnavailable,
    RateLimited,
    ParseFailure,
    CacheWriteFailure,
    MalformedRules,
    EmptyValue,
    EmptyCorpus,
    SameCategory,
    ZeroMarginal,
    MisalignedVectors,
    TooFewItems,
    NonBinaryLabels,
    GoldFormatError,
    NoOverlap,
    MissingExtraction,
    IoError,
    BadConfig,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

// Machine-readable reason for rejecting a model response.
enum class ViolationKind {
    NotJson,
    MissingCategory,
    BadEnum,
    MarkerHarmWithoutCausalYes,
    BadSubjectId,
};

const char* violation_kind_name(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string field;   // e.g. "S1.Categories.Race.MarkerType"
    std::string detail;  // offending value or parser message
};

class ParseFailure : public Error {
public:
    ParseFailure(int incident_id, std::vector<Violation> violations)
        : Error(Errc::ParseFailure, describe(incident_id, violations)),
          incident_id_(incident_id),
          violations_(std::move(violations)) {}

    int incident_id() const { return incident_id_; }
    const std::vector<Violation>& violations() const { return violations_; }

private:
    static std::string describe(int incident_id, const std::vector<Violation>& violations);

    int incident_id_;
    std::vector<Violation> violations_;
};

}  // namespace harmlens
