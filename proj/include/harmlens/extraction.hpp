#pragma once

#include "harmlens/corpus.hpp"
#include "harmlens/prompt.hpp"
#include "harmlens/rubric.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace harmlens::extraction {

inline constexpr const char* kNotMentioned = "Not mentioned";

enum class MarkerType { Extracted, Inferred, None };

const char* marker_type_name(MarkerType type);

struct MarkerRecord {
    std::string marker = kNotMentioned;
    MarkerType marker_type = MarkerType::None;
    std::string source;  // verbatim excerpt or inference reasoning; empty for None
    std::optional<rubric::CounterfactualJudgment> judgment;  // absent for None
    std::string marker_harm;  // non-empty only when cq1_direct && !cq2_alternate

    bool is_none() const { return marker_type == MarkerType::None; }
    bool causally_relevant() const {
        return judgment.has_value() && judgment->cq1_direct && !judgment->cq2_alternate;
    }
};

struct HarmedSubject {
    std::string subject_id;  // "<incident_id>-S<n>"
    int incident_id = 0;
    std::set<int> report_ids;
    std::string name;
    rubric::SubjectType subject_type = rubric::SubjectType::Other;
    // one record per category, indexed by rubric::Category
    std::array<MarkerRecord, rubric::kCategoryCount> markers;

    MarkerRecord& marker(rubric::Category c) { return markers[static_cast<size_t>(c)]; }
    const MarkerRecord& marker(rubric::Category c) const {
        return markers[static_cast<size_t>(c)];
    }
};

struct ExtractionResult {
    int incident_id = 0;
    std::string description;
    std::vector<HarmedSubject> subjects;
    std::string raw_response_hash;
    std::string model_name;
    std::string rubric_version;
    int chunk_count = 1;  // >1 when the prompt byte budget forced splitting
};

enum class BackendKind { Http, Replay };

struct BackendConfig {
    BackendKind kind = BackendKind::Replay;
    std::string model_name = "gpt-5.1";
    std::string endpoint_url;  // Http only, e.g. https://host/v1/chat/completions
    std::string api_key_env = "LLM_API_KEY";
    int max_parallel = 4;
    int retry_limit = 3;
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path quarantine_dir = "quarantine";
    double temperature = 0.0;  // deterministic decoding by default
    std::size_t prompt_byte_budget = prompt::kDefaultByteBudget;
};

class TextModelBackend {
public:
    virtual ~TextModelBackend() = default;
    // Returns the model's message content for this prompt. Throws
    // BackendUnavailable / RateLimited.
    virtual std::string complete(const std::string& prompt_text) = 0;
};

// Http or Replay per config. Replay serves responses from the cache layout
// and refuses to go to the network.
std::unique_ptr<TextModelBackend> make_backend(const BackendConfig& config);

struct QuarantineRecord {
    int incident_id = 0;
    std::string reason;
    std::filesystem::path file;
};

struct ExtractionRun {
    std::vector<ExtractionResult> results;  // ordered by incident_id
    std::vector<QuarantineRecord> quarantined;
    int cache_hits = 0;
    int backend_calls = 0;
};

// Renders prompts, executes them against the backend with bounded
// parallelism, persists every raw response to the cache before parsing,
// parses, merges duplicate subjects, and quarantines incidents whose
// responses cannot be parsed.
ExtractionRun run_extraction(const corpus::Corpus& corpus, const BackendConfig& config);

// Parses one raw model response (tolerating a fenced code block wrapper)
// into a validated result. Throws ParseFailure with the violation list.
ExtractionResult parse_extraction(const std::string& raw, int incident_id);

// Duplicate-subject folding within each incident, mirroring the prompt's
// dedup rule: subjects naming the
// same entity with non-conflicting markers become one record, keeping
// the longer name, the union of report ids and the more specific marker
// per category. Identifiers are renumbered S1..Sn in appearance order.
std::vector<ExtractionResult> merge_subjects(std::vector<ExtractionResult> results);

// Lossless serialization used by the JSON-lines exports.
nlohmann::json result_to_json(const ExtractionResult& result);
ExtractionResult result_from_json(const nlohmann::json& doc);
void write_results_jsonl(const std::filesystem::path& path,
                         const std::vector<ExtractionResult>& results);
std::vector<ExtractionResult> read_results_jsonl(const std::filesystem::path& path);

}  // namespace harmlens::extraction
