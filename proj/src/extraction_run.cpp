#include "harmlens/errors.hpp"
#include "harmlens/extraction.hpp"
#include "harmlens/hash.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace harmlens::extraction {

namespace {

using nlohmann::json;

constexpr const char* kCorrectiveSuffix =
    "\n\nYour previous response could not be parsed against the required JSON format. "
    "Return the task results again as one valid JSON object following the JSON Formatting "
    "Rules exactly. Output only JSON - do not include any other content.";

struct CachedChunk {
    std::string prompt_hash;
    std::string raw_response;
    int attempts = 1;
};

std::filesystem::path cache_file_path(const BackendConfig& config, int incident_id) {
    return config.cache_dir / config.model_name / rubric::rubric_definition().version /
           (std::to_string(incident_id) + ".json");
}

std::optional<std::vector<CachedChunk>> read_cache_entry(const BackendConfig& config,
                                                         int incident_id) {
    const auto path = cache_file_path(config, incident_id);
    std::ifstream file(path, std::ios::binary);
    if (!file) return std::nullopt;
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::parse_error&) {
        return std::nullopt;  // treat a corrupt entry as a miss
    }
    if (!doc.is_object() || !doc.contains("chunks") || !doc.at("chunks").is_array()) {
        return std::nullopt;
    }
    std::vector<CachedChunk> chunks;
    for (const auto& node : doc.at("chunks")) {
        CachedChunk chunk;
        chunk.prompt_hash = node.value("prompt_hash", "");
        chunk.raw_response = node.value("raw_response", "");
        chunk.attempts = node.value("attempts", 1);
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

// Temp file then rename, so a concurrent reader never sees a torn entry.
void write_cache_entry(const BackendConfig& config, int incident_id,
                       const std::vector<CachedChunk>& chunks) {
    const auto path = cache_file_path(config, incident_id);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(Errc::CacheWriteFailure, "cannot create " + path.parent_path().string());

    json chunk_nodes = json::array();
    for (size_t i = 0; i < chunks.size(); ++i) {
        chunk_nodes.push_back(json{{"chunk_index", i},
                                   {"prompt_hash", chunks[i].prompt_hash},
                                   {"raw_response", chunks[i].raw_response},
                                   {"attempts", chunks[i].attempts}});
    }
    const json doc = {{"incident_id", incident_id},
                      {"model", config.model_name},
                      {"rubric_version", rubric::rubric_definition().version},
                      {"temperature", config.temperature},
                      {"chunks", std::move(chunk_nodes)}};

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::CacheWriteFailure, "cannot open " + tmp);
        out << doc.dump(2) << "\n";
        if (!out) throw Error(Errc::CacheWriteFailure, "write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(Errc::CacheWriteFailure, "rename failed: " + path.string());
}

class ReplayBackend : public TextModelBackend {
public:
    explicit ReplayBackend(BackendConfig config) : config_(std::move(config)) {}

    std::string complete(const std::string&) override {
        throw Error(Errc::BackendUnavailable,
                    "replay backend has no cached response under " +
                        (config_.cache_dir / config_.model_name).string() +
                        " for this prompt; run the http backend first");
    }

private:
    BackendConfig config_;
};

class HttpBackend : public TextModelBackend {
public:
    explicit HttpBackend(BackendConfig config) : config_(std::move(config)) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw Error(Errc::BackendUnavailable,
                        "environment variable " + config_.api_key_env + " is not set");
        }
        api_key_ = key;
        split_endpoint();
    }

    std::string complete(const std::string& prompt_text) override {
        const json body = {
            {"model", config_.model_name},
            {"temperature", config_.temperature},
            {"messages", json::array({json{{"role", "user"}, {"content", prompt_text}}})},
        };
        const std::string payload = body.dump();

        for (int attempt = 0; attempt <= config_.retry_limit; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(250 * (1 << (attempt - 1))));
            }
            httplib::Client client(base_url_);
            client.set_read_timeout(600, 0);
            client.set_connection_timeout(10, 0);
            httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
            auto res = client.Post(path_, headers, payload, "application/json");
            if (!res) {
                if (attempt < config_.retry_limit) continue;
                throw Error(Errc::BackendUnavailable,
                            "no response from " + base_url_ + " (key from " + config_.api_key_env +
                                "): " + httplib::to_string(res.error()));
            }
            if (res->status == 401 || res->status == 403) {
                throw Error(Errc::BackendUnavailable,
                            "authentication failed (" + std::to_string(res->status) +
                                "); check the key in " + config_.api_key_env);
            }
            if (res->status == 429 || res->status >= 500) {
                continue;  // retried until the limit, then falls through below
            }
            if (res->status != 200) {
                throw Error(Errc::BackendUnavailable,
                            "unexpected status " + std::to_string(res->status) + " from " +
                                base_url_);
            }
            return extract_content(res->body);
        }
        throw Error(Errc::RateLimited, "retry limit (" + std::to_string(config_.retry_limit) +
                                           ") exhausted against " + base_url_);
    }

private:
    void split_endpoint() {
        const std::string& url = config_.endpoint_url;
        const size_t scheme = url.find("://");
        if (scheme == std::string::npos) {
            throw Error(Errc::BadConfig, "endpoint_url must include a scheme: " + url);
        }
        const size_t path_start = url.find('/', scheme + 3);
        if (path_start == std::string::npos) {
            base_url_ = url;
            path_ = "/v1/chat/completions";
        } else {
            base_url_ = url.substr(0, path_start);
            path_ = url.substr(path_start);
        }
    }

    static std::string extract_content(const std::string& body) {
        json doc;
        try {
            doc = json::parse(body);
        } catch (const json::parse_error& e) {
            throw Error(Errc::BackendUnavailable, std::string("unparseable backend reply: ") +
                                                      e.what());
        }
        try {
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw Error(Errc::BackendUnavailable, "backend reply has no message content");
        }
    }

    BackendConfig config_;
    std::string api_key_;
    std::string base_url_;
    std::string path_;
};

std::string combined_hash(const std::vector<CachedChunk>& chunks) {
    if (chunks.size() == 1) return sha256_hex(chunks[0].raw_response);
    std::string all;
    for (const auto& chunk : chunks) {
        all += sha256_hex(chunk.raw_response);
        all.push_back('\n');
    }
    return sha256_hex(all);
}

void write_quarantine(const BackendConfig& config, int incident_id,
                      const std::vector<CachedChunk>& chunks, QuarantineRecord& record) {
    std::error_code ec;
    std::filesystem::create_directories(config.quarantine_dir, ec);
    const auto path = config.quarantine_dir / (std::to_string(incident_id) + ".txt");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (size_t i = 0; i < chunks.size(); ++i) {
        if (i > 0) out << "\n--- CHUNK " << i << " ---\n";
        out << chunks[i].raw_response;
    }
    record.file = path;
}

struct IncidentOutcome {
    std::optional<ExtractionResult> result;
    std::optional<QuarantineRecord> quarantine;
    int cache_hits = 0;
    int backend_calls = 0;
};

IncidentOutcome process_incident(const corpus::IncidentRecord& incident,
                                 const BackendConfig& config, TextModelBackend& backend) {
    IncidentOutcome outcome;
    const auto& rubric_def = rubric::rubric_definition();
    const auto prompts =
        prompt::build_prompts_chunked(incident, rubric_def, config.prompt_byte_budget);

    auto cached = read_cache_entry(config, incident.incident_id);
    const bool cache_valid = cached && cached->size() == prompts.size() &&
                             std::equal(prompts.begin(), prompts.end(), cached->begin(),
                                        [](const auto& p, const auto& c) {
                                            return p.prompt_hash == c.prompt_hash;
                                        });

    std::vector<CachedChunk> chunks;
    bool fetched_any = false;
    if (cache_valid) {
        chunks = *cached;
        outcome.cache_hits = static_cast<int>(chunks.size());
    } else {
        for (const auto& request : prompts) {
            CachedChunk chunk;
            chunk.prompt_hash = request.prompt_hash;
            chunk.raw_response = backend.complete(request.rendered_prompt);
            ++outcome.backend_calls;
            chunks.push_back(std::move(chunk));
            fetched_any = true;
        }
    }
    // raw responses are persisted before any parsing happens
    if (fetched_any) write_cache_entry(config, incident.incident_id, chunks);

    std::vector<ExtractionResult> chunk_results;
    for (size_t i = 0; i < chunks.size(); ++i) {
        try {
            chunk_results.push_back(
                parse_extraction(chunks[i].raw_response, incident.incident_id));
        } catch (const ParseFailure& first_failure) {
            if (config.kind != BackendKind::Http || chunks[i].attempts > 1) {
                QuarantineRecord record;
                record.incident_id = incident.incident_id;
                record.reason = first_failure.what();
                write_quarantine(config, incident.incident_id, chunks, record);
                outcome.quarantine = std::move(record);
                return outcome;
            }
            // one corrective re-request, then quarantine
            chunks[i].raw_response =
                backend.complete(prompts[i].rendered_prompt + kCorrectiveSuffix);
            chunks[i].attempts += 1;
            ++outcome.backend_calls;
            write_cache_entry(config, incident.incident_id, chunks);
            try {
                chunk_results.push_back(
                    parse_extraction(chunks[i].raw_response, incident.incident_id));
            } catch (const ParseFailure& second_failure) {
                QuarantineRecord record;
                record.incident_id = incident.incident_id;
                record.reason = second_failure.what();
                write_quarantine(config, incident.incident_id, chunks, record);
                outcome.quarantine = std::move(record);
                return outcome;
            }
        }
    }

    ExtractionResult merged;
    merged.incident_id = incident.incident_id;
    merged.model_name = config.model_name;
    merged.rubric_version = rubric_def.version;
    merged.chunk_count = static_cast<int>(chunks.size());
    merged.raw_response_hash = combined_hash(chunks);
    merged.description = chunk_results.front().description;
    for (auto& chunk_result : chunk_results) {
        for (auto& subject : chunk_result.subjects) {
            merged.subjects.push_back(std::move(subject));
        }
    }

    std::vector<ExtractionResult> singleton;
    singleton.push_back(std::move(merged));
    outcome.result = std::move(merge_subjects(std::move(singleton)).front());
    return outcome;
}

}  // namespace

std::unique_ptr<TextModelBackend> make_backend(const BackendConfig& config) {
    switch (config.kind) {
        case BackendKind::Http: return std::make_unique<HttpBackend>(config);
        case BackendKind::Replay: return std::make_unique<ReplayBackend>(config);
    }
    throw Error(Errc::BadConfig, "unknown backend kind");
}

ExtractionRun run_extraction(const corpus::Corpus& corpus, const BackendConfig& config) {
    if (config.max_parallel < 1) {
        throw Error(Errc::BadConfig, "max_parallel must be at least 1");
    }
    auto backend = make_backend(config);

    const size_t n = corpus.incidents.size();
    std::vector<IncidentOutcome> outcomes(n);
    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        while (true) {
            const size_t index = next.fetch_add(1);
            if (index >= n) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            try {
                outcomes[index] = process_incident(corpus.incidents[index], config, *backend);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const size_t thread_count =
        std::min<size_t>(static_cast<size_t>(config.max_parallel), std::max<size_t>(n, 1));
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (size_t i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);

    ExtractionRun run;
    for (auto& outcome : outcomes) {
        run.cache_hits += outcome.cache_hits;
        run.backend_calls += outcome.backend_calls;
        if (outcome.result) run.results.push_back(std::move(*outcome.result));
        if (outcome.quarantine) run.quarantined.push_back(std::move(*outcome.quarantine));
    }
    std::sort(run.results.begin(), run.results.end(),
              [](const auto& a, const auto& b) { return a.incident_id < b.incident_id; });
    std::sort(run.quarantined.begin(), run.quarantined.end(),
              [](const auto& a, const auto& b) { return a.incident_id < b.incident_id; });
    return run;
}

}  // namespace harmlens::extraction
