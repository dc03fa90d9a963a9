#include "harmlens/cli.hpp"

#include "harmlens/agreement.hpp"
#include "harmlens/errors.hpp"
#include "harmlens/hash.hpp"
#include "harmlens/normalization.hpp"
#include "harmlens/relevance.hpp"
#include "harmlens/reporting.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

namespace harmlens::cli {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

// Deterministic per-stage provenance record; no timestamps, so stage
// outputs stay byte-identical across reruns.
void write_run_metadata(const RunConfig& config, const std::filesystem::path& stage_dir,
                        const std::string& command, const std::string& model_name) {
    const json doc = {{"command", command},
                      {"config_hash", config_hash(config)},
                      {"rubric_version", rubric::rubric_definition().version},
                      {"model_name", model_name},
                      {"tool_version", kToolVersion},
                      {"modules",
                       {{"corpus", 1},
                        {"rubric", 1},
                        {"prompting", 1},
                        {"extraction", 1},
                        {"relevance", 1},
                        {"normalization", 1},
                        {"metrics", 1},
                        {"agreement", 1},
                        {"reporting", 1}}}};
    write_text(stage_dir / "run_metadata.json", doc.dump(2) + "\n");
}

std::string pair_scope_name(metrics::PairScope scope) {
    return scope == metrics::PairScope::Incident ? "incident" : "same-subject";
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(Errc::FileNotFound, "config file not found: " + path.string());
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::parse_error& e) {
        throw Error(Errc::BadConfig, path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw Error(Errc::BadConfig, "config must be a JSON object");

    RunConfig config;
    try {
        if (doc.contains("corpus_path")) config.corpus_path = doc.at("corpus_path").get<std::string>();
        if (doc.contains("output_dir")) config.output_dir = doc.at("output_dir").get<std::string>();
        if (doc.contains("grouping_rules_path") && !doc.at("grouping_rules_path").is_null()) {
            config.grouping_rules_path = doc.at("grouping_rules_path").get<std::string>();
        }
        if (doc.contains("min_support")) config.min_support = doc.at("min_support").get<int>();
        if (doc.contains("top_value_categories")) {
            config.top_value_categories = doc.at("top_value_categories").get<int>();
        }
        if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("pair_scope")) {
            const std::string scope = doc.at("pair_scope").get<std::string>();
            if (scope == "incident") {
                config.pair_scope = metrics::PairScope::Incident;
            } else if (scope == "same-subject") {
                config.pair_scope = metrics::PairScope::SameSubject;
            } else {
                throw Error(Errc::BadConfig, "pair_scope must be incident|same-subject");
            }
        }
        if (doc.contains("table_formats")) {
            config.table_formats.clear();
            for (const auto& f : doc.at("table_formats")) {
                config.table_formats.insert(f.get<std::string>());
            }
        }
        if (doc.contains("count_none_matches")) {
            config.count_none_matches = doc.at("count_none_matches").get<bool>();
        }
        if (doc.contains("backend")) {
            const auto& b = doc.at("backend");
            if (b.contains("kind")) {
                const std::string kind = b.at("kind").get<std::string>();
                if (kind == "http") {
                    config.backend.kind = extraction::BackendKind::Http;
                } else if (kind == "replay") {
                    config.backend.kind = extraction::BackendKind::Replay;
                } else {
                    throw Error(Errc::BadConfig, "backend.kind must be http|replay");
                }
            }
            if (b.contains("model_name")) config.backend.model_name = b.at("model_name");
            if (b.contains("endpoint_url")) config.backend.endpoint_url = b.at("endpoint_url");
            if (b.contains("api_key_env")) config.backend.api_key_env = b.at("api_key_env");
            if (b.contains("max_parallel")) config.backend.max_parallel = b.at("max_parallel");
            if (b.contains("retry_limit")) config.backend.retry_limit = b.at("retry_limit");
            if (b.contains("temperature")) config.backend.temperature = b.at("temperature");
            if (b.contains("prompt_byte_budget")) {
                config.backend.prompt_byte_budget = b.at("prompt_byte_budget");
            }
            if (b.contains("cache_dir")) {
                config.backend.cache_dir = b.at("cache_dir").get<std::string>();
            } else {
                config.backend.cache_dir.clear();
            }
            if (b.contains("quarantine_dir")) {
                config.backend.quarantine_dir = b.at("quarantine_dir").get<std::string>();
            } else {
                config.backend.quarantine_dir.clear();
            }
        } else {
            config.backend.cache_dir.clear();
            config.backend.quarantine_dir.clear();
        }
    } catch (const json::exception& e) {
        throw Error(Errc::BadConfig, path.string() + ": " + e.what());
    }
    if (config.backend.max_parallel < 1) {
        throw Error(Errc::BadConfig, "backend.max_parallel must be >= 1");
    }
    return config;
}

nlohmann::json config_to_json(const RunConfig& config) {
    return json{{"corpus_path", config.corpus_path.string()},
                {"output_dir", config.output_dir.string()},
                {"grouping_rules_path", config.grouping_rules_path
                                            ? json(config.grouping_rules_path->string())
                                            : json(nullptr)},
                {"min_support", config.min_support},
                {"pair_scope", pair_scope_name(config.pair_scope)},
                {"top_value_categories", config.top_value_categories},
                {"table_formats", config.table_formats},
                {"seed", config.seed},
                {"count_none_matches", config.count_none_matches},
                {"backend",
                 {{"kind", config.backend.kind == extraction::BackendKind::Http ? "http" : "replay"},
                  {"model_name", config.backend.model_name},
                  {"endpoint_url", config.backend.endpoint_url},
                  {"api_key_env", config.backend.api_key_env},
                  {"max_parallel", config.backend.max_parallel},
                  {"retry_limit", config.backend.retry_limit},
                  {"cache_dir", config.backend.cache_dir.string()},
                  {"quarantine_dir", config.backend.quarantine_dir.string()},
                  {"temperature", config.backend.temperature},
                  {"prompt_byte_budget", config.backend.prompt_byte_budget}}}};
}

std::string config_hash(const RunConfig& config) {
    return sha256_hex(config_to_json(config).dump());
}

std::filesystem::path extraction_export_path(const RunConfig& config) {
    return config.output_dir / "extract" / "extraction.jsonl";
}

std::filesystem::path filtered_export_path(const RunConfig& config) {
    return config.output_dir / "filter" / "filtered.jsonl";
}

std::filesystem::path metrics_dir(const RunConfig& config) {
    return config.output_dir / "metrics";
}

int cmd_extract(RunConfig config, const ExtractOptions& options) {
    const auto corpus = corpus::load_corpus(config.corpus_path);
    if (config.verbose) {
        const auto stats = corpus::corpus_stats(corpus);
        std::cerr << "corpus: " << stats.incident_count << " incidents, " << stats.report_count
                  << " reports (" << stats.min_reports << ".." << stats.max_reports
                  << " per incident, mean " << stats.mean_reports << ", multi-report share "
                  << stats.multi_report_share << ")\n";
    }

    if (options.dump_prompt_incident) {
        const int wanted = *options.dump_prompt_incident;
        const auto it = std::find_if(
            corpus.incidents.begin(), corpus.incidents.end(),
            [&](const corpus::IncidentRecord& inc) { return inc.incident_id == wanted; });
        if (it == corpus.incidents.end()) {
            throw Error(Errc::BadConfig,
                        "incident " + std::to_string(wanted) + " is not in the corpus");
        }
        const auto request = prompt::build_prompt(*it, rubric::rubric_definition(),
                                                  config.backend.prompt_byte_budget);
        std::cout << request.rendered_prompt;
        return 0;
    }

    if (config.backend.cache_dir.empty()) config.backend.cache_dir = config.output_dir / "cache";
    if (config.backend.quarantine_dir.empty()) {
        config.backend.quarantine_dir = config.output_dir / "extract" / "quarantine";
    }

    const auto run = extraction::run_extraction(corpus, config.backend);

    const auto export_path = extraction_export_path(config);
    std::error_code ec;
    std::filesystem::create_directories(export_path.parent_path(), ec);
    extraction::write_results_jsonl(export_path, run.results);
    write_run_metadata(config, export_path.parent_path(), "extract", config.backend.model_name);

    size_t subjects = 0;
    for (const auto& result : run.results) subjects += result.subjects.size();
    std::cout << "extracted incidents: " << run.results.size() << ", subjects: " << subjects
              << ", quarantined: " << run.quarantined.size() << " (cache hits " << run.cache_hits
              << ", backend calls " << run.backend_calls << ")\n";
    for (const auto& record : run.quarantined) {
        std::cerr << "quarantined incident " << record.incident_id << " -> "
                  << record.file.string() << "\n  " << record.reason << "\n";
    }
    if (!run.quarantined.empty() && !options.allow_quarantine) return kQuarantineExitCode;
    return 0;
}

int cmd_filter(const RunConfig& config) {
    const auto extraction_path = extraction_export_path(config);
    if (!std::filesystem::exists(extraction_path)) {
        throw Error(Errc::MissingExtraction,
                    "no extraction export at " + extraction_path.string() + "; run extract first");
    }
    const auto before = extraction::read_results_jsonl(extraction_path);
    const auto filtered = relevance::filter_relevant(before);
    const auto report = relevance::relevance_report(before, filtered);

    const auto filtered_path = filtered_export_path(config);
    std::error_code ec;
    std::filesystem::create_directories(filtered_path.parent_path(), ec);
    extraction::write_results_jsonl(filtered_path, filtered.incidents);
    write_text(filtered_path.parent_path() / "relevance_summary.json",
               relevance::summary_to_json(filtered, report).dump(2) + "\n");
    const std::string model = before.empty() ? "unknown" : before.front().model_name;
    write_run_metadata(config, filtered_path.parent_path(), "filter", model);

    if (filtered.N == 0) {
        std::cerr << "warning: no incident passed the relevance filter (N=0)\n";
    }
    std::cout << "incidents: " << filtered.N << ", subjects: " << filtered.subject_count() << "\n";
    return 0;
}

int cmd_metrics(const RunConfig& config) {
    const auto filtered_path = filtered_export_path(config);
    if (!std::filesystem::exists(filtered_path)) {
        throw Error(Errc::MissingExtraction,
                    "no filtered export at " + filtered_path.string() + "; run filter first");
    }
    const auto extraction_path = extraction_export_path(config);
    if (!std::filesystem::exists(extraction_path)) {
        throw Error(Errc::MissingExtraction,
                    "no extraction export at " + extraction_path.string() + "; run extract first");
    }

    relevance::FilteredCorpus filtered;
    filtered.incidents = extraction::read_results_jsonl(filtered_path);
    filtered.N = static_cast<int>(filtered.incidents.size());
    const auto summary_path = filtered_path.parent_path() / "relevance_summary.json";
    if (std::filesystem::exists(summary_path)) {
        std::ifstream summary(summary_path);
        json doc = json::parse(summary, nullptr, false);
        if (doc.is_object()) {
            filtered.dropped_markers = doc.value("dropped_markers", 0);
            filtered.dropped_subjects = doc.value("dropped_subjects", 0);
            filtered.dropped_incidents = doc.value("dropped_incidents", 0);
        }
    }
    if (filtered.N == 0) {
        throw Error(Errc::EmptyCorpus, "the filtered corpus is empty; nothing to measure");
    }
    const auto prefilter = extraction::read_results_jsonl(extraction_path);
    const auto rules = normalization::load_grouping_rules(config.grouping_rules_path);

    normalization::GroupingLog log;
    reporting::ReportBundle bundle;
    bundle.causal = metrics::build_count_table(filtered, rules, metrics::CountMode::Causal,
                                               config.pair_scope, nullptr, &log);
    bundle.overall = metrics::build_count_table(filtered, rules, metrics::CountMode::Overall,
                                                config.pair_scope, &prefilter, &log);
    bundle.pairs = metrics::all_pairs(bundle.causal, config.min_support,
                                      config.top_value_categories);
    bundle.min_support = config.min_support;
    bundle.top_value_categories = config.top_value_categories;
    bundle.run_metadata = {
        {"config_hash", config_hash(config)},
        {"rubric_version", rubric::rubric_definition().version},
        {"model_name", prefilter.empty() ? "unknown" : prefilter.front().model_name},
        {"N", filtered.N},
        {"dropped_subjects", filtered.dropped_subjects},
        {"dropped_incidents", filtered.dropped_incidents},
        {"min_support", config.min_support},
        {"pair_scope", pair_scope_name(config.pair_scope)},
    };

    const auto out_dir = metrics_dir(config);
    auto files = reporting::emit_tables(bundle, out_dir, config.table_formats);
    const auto plot_files = reporting::emit_plots(bundle, out_dir);
    files.insert(files.end(), plot_files.begin(), plot_files.end());
    {
        const std::string normalization_report = log.to_json().dump(2) + "\n";
        write_text(out_dir / "normalization_report.json", normalization_report);
        files.push_back(reporting::FileEntry{"normalization_report.json",
                                             sha256_hex(normalization_report),
                                             normalization_report.size()});
    }
    write_text(out_dir / "manifest.json",
               reporting::manifest_json(bundle, files).dump(2) + "\n");
    write_run_metadata(config, out_dir, "metrics",
                       bundle.run_metadata.value("model_name", "unknown"));

    std::cout << "wrote " << files.size() << " files under " << out_dir.string() << " (N="
              << filtered.N << ")\n";
    return 0;
}

int cmd_validate(const RunConfig& config, const std::filesystem::path& gold_path) {
    const auto extraction_path = extraction_export_path(config);
    if (!std::filesystem::exists(extraction_path)) {
        throw Error(Errc::MissingExtraction,
                    "no extraction export at " + extraction_path.string() + "; run extract first");
    }
    const auto model = extraction::read_results_jsonl(extraction_path);
    const auto gold = agreement::load_gold_csv(gold_path);

    const auto subjects = agreement::accuracy_vs_gold(model, gold,
                                                      agreement::Facet::SubjectIdentification,
                                                      config.count_none_matches);
    const auto values = agreement::accuracy_vs_gold(model, gold, agreement::Facet::CategoryValues,
                                                    config.count_none_matches);
    const auto relevance_facet = agreement::accuracy_vs_gold(
        model, gold, agreement::Facet::CausalRelevance, config.count_none_matches);

    const auto [gold_values, model_values] =
        agreement::gold_label_vectors(model, gold, agreement::Facet::CategoryValues);
    const auto kappa = agreement::cohen_kappa(gold_values, model_values);
    const auto [gold_relevance, model_relevance] =
        agreement::gold_label_vectors(model, gold, agreement::Facet::CausalRelevance);
    const auto relevance_pabak = agreement::pabak(gold_relevance, model_relevance);

    auto pct = [](double x) { return std::to_string(std::round(x * 1000.0) / 10.0); };
    std::cout << "subject identification accuracy: " << pct(subjects.accuracy) << "% over "
              << subjects.compared << " subjects\n";
    std::cout << "category value accuracy:         " << pct(values.accuracy) << "% over "
              << values.compared << " judgments\n";
    std::cout << "causal relevance accuracy:       " << pct(relevance_facet.accuracy) << "% over "
              << relevance_facet.compared << " judgments\n";
    std::cout << "Cohen's kappa (values):          "
              << (kappa.kappa ? std::to_string(*kappa.kappa) : "undefined") << "\n";
    std::cout << "PABAK (relevance):               "
              << (relevance_pabak.pabak ? std::to_string(*relevance_pabak.pabak) : "undefined")
              << " (p_o=" << relevance_pabak.p_o << ")\n";
    std::cout << "per-category disagreement (share of matched subjects):\n";
    for (const auto& [category, rate] : values.misattribution) {
        if (rate > 0.0) std::cout << "  " << category << ": " << pct(rate) << "%\n";
    }

    json misattribution = json::object();
    for (const auto& [category, rate] : values.misattribution) misattribution[category] = rate;
    const json report = {
        {"subject_identification",
         {{"accuracy", subjects.accuracy},
          {"compared", subjects.compared},
          {"gold_only", subjects.gold_only_subjects},
          {"model_only", subjects.model_only_subjects}}},
        {"category_values",
         {{"accuracy", values.accuracy},
          {"compared", values.compared},
          {"kappa", kappa.kappa ? json(*kappa.kappa) : json(nullptr)},
          {"p_o", kappa.p_o},
          {"p_e", kappa.p_e}}},
        {"causal_relevance",
         {{"accuracy", relevance_facet.accuracy},
          {"compared", relevance_facet.compared},
          {"pabak", relevance_pabak.pabak ? json(*relevance_pabak.pabak) : json(nullptr)},
          {"p_o", relevance_pabak.p_o}}},
        {"misattribution", std::move(misattribution)},
    };
    write_text(config.output_dir / "validate" / "agreement_report.json", report.dump(2) + "\n");
    write_run_metadata(config, config.output_dir / "validate", "validate",
                       model.empty() ? "unknown" : model.front().model_name);
    return 0;
}

int cmd_synth(const RunConfig& config, const synth::PlantSpec& spec) {
    const auto output = synth::synth_extraction(spec);
    const auto dir = config.output_dir / "synth";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    write_text(dir / "corpus.json", corpus::corpus_to_json(output.corpus).dump(2) + "\n");
    extraction::write_results_jsonl(dir / "extraction.jsonl", output.results);
    write_text(dir / "expected_counts.json",
               synth::count_table_to_json(output.expected).dump(2) + "\n");
    write_run_metadata(config, dir, "synth", "synthetic");

    std::cout << "synthesized " << output.corpus.incidents.size() << " incidents (seed "
              << spec.seed << ") under " << dir.string() << "\n";
    return 0;
}

int cmd_rubric_export() {
    const auto& rubric = rubric::rubric_definition();
    json categories = json::array();
    for (const auto& info : rubric.categories) {
        categories.push_back(json{{"name", info.name},
                                  {"exemplary_values", info.exemplary_values}});
    }
    const json doc = {{"version", rubric.version},
                      {"categories", std::move(categories)},
                      {"subject_types", rubric.subject_type_names},
                      {"counterfactual_questions",
                       {{"cq1", rubric.cq1_template}, {"cq2", rubric.cq2_template}}}};
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int exit_code_for(const Error& error) { return static_cast<int>(error.code()); }

}  // namespace harmlens::cli
