#include "harmlens/cli.hpp"
#include "harmlens/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using harmlens::Errc;
using harmlens::Error;
namespace cli = harmlens::cli;

// "Category:marker=n,Category:marker=m,joint=k"
harmlens::synth::PlantedPair parse_pair_spec(const std::string& spec) {
    auto fail = [&](const std::string& what) -> Error {
        return Error(Errc::BadConfig, "--pair \"" + spec + "\": " + what);
    };
    std::vector<std::string> parts;
    std::string current;
    for (char c : spec) {
        if (c == ',') {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(current);
    if (parts.size() != 3) throw fail("expected three comma-separated fields");

    harmlens::synth::PlantedPair pair;
    auto parse_side = [&](const std::string& side, harmlens::rubric::Category& category,
                          std::string& marker, int& marginal) {
        const size_t colon = side.find(':');
        const size_t equals = side.rfind('=');
        if (colon == std::string::npos || equals == std::string::npos || equals < colon) {
            throw fail("side \"" + side + "\" must look like Category:marker=count");
        }
        const auto parsed = harmlens::rubric::parse_category(side.substr(0, colon));
        if (!parsed) throw fail("unknown category in \"" + side + "\"");
        category = *parsed;
        marker = side.substr(colon + 1, equals - colon - 1);
        try {
            marginal = std::stoi(side.substr(equals + 1));
        } catch (...) {
            throw fail("bad count in \"" + side + "\"");
        }
    };
    parse_side(parts[0], pair.category_a, pair.marker_a, pair.marginal_a);
    parse_side(parts[1], pair.category_b, pair.marker_b, pair.marginal_b);
    const size_t equals = parts[2].rfind('=');
    if (parts[2].rfind("joint", 0) != 0 || equals == std::string::npos) {
        throw fail("third field must be joint=<count>");
    }
    try {
        pair.joint = std::stoi(parts[2].substr(equals + 1));
    } catch (...) {
        throw fail("bad joint count");
    }
    return pair;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intersectional harm analytics over AI incident report corpora"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--output", output_dir, "output directory (default: out)");
    app.add_flag("--verbose", verbose, "chatty diagnostics on stderr");

    // extract
    auto* extract = app.add_subcommand("extract", "run prompts against the backend and export");
    std::string corpus_path;
    std::string backend_kind;
    std::string cache_dir;
    std::string model_name;
    std::string endpoint_url;
    int max_parallel = -1;
    int retry_limit = -1;
    std::optional<int> dump_prompt;
    bool allow_quarantine = false;
    std::size_t byte_budget = 0;
    extract->add_option("--corpus", corpus_path, "corpus JSON document");
    extract->add_option("--backend", backend_kind, "http|replay");
    extract->add_option("--cache-dir", cache_dir, "response cache directory");
    extract->add_option("--model", model_name, "backend model name");
    extract->add_option("--endpoint", endpoint_url, "chat completions URL (http backend)");
    extract->add_option("--max-parallel", max_parallel, "in-flight request bound");
    extract->add_option("--retry-limit", retry_limit, "retries for rate limiting");
    extract->add_option("--budget", byte_budget, "prompt byte budget before chunking");
    extract
        ->add_option("--dump-prompt", dump_prompt,
                     "print the rendered prompt for one incident and exit")
        ->expected(1);
    extract->add_flag("--allow-quarantine", allow_quarantine,
                      "exit 0 even when incidents were quarantined");

    // filter
    auto* filter = app.add_subcommand("filter", "apply the counterfactual relevance filter");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "build count tables, emit tables and plots");
    std::string pair_scope;
    int min_support = -1;
    bool all_values = false;
    std::string rules_path;
    std::vector<std::string> formats;
    metrics_cmd->add_option("--pair-scope", pair_scope, "incident|same-subject");
    metrics_cmd->add_option("--min-support", min_support, "support threshold for edges");
    metrics_cmd->add_flag("--all-values", all_values,
                          "drop the top-category restriction on value pairs");
    metrics_cmd->add_option("--rules", rules_path, "grouping rules JSON overriding the defaults");
    metrics_cmd->add_option("--formats", formats, "table formats (csv, json)");

    // validate
    auto* validate = app.add_subcommand("validate", "score extractions against a gold CSV");
    std::string gold_path;
    bool exclude_none = false;
    validate->add_option("--gold", gold_path, "gold annotation CSV")->required();
    validate->add_flag("--exclude-none-agreements", exclude_none,
                       "do not count None/None cells as matches");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a planted-count synthetic corpus");
    int n_incidents = 100;
    std::uint64_t seed = 0;
    std::vector<std::string> pair_specs;
    synth_cmd->add_option("--incidents", n_incidents, "number of incidents");
    synth_cmd->add_option("--seed", seed, "generator seed");
    synth_cmd->add_option("--pair", pair_specs,
                          "planted pair: Category:marker=n,Category:marker=m,joint=k");

    // rubric export
    auto* rubric_cmd = app.add_subcommand("rubric", "rubric utilities");
    auto* rubric_export = rubric_cmd->add_subcommand("export", "emit the category list as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        cli::RunConfig config;
        if (!config_path.empty()) config = cli::load_config(config_path);
        if (!output_dir.empty()) config.output_dir = output_dir;
        config.verbose = verbose;

        if (*extract) {
            if (!corpus_path.empty()) config.corpus_path = corpus_path;
            if (!backend_kind.empty()) {
                if (backend_kind == "http") {
                    config.backend.kind = harmlens::extraction::BackendKind::Http;
                } else if (backend_kind == "replay") {
                    config.backend.kind = harmlens::extraction::BackendKind::Replay;
                } else {
                    throw Error(Errc::BadConfig, "--backend must be http|replay");
                }
            }
            if (!cache_dir.empty()) config.backend.cache_dir = cache_dir;
            if (!model_name.empty()) config.backend.model_name = model_name;
            if (!endpoint_url.empty()) config.backend.endpoint_url = endpoint_url;
            if (max_parallel > 0) config.backend.max_parallel = max_parallel;
            if (retry_limit >= 0) config.backend.retry_limit = retry_limit;
            if (byte_budget > 0) config.backend.prompt_byte_budget = byte_budget;
            cli::ExtractOptions options;
            options.allow_quarantine = allow_quarantine;
            options.dump_prompt_incident = dump_prompt;
            return cli::cmd_extract(std::move(config), options);
        }
        if (*filter) return cli::cmd_filter(config);
        if (*metrics_cmd) {
            if (!pair_scope.empty()) {
                if (pair_scope == "incident") {
                    config.pair_scope = harmlens::metrics::PairScope::Incident;
                } else if (pair_scope == "same-subject") {
                    config.pair_scope = harmlens::metrics::PairScope::SameSubject;
                } else {
                    throw Error(Errc::BadConfig, "--pair-scope must be incident|same-subject");
                }
            }
            if (min_support >= 0) config.min_support = min_support;
            if (all_values) config.top_value_categories = 0;
            if (!rules_path.empty()) config.grouping_rules_path = rules_path;
            if (!formats.empty()) {
                config.table_formats = std::set<std::string>(formats.begin(), formats.end());
            }
            return cli::cmd_metrics(config);
        }
        if (*validate) {
            config.count_none_matches = !exclude_none;
            return cli::cmd_validate(config, gold_path);
        }
        if (*synth_cmd) {
            harmlens::synth::PlantSpec spec;
            spec.n_incidents = n_incidents;
            spec.seed = seed;
            for (const auto& pair_spec : pair_specs) {
                spec.pairs.push_back(parse_pair_spec(pair_spec));
            }
            return cli::cmd_synth(config, spec);
        }
        if (*rubric_export) return cli::cmd_rubric_export();
        if (*rubric_cmd) {
            std::cerr << "rubric: expected a subcommand (export)\n";
            return static_cast<int>(Errc::BadConfig);
        }
    } catch (const Error& error) {
        std::cerr << "error: " << error.what() << "\n";
        return cli::exit_code_for(error);
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 99;
    }
    return 0;
}
