#pragma once

#include "harmlens/corpus.hpp"
#include "harmlens/extraction.hpp"
#include "harmlens/metrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace harmlens::synth {

// A value pair planted into disjoint incident blocks: `joint` incidents
// carry both markers, the remainders of each marginal carry one.
struct PlantedPair {
    rubric::Category category_a;
    std::string marker_a;  // raw marker text; grouping derives the value key
    int marginal_a = 0;
    rubric::Category category_b;
    std::string marker_b;
    int marginal_b = 0;
    int joint = 0;
};

struct PlantSpec {
    int n_incidents = 0;
    std::uint64_t seed = 0;
    std::vector<PlantedPair> pairs;
};

struct SynthOutput {
    corpus::Corpus corpus;                               // one report per incident
    std::vector<extraction::ExtractionResult> results;   // matching extraction set
    metrics::CountTable expected;                        // exact causal-mode counts
};

// Deterministic for a given spec: the same seed regenerates byte-identical
// output. Incidents outside every planted block carry a filler marker so the
// relevance filter keeps all n_incidents. Throws BadConfig when the plant
// does not fit (capacity, joint > marginal, colliding grouped values).
SynthOutput synth_extraction(const PlantSpec& spec);

// Random extraction sets for oracle tests: up to `max_incidents` incidents
// with random subjects, markers and counterfactual judgments.
std::vector<extraction::ExtractionResult> random_extraction_set(std::uint64_t seed,
                                                                int max_incidents);

nlohmann::json count_table_to_json(const metrics::CountTable& table);

}  // namespace harmlens::synth
