#pragma once

#include "harmlens/corpus.hpp"
#include "harmlens/rubric.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace harmlens::prompt {

inline constexpr std::size_t kDefaultByteBudget = 400'000;

struct PromptRequest {
    int incident_id = 0;
    int total_report_number = 0;
    std::string reports_payload;
    std::string rendered_prompt;
    std::string prompt_hash;  // sha256 of rendered_prompt bytes
};

// The static template exactly as checked in under assets/.
std::string_view template_text();

// Numbered category list inserted at the template's list marker.
std::string render_category_list(const rubric::Rubric& rubric);

// Renders the full prompt for one incident. Throws EmptyIncident when the
// incident has no reports and OversizePrompt when the rendered prompt
// exceeds `byte_budget`.
PromptRequest build_prompt(const corpus::IncidentRecord& incident, const rubric::Rubric& rubric,
                           std::size_t byte_budget = kDefaultByteBudget);

// Splits an over-budget incident into report chunks, each rendered as its
// own prompt. A single report that cannot fit on its own still throws
// OversizePrompt. Returns one request for incidents within budget.
std::vector<PromptRequest> build_prompts_chunked(const corpus::IncidentRecord& incident,
                                                 const rubric::Rubric& rubric,
                                                 std::size_t byte_budget = kDefaultByteBudget);

}  // namespace harmlens::prompt
