#include "harmlens/prompt.hpp"

#include "harmlens/errors.hpp"
#include "harmlens/hash.hpp"

#include "harmlens/generated/prompt_template.hpp"

#include <sstream>

namespace harmlens::prompt {

namespace {

constexpr std::string_view kListMarker = "[List of identity categories and their exemplary values]";
constexpr std::string_view kIncidentSlot = "IncidentID: ``{}''";
constexpr std::string_view kReportNumberSlot = "TotalReportNumber: ``{}''";
constexpr std::string_view kReportsSlot = "Reports: ``{}''";

// Replaces the single occurrence of `slot`; the template is validated by
// tests to contain each slot exactly once.
void fill_slot(std::string& text, std::string_view slot, std::string_view value) {
    const size_t pos = text.find(slot);
    if (pos == std::string::npos) {
        throw Error(Errc::MalformedInput,
                    "prompt template is missing slot: " + std::string(slot));
    }
    std::string filled(slot);
    filled.replace(filled.find("{}"), 2, value);
    text.replace(pos, slot.size(), filled);
}

std::string serialize_reports(const std::vector<corpus::ReportRecord>& reports) {
    std::ostringstream payload;
    for (size_t i = 0; i < reports.size(); ++i) {
        if (i > 0) payload << "\n";
        payload << "--- REPORT " << reports[i].report_id << " ---\n" << reports[i].body;
    }
    return payload.str();
}

PromptRequest render(int incident_id, const std::vector<corpus::ReportRecord>& reports,
                     const rubric::Rubric& rubric) {
    PromptRequest request;
    request.incident_id = incident_id;
    request.total_report_number = static_cast<int>(reports.size());
    request.reports_payload = serialize_reports(reports);

    std::string text(template_text());
    const size_t marker_pos = text.find(kListMarker);
    if (marker_pos == std::string::npos) {
        throw Error(Errc::MalformedInput, "prompt template is missing the category list marker");
    }
    text.replace(marker_pos, kListMarker.size(), render_category_list(rubric));

    fill_slot(text, kIncidentSlot, std::to_string(incident_id));
    fill_slot(text, kReportNumberSlot, std::to_string(request.total_report_number));
    fill_slot(text, kReportsSlot, request.reports_payload);

    request.rendered_prompt = std::move(text);
    request.prompt_hash = sha256_hex(request.rendered_prompt);
    return request;
}

}  // namespace

std::string_view template_text() {
    return {reinterpret_cast<const char*>(assets::prompt_template_data),
            assets::prompt_template_size};
}

std::string render_category_list(const rubric::Rubric& rubric) {
    std::ostringstream list;
    list << "List of Identity Categories and Their Exemplary Values";
    int number = 1;
    for (const auto& category : rubric.categories) {
        list << "\n" << number++ << ". " << category.name << " (e.g., ";
        for (size_t i = 0; i < category.exemplary_values.size(); ++i) {
            if (i > 0) list << ", ";
            list << category.exemplary_values[i];
        }
        list << ")";
    }
    return list.str();
}

PromptRequest build_prompt(const corpus::IncidentRecord& incident, const rubric::Rubric& rubric,
                           std::size_t byte_budget) {
    if (incident.reports.empty()) {
        throw Error(Errc::EmptyIncident,
                    "incident " + std::to_string(incident.incident_id) + " has no reports");
    }
    PromptRequest request = render(incident.incident_id, incident.reports, rubric);
    if (request.rendered_prompt.size() > byte_budget) {
        throw Error(Errc::OversizePrompt,
                    "incident " + std::to_string(incident.incident_id) + " renders to " +
                        std::to_string(request.rendered_prompt.size()) + " bytes (budget " +
                        std::to_string(byte_budget) + ")");
    }
    return request;
}

std::vector<PromptRequest> build_prompts_chunked(const corpus::IncidentRecord& incident,
                                                 const rubric::Rubric& rubric,
                                                 std::size_t byte_budget) {
    if (incident.reports.empty()) {
        throw Error(Errc::EmptyIncident,
                    "incident " + std::to_string(incident.incident_id) + " has no reports");
    }
    {
        PromptRequest whole = render(incident.incident_id, incident.reports, rubric);
        if (whole.rendered_prompt.size() <= byte_budget) return {std::move(whole)};
    }

    // Greedy packing in report order; merge_subjects recombines the chunks.
    std::vector<PromptRequest> chunks;
    std::vector<corpus::ReportRecord> pending;
    for (const auto& report : incident.reports) {
        pending.push_back(report);
        PromptRequest attempt = render(incident.incident_id, pending, rubric);
        if (attempt.rendered_prompt.size() <= byte_budget) continue;
        if (pending.size() == 1) {
            throw Error(Errc::OversizePrompt,
                        "report " + std::to_string(report.report_id) + " of incident " +
                            std::to_string(incident.incident_id) +
                            " exceeds the prompt byte budget on its own");
        }
        pending.pop_back();
        chunks.push_back(render(incident.incident_id, pending, rubric));
        pending.clear();
        pending.push_back(report);
        PromptRequest single = render(incident.incident_id, pending, rubric);
        if (single.rendered_prompt.size() > byte_budget) {
            throw Error(Errc::OversizePrompt,
                        "report " + std::to_string(report.report_id) + " of incident " +
                            std::to_string(incident.incident_id) +
                            " exceeds the prompt byte budget on its own");
        }
    }
    if (!pending.empty()) chunks.push_back(render(incident.incident_id, pending, rubric));
    return chunks;
}

}  // namespace harmlens::prompt
