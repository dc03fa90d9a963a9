#include "harmlens/reporting.hpp"

#include "harmlens/csv.hpp"
#include "harmlens/errors.hpp"
#include "harmlens/hash.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace harmlens::reporting {

namespace {

using metrics::AmplificationEdge;
using metrics::CountTable;
using metrics::ValueKey;
using nlohmann::json;
using rubric::Category;

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

std::string fixed(double x, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, x);
    return buffer;
}

std::string percent1(double share) { return fixed(share * 100.0, 1) + "%"; }

FileEntry write_file(const std::filesystem::path& dir, const std::string& relative,
                     const std::string& content) {
    const auto path = dir / relative;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
    return FileEntry{relative, sha256_hex(content), content.size()};
}

// --- table row assembly ----------------------------------------------------

struct CategoryRow {
    std::string category;
    int count = 0;
    double prevalence = 0.0;
};

std::vector<CategoryRow> category_rows(const CountTable& table) {
    std::vector<CategoryRow> rows;
    for (const auto& category : rubric::all_categories()) {
        auto it = table.n_c.find(category);
        CategoryRow row;
        row.category = rubric::category_name(category);
        row.count = it == table.n_c.end() ? 0 : it->second;
        row.prevalence = table.N == 0 ? 0.0
                                      : round3(static_cast<double>(row.count) /
                                               static_cast<double>(table.N));
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.category < b.category;
    });
    return rows;
}

struct ValueRow {
    std::string category;
    std::string value;
    int causal_count = 0;
    double causal_prevalence = 0.0;
    int overall_count = 0;
    double overall_prevalence = 0.0;
};

std::vector<ValueRow> value_rows(const ReportBundle& bundle) {
    std::set<ValueKey> keys;
    for (const auto& [key, count] : bundle.causal.n_v) keys.insert(key);
    for (const auto& [key, count] : bundle.overall.n_v) keys.insert(key);

    const double n = static_cast<double>(bundle.causal.N);
    std::vector<ValueRow> rows;
    for (const auto& key : keys) {
        ValueRow row;
        row.category = rubric::category_name(key.category);
        row.value = key.value;
        auto causal = bundle.causal.n_v.find(key);
        auto overall = bundle.overall.n_v.find(key);
        row.causal_count = causal == bundle.causal.n_v.end() ? 0 : causal->second;
        row.overall_count = overall == bundle.overall.n_v.end() ? 0 : overall->second;
        if (bundle.causal.N > 0) {
            row.causal_prevalence = round3(row.causal_count / n);
            row.overall_prevalence = round3(row.overall_count / n);
        }
        rows.push_back(std::move(row));
    }
    return rows;  // ValueKey order: category list order, then value
}

std::string category_prevalence_csv(const CountTable& table) {
    std::string out = csv::write_row({"category", "count", "prevalence"});
    for (const auto& row : category_rows(table)) {
        out += csv::write_row({row.category, std::to_string(row.count), fixed(row.prevalence, 3)});
    }
    return out;
}

json category_prevalence_json(const CountTable& table) {
    json rows = json::array();
    for (const auto& row : category_rows(table)) {
        rows.push_back(json{{"category", row.category},
                            {"count", row.count},
                            {"prevalence", row.prevalence}});
    }
    return json{{"N", table.N}, {"rows", std::move(rows)}};
}

std::string value_prevalence_csv(const ReportBundle& bundle) {
    std::string out = csv::write_row({"category", "value", "causal_count", "causal_prevalence",
                                      "overall_count", "overall_prevalence"});
    for (const auto& row : value_rows(bundle)) {
        out += csv::write_row({row.category, row.value, std::to_string(row.causal_count),
                               fixed(row.causal_prevalence, 3), std::to_string(row.overall_count),
                               fixed(row.overall_prevalence, 3)});
    }
    return out;
}

json value_prevalence_json(const ReportBundle& bundle) {
    json rows = json::array();
    for (const auto& row : value_rows(bundle)) {
        rows.push_back(json{{"category", row.category},
                            {"value", row.value},
                            {"causal_count", row.causal_count},
                            {"causal_prevalence", row.causal_prevalence},
                            {"overall_count", row.overall_count},
                            {"overall_prevalence", row.overall_prevalence}});
    }
    return json{{"N", bundle.causal.N}, {"rows", std::move(rows)}};
}

std::string category_pairs_csv(const ReportBundle& bundle) {
    std::string out = csv::write_row({"category_a", "category_b", "count", "share"});
    for (const auto& entry : bundle.pairs.matrix) {
        out += csv::write_row({rubric::category_name(entry.category_a),
                               rubric::category_name(entry.category_b),
                               std::to_string(entry.count), fixed(round3(entry.share), 3)});
    }
    return out;
}

json category_pairs_json(const ReportBundle& bundle) {
    json rows = json::array();
    for (const auto& entry : bundle.pairs.matrix) {
        rows.push_back(json{{"category_a", rubric::category_name(entry.category_a)},
                            {"category_b", rubric::category_name(entry.category_b)},
                            {"count", entry.count},
                            {"share", round3(entry.share)}});
    }
    return json{{"N", bundle.causal.N}, {"rows", std::move(rows)}};
}

std::string amplification_csv(const ReportBundle& bundle) {
    std::string out = csv::write_row({"category_a", "value_a", "category_b", "value_b", "observed",
                                      "expected", "score", "support_ok"});
    for (const auto& edge : bundle.pairs.edges) {
        out += csv::write_row({rubric::category_name(edge.value_a.category), edge.value_a.value,
                               rubric::category_name(edge.value_b.category), edge.value_b.value,
                               std::to_string(edge.observed), fixed(round3(edge.expected), 3),
                               fixed(round3(edge.score), 3), edge.support_ok ? "true" : "false"});
    }
    return out;
}

json amplification_json(const ReportBundle& bundle) {
    json rows = json::array();
    for (const auto& edge : bundle.pairs.edges) {
        rows.push_back(json{{"category_a", rubric::category_name(edge.value_a.category)},
                            {"value_a", edge.value_a.value},
                            {"category_b", rubric::category_name(edge.value_b.category)},
                            {"value_b", edge.value_b.value},
                            {"observed", edge.observed},
                            {"expected", round3(edge.expected)},
                            {"score", round3(edge.score)},
                            {"support_ok", edge.support_ok}});
    }
    return json{{"N", bundle.causal.N},
                {"min_support", bundle.min_support},
                {"rows", std::move(rows)}};
}

// --- SVG emission ------------------------------------------------------------

class Svg {
public:
    Svg(double width, double height) : width_(width), height_(height) {}

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none") {
        body_ << "  <rect x=\"" << fixed(x, 2) << "\" y=\"" << fixed(y, 2) << "\" width=\""
              << fixed(w, 2) << "\" height=\"" << fixed(h, 2) << "\" fill=\"" << fill
              << "\" stroke=\"" << stroke << "\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, double stroke_width,
              const std::string& stroke = "#333333", bool dashed = false) {
        body_ << "  <line x1=\"" << fixed(x1, 2) << "\" y1=\"" << fixed(y1, 2) << "\" x2=\""
              << fixed(x2, 2) << "\" y2=\"" << fixed(y2, 2) << "\" stroke=\"" << stroke
              << "\" stroke-width=\"" << fixed(stroke_width, 2) << "\"";
        if (dashed) body_ << " stroke-dasharray=\"4 3\"";
        body_ << "/>\n";
    }

    void text(double x, double y, const std::string& content, int size = 12,
              const std::string& anchor = "start", const std::string& fill = "#000000") {
        body_ << "  <text x=\"" << fixed(x, 2) << "\" y=\"" << fixed(y, 2) << "\" font-size=\""
              << size << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\""
              << fill << "\">" << escape(content) << "</text>\n";
    }

    std::string finish() const {
        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width_, 0)
            << "\" height=\"" << fixed(height_, 0) << "\" viewBox=\"0 0 " << fixed(width_, 0)
            << " " << fixed(height_, 0) << "\">\n"
            << body_.str() << "</svg>\n";
        return out.str();
    }

private:
    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                default: out.push_back(c);
            }
        }
        return out;
    }

    double width_;
    double height_;
    std::ostringstream body_;
};

std::string grey_for_share(double share, double max_share) {
    const double t = max_share <= 0.0 ? 0.0 : std::min(share / max_share, 1.0);
    const int level = 255 - static_cast<int>(std::lround(t * 170.0));
    char buffer[8];
    std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x", level, level, level);
    return buffer;
}

std::string category_bar_chart(const ReportBundle& bundle) {
    const auto rows = category_rows(bundle.causal);
    const double bar_height = 18.0;
    const double gap = 6.0;
    const double left = 150.0;
    const double plot_width = 420.0;
    const double height = 40.0 + rows.size() * (bar_height + gap);
    Svg svg(left + plot_width + 90.0, height);

    svg.text(left, 20.0, "Share of incidents with the category causally relevant (N=" +
                             std::to_string(bundle.causal.N) + ")", 13);
    double max_prevalence = 0.0;
    for (const auto& row : rows) max_prevalence = std::max(max_prevalence, row.prevalence);
    if (max_prevalence == 0.0) max_prevalence = 1.0;

    double y = 36.0;
    for (const auto& row : rows) {
        const double w = plot_width * (row.prevalence / max_prevalence);
        svg.text(left - 8.0, y + bar_height - 5.0, row.category, 12, "end");
        svg.rect(left, y, w, bar_height, "#5b8db8");
        svg.text(left + w + 6.0, y + bar_height - 5.0, percent1(row.prevalence), 11);
        y += bar_height + gap;
    }
    return svg.finish();
}

std::vector<Category> top_categories(const CountTable& table, int limit) {
    std::vector<std::pair<int, Category>> ranked;
    for (const auto& [category, count] : table.n_c) ranked.emplace_back(count, category);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<Category> out;
    for (size_t i = 0; i < ranked.size() && i < static_cast<size_t>(limit); ++i) {
        out.push_back(ranked[i].second);
    }
    return out;
}

std::string value_dual_bar_chart(const ReportBundle& bundle) {
    const auto categories = top_categories(bundle.causal, bundle.top_value_categories);
    const auto rows = value_rows(bundle);

    const double bar_height = 12.0;
    const double pair_gap = 4.0;
    const double row_height = bar_height * 2 + pair_gap + 10.0;
    const double left = 220.0;
    const double plot_width = 360.0;

    // rows grouped per category, most causally prevalent values first
    std::vector<std::pair<std::string, std::vector<ValueRow>>> panels;
    for (const auto& category : categories) {
        const auto& name = rubric::category_name(category);
        std::vector<ValueRow> panel;
        for (const auto& row : rows) {
            if (row.category == name) panel.push_back(row);
        }
        std::sort(panel.begin(), panel.end(), [](const auto& a, const auto& b) {
            if (a.causal_count != b.causal_count) return a.causal_count > b.causal_count;
            return a.value < b.value;
        });
        panels.emplace_back(name, std::move(panel));
    }

    size_t total_rows = 0;
    for (const auto& [name, panel] : panels) total_rows += panel.size();
    const double height = 60.0 + total_rows * row_height + panels.size() * 28.0;
    Svg svg(left + plot_width + 100.0, std::max(height, 120.0));

    svg.text(left, 20.0, "Value prevalence: causal (outline) vs overall (grey), N=" +
                             std::to_string(bundle.causal.N), 13);
    double y = 44.0;
    for (const auto& [name, panel] : panels) {
        svg.text(20.0, y + 4.0, name, 13);
        y += 14.0;
        for (const auto& row : panel) {
            svg.text(left - 8.0, y + bar_height + 2.0, row.value, 11, "end");
            const double overall_w = plot_width * row.overall_prevalence;
            const double causal_w = plot_width * row.causal_prevalence;
            svg.rect(left, y, overall_w, bar_height, "#c8c8c8");
            svg.text(left + overall_w + 6.0, y + bar_height - 2.0, percent1(row.overall_prevalence),
                     10);
            svg.rect(left, y + bar_height + pair_gap, causal_w, bar_height, "#ffffff", "#333333");
            svg.text(left + causal_w + 6.0, y + 2 * bar_height + pair_gap - 2.0,
                     percent1(row.causal_prevalence), 10);
            y += row_height;
        }
        y += 14.0;
    }
    return svg.finish();
}

std::string pair_heatmap(const ReportBundle& bundle) {
    const auto categories = top_categories(bundle.causal, bundle.top_value_categories);
    const double cell = 86.0;
    const double left = 150.0;
    const double top = 70.0;
    const double size = categories.size() * cell;
    Svg svg(left + size + 40.0, top + size + 40.0);

    svg.text(left, 24.0, "Incidents with both categories causally relevant (count, share of N=" +
                             std::to_string(bundle.causal.N) + ")", 13);

    double max_share = 0.0;
    for (size_t i = 0; i < categories.size(); ++i) {
        for (size_t j = 0; j < categories.size(); ++j) {
            if (i == j) continue;
            max_share =
                std::max(max_share, metrics::intersectional_score(bundle.causal, categories[i],
                                                                  categories[j]));
        }
    }

    for (size_t i = 0; i < categories.size(); ++i) {
        svg.text(left - 8.0, top + i * cell + cell / 2 + 4.0, rubric::category_name(categories[i]),
                 11, "end");
        svg.text(left + i * cell + cell / 2, top - 10.0, rubric::category_name(categories[i]), 11,
                 "middle");
        for (size_t j = 0; j < categories.size(); ++j) {
            const double x = left + j * cell;
            const double y = top + i * cell;
            if (i == j) {
                svg.rect(x, y, cell, cell, "#f4f4f4", "#999999");
                continue;
            }
            const double share =
                metrics::intersectional_score(bundle.causal, categories[i], categories[j]);
            const int count = static_cast<int>(std::lround(share * bundle.causal.N));
            svg.rect(x, y, cell, cell, grey_for_share(share, max_share), "#999999");
            svg.text(x + cell / 2, y + cell / 2 + 4.0,
                     std::to_string(count) + " (" + percent1(share) + ")", 11, "middle");
        }
    }
    return svg.finish();
}

std::string amplification_diagram(const ReportBundle& bundle) {
    const auto& edges = bundle.pairs.edges;
    const double row_height = 30.0;
    const double left = 260.0;
    const double line_span = 200.0;
    const double height = 70.0 + edges.size() * row_height;
    Svg svg(left + line_span + 240.0, std::max(height, 120.0));

    svg.text(20.0, 24.0, "Amplification: observed / expected joint incidents (line width = score)",
             13);
    double y = 56.0;
    for (const auto& edge : edges) {
        const std::string label_a =
            rubric::category_name(edge.value_a.category) + ": " + edge.value_a.value;
        const std::string label_b =
            rubric::category_name(edge.value_b.category) + ": " + edge.value_b.value;
        svg.text(left - 10.0, y + 4.0, label_a, 11, "end");
        svg.line(left, y, left + line_span, y, std::min(edge.score * 2.5, 14.0), "#5b8db8",
                 !edge.support_ok);
        svg.text(left + line_span / 2, y - 6.0, fixed(round3(edge.score), 2) + "x", 11, "middle");
        svg.text(left + line_span + 10.0, y + 4.0, label_b, 11);
        y += row_height;
    }
    if (edges.empty()) svg.text(20.0, 56.0, "no value pairs at this support level", 12);
    return svg.finish();
}

}  // namespace

std::vector<FileEntry> emit_tables(const ReportBundle& bundle, const std::filesystem::path& dir,
                                   const std::set<std::string>& formats) {
    for (const auto& format : formats) {
        if (format != "csv" && format != "json") {
            throw Error(Errc::BadConfig, "unknown table format \"" + format + "\"");
        }
    }
    std::vector<FileEntry> entries;
    const bool want_csv = formats.count("csv") > 0;
    const bool want_json = formats.count("json") > 0;

    if (want_csv) {
        entries.push_back(write_file(dir, "tables/category_prevalence.csv",
                                     category_prevalence_csv(bundle.causal)));
    }
    if (want_json) {
        entries.push_back(write_file(dir, "tables/category_prevalence.json",
                                     category_prevalence_json(bundle.causal).dump(2) + "\n"));
    }
    if (want_csv) {
        entries.push_back(
            write_file(dir, "tables/value_prevalence.csv", value_prevalence_csv(bundle)));
    }
    if (want_json) {
        entries.push_back(write_file(dir, "tables/value_prevalence.json",
                                     value_prevalence_json(bundle).dump(2) + "\n"));
    }
    if (want_csv) {
        entries.push_back(write_file(dir, "tables/category_pairs.csv", category_pairs_csv(bundle)));
    }
    if (want_json) {
        entries.push_back(write_file(dir, "tables/category_pairs.json",
                                     category_pairs_json(bundle).dump(2) + "\n"));
    }
    if (want_csv) {
        entries.push_back(
            write_file(dir, "tables/amplification_edges.csv", amplification_csv(bundle)));
    }
    if (want_json) {
        entries.push_back(write_file(dir, "tables/amplification_edges.json",
                                     amplification_json(bundle).dump(2) + "\n"));
    }
    return entries;
}

std::vector<FileEntry> emit_plots(const ReportBundle& bundle, const std::filesystem::path& dir) {
    std::vector<FileEntry> entries;
    entries.push_back(
        write_file(dir, "plots/category_prevalence.svg", category_bar_chart(bundle)));
    entries.push_back(write_file(dir, "plots/value_prevalence.svg", value_dual_bar_chart(bundle)));
    entries.push_back(write_file(dir, "plots/category_pair_heatmap.svg", pair_heatmap(bundle)));
    entries.push_back(
        write_file(dir, "plots/amplification_edges.svg", amplification_diagram(bundle)));
    return entries;
}

nlohmann::json manifest_json(const ReportBundle& bundle, const std::vector<FileEntry>& files,
                             bool include_timestamp) {
    json file_nodes = json::array();
    for (const auto& entry : files) {
        file_nodes.push_back(
            json{{"path", entry.path}, {"sha256", entry.sha256}, {"bytes", entry.bytes}});
    }
    json manifest = {{"files", std::move(file_nodes)}, {"run", bundle.run_metadata}};
    if (include_timestamp) {
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char buffer[32];
        std::tm tm{};
        gmtime_r(&tt, &tm);
        std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
        manifest["generated_at"] = buffer;
    }
    return manifest;
}

}  // namespace harmlens::reporting
