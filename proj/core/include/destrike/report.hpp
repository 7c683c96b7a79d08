#pragma once

#include <destrike/evaluation.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace destrike {

struct ReportRow {
    std::string model;
    MetricSummary summary;
};

/// "0.9697 (± 0.0012)"
std::string format_mean_std(double mean, double std, int precision = 4);

/// Markdown table with one row per model: F1 and RMSE as mean (± std).
/// An empty row list yields just the header.
std::string format_table(const std::vector<ReportRow>& rows, const std::string& title = {});

/// Per-stroke-type F1/RMSE for every row that has a breakdown. Empty when none does.
std::string format_type_table(const std::vector<ReportRow>& rows);

std::string summary_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_summary_csv(const std::string& text);
std::string per_type_csv(const std::vector<ReportRow>& rows);
std::string per_image_csv(const std::vector<ImageRecord>& records);

void write_text_file(const std::string& text, const std::filesystem::path& file);
std::string read_text_file(const std::filesystem::path& file);

}  // namespace destrike
