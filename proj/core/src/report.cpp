#include <destrike/report.hpp>

#include <destrike/errors.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace destrike {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Column widths count code points so the "±" sign does not skew alignment.
std::size_t display_width(const std::string& s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char ch) { return (static_cast<unsigned char>(ch) & 0xC0) != 0x80; }));
}

std::string render(const std::vector<std::vector<std::string>>& cells) {
    std::vector<std::size_t> widths(cells.front().size(), 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));
    }
    std::ostringstream out;
    const auto emit = [&](const std::vector<std::string>& row) {
        out << '|';
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << ' ' << row[i] << std::string(widths[i] - display_width(row[i]), ' ') << " |";
        }
        out << '\n';
    };
    emit(cells.front());
    out << '|';
    for (std::size_t w : widths) out << std::string(w + 2, '-') << '|';
    out << '\n';
    for (std::size_t r = 1; r < cells.size(); ++r) emit(cells[r]);
    return out.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw FormatError("bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("bad number '" + s + "'");
    }
}

}  // namespace

std::string format_mean_std(double mean, double std, int precision) {
    return fixed(mean, precision) + " (± " + fixed(std, precision) + ")";
}

std::string format_table(const std::vector<ReportRow>& rows, const std::string& title) {
    std::vector<std::vector<std::string>> cells{{"Model", "F1", "RMSE", "Runs"}};
    for (const ReportRow& r : rows) {
        const MetricSummary& s = r.summary;
        cells.push_back({r.model, format_mean_std(s.mean_f1, s.std_f1), format_mean_std(s.mean_rmse, s.std_rmse),
                         std::to_string(s.n_runs)});
    }
    std::string out;
    if (!title.empty()) out += title + "\n\n";
    return out + render(cells);
}

std::string format_type_table(const std::vector<ReportRow>& rows) {
    std::vector<std::vector<std::string>> cells{{"Model", "Stroke type", "Images", "F1", "RMSE"}};
    for (const ReportRow& r : rows) {
        for (const auto& [type, score] : r.summary.per_type) {
            cells.push_back({r.model, std::string(to_string(type)), std::to_string(score.count), fixed(score.f1, 4),
                             fixed(score.rmse, 4)});
        }
    }
    if (cells.size() == 1) return {};
    return render(cells);
}

std::string summary_csv(const std::vector<ReportRow>& rows) {
    std::string out = "model,n_runs,n_images,mean_f1,std_f1,mean_rmse,std_rmse\n";
    for (const ReportRow& r : rows) {
        const MetricSummary& s = r.summary;
        out += r.model + ',' + std::to_string(s.n_runs) + ',' + std::to_string(s.n_images) + ',' + full(s.mean_f1) +
               ',' + full(s.std_f1) + ',' + full(s.mean_rmse) + ',' + full(s.std_rmse) + '\n';
    }
    return out;
}

std::vector<ReportRow> parse_summary_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (line != "model,n_runs,n_images,mean_f1,std_f1,mean_rmse,std_rmse") {
        throw FormatError("not a summary CSV (header '" + line + "')");
    }
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7) throw FormatError("bad summary row '" + line + "'");
        ReportRow r;
        r.model = f[0];
        r.summary.n_runs = static_cast<std::size_t>(parse_double(f[1]));
        r.summary.n_images = static_cast<std::size_t>(parse_double(f[2]));
        r.summary.mean_f1 = parse_double(f[3]);
        r.summary.std_f1 = parse_double(f[4]);
        r.summary.mean_rmse = parse_double(f[5]);
        r.summary.std_rmse = parse_double(f[6]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string per_type_csv(const std::vector<ReportRow>& rows) {
    std::string out = "model,stroke_type,n_images,f1,rmse\n";
    for (const ReportRow& r : rows) {
        for (const auto& [type, score] : r.summary.per_type) {
            out += r.model + ',' + std::string(to_string(type)) + ',' + std::to_string(score.count) + ',' +
                   full(score.f1) + ',' + full(score.rmse) + '\n';
        }
    }
    return out;
}

std::string per_image_csv(const std::vector<ImageRecord>& records) {
    std::string out = "id,stroke_type,f1,rmse\n";
    for (const ImageRecord& r : records) {
        out += r.id + ',' + (r.stroke_type ? std::string(to_string(*r.stroke_type)) : std::string()) + ',' +
               full(r.f1) + ',' + full(r.rmse) + '\n';
    }
    return out;
}

void write_text_file(const std::string& text, const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out << text;
    if (!out) throw IoError("write failed: " + file.string());
}

std::string read_text_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace destrike
