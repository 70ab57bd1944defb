#include "nnstab/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace nnstab {

Table::Table(std::vector<std::string> columns, PlotColumns plot)
    : columns_(std::move(columns)), plot_(std::move(plot)) {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (std::find(columns_.begin(), columns_.begin() + i, columns_[i]) != columns_.begin() + i)
            throw std::invalid_argument("duplicate column: " + columns_[i]);
}

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size())
        throw std::invalid_argument("row has " + std::to_string(row.size()) + " cells, table has " +
                                    std::to_string(columns_.size()) + " columns");
    rows_.push_back(std::move(row));
}

std::size_t Table::column_index(std::string_view name) const {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) throw std::out_of_range("no column named " + std::string(name));
    return static_cast<std::size_t>(it - columns_.begin());
}

const Cell& Table::at(std::size_t row, std::string_view column) const {
    return rows_.at(row).at(column_index(column));
}

std::optional<Format> format_from_string(std::string_view s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    if (s == "plot-data") return Format::plot_data;
    return std::nullopt;
}

std::string_view file_extension(Format f) {
    switch (f) {
        case Format::csv: return "csv";
        case Format::json: return "json";
        case Format::plot_data: return "dat";
    }
    return "txt";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return "";
            else if constexpr (std::is_same_v<T, double>)
                return format_double(v);
            else if constexpr (std::is_same_v<T, std::uint64_t>)
                return std::to_string(v);
            else if constexpr (std::is_same_v<T, bool>)
                return v ? "true" : "false";
            else
                return csv_escape(v);
        },
        c);
}

nlohmann::json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return nullptr;
            else if constexpr (std::is_same_v<T, double>) {
                if (std::isfinite(v)) return v;
                if (std::isnan(v)) return nullptr;
                return v > 0 ? "inf" : "-inf";
            } else
                return v;
        },
        c);
}

double cell_number(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* u = std::get_if<std::uint64_t>(&c)) return static_cast<double>(*u);
    return std::nan("");
}

}  // namespace

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns().size(); ++i) {
        if (i) out += ',';
        out += table.columns()[i];
    }
    out += '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += cell_text(row[i]);
        }
        out += '\n';
    }
    if (table.truncation()) out += "# truncated: " + *table.truncation() + "\n";
    return out;
}

nlohmann::json to_json(const Table& table) {
    auto arr = nlohmann::json::array();
    for (const auto& row : table.rows()) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns()[i]] = cell_json(row[i]);
        arr.push_back(std::move(obj));
    }
    if (table.truncation()) arr.push_back({{"truncated", true}, {"reason", *table.truncation()}});
    return arr;
}

std::string to_plot_data(const Table& table) {
    const auto& pc = table.plot();
    const std::array<std::string, 5> names{pc.x, pc.y, pc.y_lo, pc.y_hi, pc.bound};
    std::vector<std::array<double, 5>> tuples;
    for (std::size_t r = 0; r < table.rows().size(); ++r) {
        std::array<double, 5> t{};
        for (std::size_t k = 0; k < names.size(); ++k)
            t[k] = names[k].empty() ? std::nan("") : cell_number(table.at(r, names[k]));
        tuples.push_back(t);
    }
    std::stable_sort(tuples.begin(), tuples.end(),
                     [](const auto& a, const auto& b) { return a[0] < b[0]; });
    std::string out = "# x y y_lo y_hi bound\n";
    for (const auto& t : tuples) {
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (k) out += ' ';
            out += std::isnan(t[k]) ? "nan" : format_double(t[k]);
        }
        out += '\n';
    }
    if (table.truncation()) out += "# truncated: " + *table.truncation() + "\n";
    return out;
}

std::string render(const Table& table, Format format) {
    switch (format) {
        case Format::csv: return to_csv(table);
        case Format::json: return to_json(table).dump(2) + "\n";
        case Format::plot_data: return to_plot_data(table);
    }
    return {};
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& [name, seconds] : timings) t.push_back({{"operation", name}, {"seconds", seconds}});
    return {
        {"subcommand", subcommand},
        {"config_digest", config_digest},
        {"seed", seed},
        {"stream_algorithm", stream_algorithm},
        {"artifact_version", artifact_version},
        {"started_at", started_at},
        {"wall_seconds", wall_seconds},
        {"timings", t},
        {"outputs", outputs},
    };
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("failed while writing " + path.string());
}

}  // namespace nnstab
