#pragma once

// Tabular results and run manifests: CSV, JSON and plot-data emitters.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace nnstab {

/// Empty cells (monostate) print as an empty CSV field and JSON null. NaN
/// doubles are treated the same way.
using Cell = std::variant<std::monostate, double, std::uint64_t, std::string, bool>;

/// Which columns feed the plot-data tuples.
struct PlotColumns {
    std::string x;
    std::string y;
    std::string y_lo;
    std::string y_hi;
    std::string bound;
};

class Table {
public:
    Table(std::vector<std::string> columns, PlotColumns plot);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
    const PlotColumns& plot() const noexcept { return plot_; }

    void add_row(std::vector<Cell> row);
    std::size_t column_index(std::string_view name) const;
    const Cell& at(std::size_t row, std::string_view column) const;

    /// Marks a sweep that stopped early; emitters append a truncation marker.
    void truncate(std::string reason) { truncation_ = std::move(reason); }
    const std::optional<std::string>& truncation() const noexcept { return truncation_; }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
    PlotColumns plot_;
    std::optional<std::string> truncation_;
};

enum class Format { csv, json, plot_data };

std::optional<Format> format_from_string(std::string_view s);
std::string_view file_extension(Format f);

/// Shortest decimal that parses back to the same double; "" for NaN.
std::string format_double(double v);

/// Header line, then one line per row. A truncated table ends with
/// "# truncated: <reason>".
std::string to_csv(const Table& table);

/// Array of row objects keyed by column name. A truncated table gets a final
/// {"truncated": true, "reason": ...} element.
nlohmann::json to_json(const Table& table);

/// "# x y y_lo y_hi bound" followed by one whitespace-separated tuple per row,
/// sorted by x (stable). Missing values print as "nan".
std::string to_plot_data(const Table& table);

std::string render(const Table& table, Format format);

struct RunManifest {
    std::string subcommand;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string stream_algorithm;
    std::string artifact_version;
    std::string started_at;  // UTC, ISO 8601
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, double>> timings;
    std::vector<std::string> outputs;

    nlohmann::json to_json() const;
};

std::string utc_timestamp();

/// Throws std::runtime_error naming the path when the file cannot be written.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace nnstab
