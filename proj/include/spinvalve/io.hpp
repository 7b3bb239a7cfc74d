#pragma once

// Tabular outputs as CSV or JSON, each headed by the config echo.

#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spinvalve/config.hpp"
#include "spinvalve/errors.hpp"

namespace spinvalve {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::string name;  ///< file stem
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::string>> meta;

    void add_meta(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }
    void add_meta(std::string key, double value) { meta.emplace_back(std::move(key), detail::fmt_real(value)); }
};

namespace detail {

inline std::string csv_cell(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        return fmt_real(*d);
    }
    if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

inline nlohmann::json json_cell(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json();
    if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return *i;
    return std::get<std::string>(c);
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

}  // namespace detail

inline std::string echo_block(const RunConfig& cfg) {
    std::string out(echo_begin);
    out += "\n";
    std::istringstream in(to_ini(cfg));
    for (std::string line; std::getline(in, line);) out += "# " + line + "\n";
    out += echo_end;
    out += "\n";
    return out;
}

inline std::string render_csv(const Table& t, const RunConfig& cfg) {
    std::string out = echo_block(cfg);
    for (const auto& [k, v] : t.meta) out += "# " + k + " = " + v + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + detail::csv_cell(row[i]);
        out += "\n";
    }
    return out;
}

inline nlohmann::json render_json(const Table& t, const RunConfig& cfg) {
    nlohmann::json doc;
    doc["config"] = to_ini(cfg);
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [k, v] : t.meta) meta[k] = v;
    doc["meta"] = meta;
    doc["columns"] = t.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const Cell& c : row) r.push_back(detail::json_cell(c));
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    return doc;
}

/// Writes `<dir>/<name>.csv` or `.json` per cfg.output and returns the path.
inline std::filesystem::path write_table(const Table& t, const RunConfig& cfg) {
    const std::filesystem::path dir(cfg.output.dir);
    detail::ensure_directory(dir);
    const bool json = cfg.output.format == "json";
    const std::filesystem::path path = dir / (t.name + (json ? ".json" : ".csv"));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    if (json) out << render_json(t, cfg).dump(1) << "\n";
    else out << render_csv(t, cfg);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    return path;
}

}  // namespace spinvalve
