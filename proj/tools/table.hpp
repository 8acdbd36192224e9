#pragma once

// Column-oriented result table rendered as CSV, JSON (array of objects) or markdown.

#include <string>
#include <vector>

#include <json.hpp>

#include "dmoments/simulation.hpp"

namespace dmoments::cli {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;

    void add(std::vector<nlohmann::json> row) { rows.push_back(std::move(row)); }
};

inline std::string cell_text(const nlohmann::json& v)
{
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_float()) {
        return format_double(v.get<double>());
    }
    if (v.is_null()) {
        return "";
    }
    return v.dump();
}

inline std::string render(const Table& t, Format f)
{
    std::string out;
    switch (f) {
        case Format::Csv: {
            for (std::size_t c = 0; c < t.columns.size(); ++c) {
                out += (c ? "," : "") + t.columns[c];
            }
            out += '\n';
            for (const auto& row : t.rows) {
                for (std::size_t c = 0; c < row.size(); ++c) {
                    out += (c ? "," : "") + cell_text(row[c]);
                }
                out += '\n';
            }
            return out;
        }
        case Format::Json: {
            auto arr = nlohmann::json::array();
            for (const auto& row : t.rows) {
                nlohmann::json obj = nlohmann::json::object();
                for (std::size_t c = 0; c < row.size(); ++c) {
                    obj[t.columns[c]] = row[c];
                }
                arr.push_back(std::move(obj));
            }
            return arr.dump(2) + "\n";
        }
        case Format::Markdown: {
            out += "|";
            for (const auto& c : t.columns) {
                out += " " + c + " |";
            }
            out += "\n|";
            for (std::size_t c = 0; c < t.columns.size(); ++c) {
                out += "---|";
            }
            out += "\n";
            for (const auto& row : t.rows) {
                out += "|";
                for (const auto& v : row) {
                    out += " " + cell_text(v) + " |";
                }
                out += "\n";
            }
            return out;
        }
    }
    return out;
}

}  // namespace dmoments::cli
