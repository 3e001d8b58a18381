#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "../errors.hpp"
#include "config.hpp"
#include "runner.hpp"

namespace freepoisson::cli {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

inline void write_csv(const Table& t, std::ostream& os) {
    for (std::size_t j = 0; j < t.header.size(); ++j)
        os << (j ? "," : "") << csv_field(t.header[j]);
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j)
            os << (j ? "," : "") << (row[j] ? csv_field(*row[j]) : "");
        os << '\n';
    }
}

/// Array of row objects keyed by the CSV header; empty cells become null.
inline void write_json(const Table& t, std::ostream& os) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t j = 0; j < row.size(); ++j)
            obj[t.header[j]] = row[j] ? nlohmann::ordered_json(*row[j]) : nlohmann::ordered_json(nullptr);
        rows.push_back(std::move(obj));
    }
    os << rows.dump(2) << '\n';
}

inline std::string render(const Table& t, Format f) {
    std::ostringstream ss;
    if (f == Format::Json)
        write_json(t, ss);
    else
        write_csv(t, ss);
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot open output file '" + path + "'");
    out << content;
    if (!out)
        throw UsageError("failed writing output file '" + path + "'");
}

} // namespace freepoisson::cli
