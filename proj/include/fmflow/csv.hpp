#pragma once

// CSV emission and ingestion. Numbers are written with std::to_chars
// (shortest round-trip form), so identical data produces byte-identical
// files and re-parsing them recovers the exact doubles.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "fmflow/errors.hpp"

namespace fmflow::csv {

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ConfigError("csv: missing column '" + name + "'");
    }

    std::vector<double> column_values(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

inline std::string to_string(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i) out += ',';
        out += t.header[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline void write_file(const Table& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("csv: cannot open '" + path + "' for writing");
    f << to_string(t);
}

inline Table parse(std::istream& in) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t next = line.find(',', pos);
            if (next == std::string::npos) next = line.size();
            double v = 0.0;
            const auto res = std::from_chars(line.data() + pos, line.data() + next, v);
            if (res.ec != std::errc{})
                throw ConfigError("csv: bad number '" + line.substr(pos, next - pos) + "'");
            row.push_back(v);
            pos = next + 1;
            if (next == line.size()) break;
        }
        if (row.size() != t.header.size())
            throw ConfigError("csv: row width does not match header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("csv: cannot open '" + path + "'");
    return parse(f);
}

}  // namespace fmflow::csv
