#include "ilro/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ilro/errors.hpp"

namespace ilro {

std::string format_double(double value, int significant_digits) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general,
                                   significant_digits);
    return std::string(buf, res.ptr);
}

std::string render_csv(const Table& table, int significant_digits) {
    std::string out;
    for (size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    const size_t width = table.header.size();
    for (size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != width) {
            throw validation_error("emit_csv: table is not rectangular (row " +
                                   std::to_string(r) + ")");
        }
        for (size_t c = 0; c < width; ++c) {
            if (c) out += ',';
            out += format_double(table.rows[r][c], significant_digits);
        }
        out += '\n';
    }
    return out;
}

void emit_csv(const Table& table, const std::string& path,
              int significant_digits) {
    write_text_file(path, render_csv(table, significant_digits));
}

Table parse_csv(const std::string& text) {
    Table table;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        size_t start = 0;
        while (true) {
            const size_t pos = line.find(',', start);
            cells.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (first) {
            table.header = cells;
            first = false;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) {
            if (cell == "nan") {
                row.push_back(std::nan(""));
            } else {
                char* end = nullptr;
                row.push_back(std::strtod(cell.c_str(), &end));
                if (end == cell.c_str()) {
                    throw io_error("parse_csv: bad numeric cell '" + cell + "'");
                }
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw io_error("write failed: " + path);
}

}  // namespace ilro
