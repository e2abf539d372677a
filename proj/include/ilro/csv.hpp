#pragma once

#include <string>
#include <vector>

namespace ilro {

/// Rectangular numeric table; NaN cells render as the literal `nan`.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Locale-independent formatting with the given number of significant digits.
std::string format_double(double value, int significant_digits);

std::string render_csv(const Table& table, int significant_digits = 12);

/// Writes header + rows with 12 significant digits and `\n` terminators.
void emit_csv(const Table& table, const std::string& path,
              int significant_digits = 12);

/// Parses a CSV produced by emit_csv (used by round-trip checks).
Table parse_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ilro
