#pragma once

// Locale-independent number formatting and small CSV helpers.

#include "evobc/hilbert.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evobc {

/// Shortest form that parses back to the same double, at most 17 significant digits.
std::string format_double(double v);
/// Full-string parse; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);

/// Whitespace- or comma-separated numbers; nullopt if any token is not a number.
std::optional<std::vector<double>> parse_numbers(std::string_view s);

/// Numeric rows of a CSV file. A first line that does not parse is taken as a header.
std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path);
Matrix read_csv_matrix(const std::filesystem::path& path);

std::string csv_row(const std::vector<double>& values);
std::string matrix_csv(const Matrix& m);
/// "a b; c d"
std::string matrix_inline(const Matrix& m);
std::string vector_inline(const Vector& v);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace evobc
