#include "evobc/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace evobc {

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (s.empty()) {
        return std::nullopt;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

std::optional<std::vector<double>> parse_numbers(std::string_view s) {
    std::vector<double> out;
    std::size_t i = 0;
    auto sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
    while (i < s.size()) {
        while (i < s.size() && sep(s[i])) {
            ++i;
        }
        if (i == s.size()) {
            break;
        }
        std::size_t j = i;
        while (j < s.size() && !sep(s[j])) {
            ++j;
        }
        const auto v = parse_double(s.substr(i, j - i));
        if (!v) {
            return std::nullopt;
        }
        out.push_back(*v);
        i = j;
    }
    return out;
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidParameter("cannot open " + path.string());
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r" || line[0] == '#') {
            continue;
        }
        auto nums = parse_numbers(line);
        if (!nums) {
            if (rows.empty() && lineno == 1) {
                continue;
            }
            throw InvalidParameter(path.string() + ":" + std::to_string(lineno) + ": not a numeric row");
        }
        if (!nums->empty()) {
            rows.push_back(std::move(*nums));
        }
    }
    return rows;
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) {
        throw InvalidParameter(path.string() + ": empty matrix");
    }
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) {
            throw InvalidParameter(path.string() + ": ragged rows");
        }
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return m;
}

std::string csv_row(const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            s += ',';
        }
        s += format_double(values[i]);
    }
    return s;
}

std::string matrix_csv(const Matrix& m) {
    std::string s;
    for (Index i = 0; i < m.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Index j = 0; j < m.cols(); ++j) {
            row[static_cast<std::size_t>(j)] = m(i, j);
        }
        s += csv_row(row) + "\n";
    }
    return s;
}

std::string matrix_inline(const Matrix& m) {
    std::string s;
    for (Index i = 0; i < m.rows(); ++i) {
        if (i) {
            s += "; ";
        }
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) {
                s += ' ';
            }
            s += format_double(m(i, j));
        }
    }
    return s;
}

std::string vector_inline(const Vector& v) {
    std::string s;
    for (Index i = 0; i < v.size(); ++i) {
        if (i) {
            s += ' ';
        }
        s += format_double(v(i));
    }
    return s;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidParameter("cannot write " + path.string());
    }
    out << text;
    if (!text.empty() && text.back() != '\n') {
        out << '\n';
    }
}

}  // namespace evobc
