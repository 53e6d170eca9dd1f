#include "eivcheck/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "eivcheck/errors.hpp"

namespace eivcheck {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) {
        // Trim surrounding whitespace.
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? std::string()
                                                    : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_value(const std::string& field, std::size_t row, std::size_t col) {
    if (field.empty()) throw ParseError("empty field", row, col);
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size())
        throw ParseError("not a number: '" + field + "'", row, col);
    if (!std::isfinite(value))
        throw NonFiniteValue("non-finite value at row " + std::to_string(row) + ", column " +
                             std::to_string(col));
    return value;
}

// Reads all data rows (header + body), skipping comments and blank lines.
// Returns rows of parsed doubles plus the header fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path, 0, 0);
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            table.header = split_fields(line);
            have_header = true;
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != table.header.size())
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             lineno, fields.size());
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            row.push_back(parse_value(fields[c], lineno, c + 1));
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError("empty file: " + path, 0, 0);
    return table;
}

void write_line(std::ofstream& out, const std::vector<double>& values) {
    char buf[32];
    for (std::size_t c = 0; c < values.size(); ++c) {
        const auto res = std::to_chars(buf, buf + sizeof buf, values[c],
                                       std::chars_format::general, 17);
        out.write(buf, res.ptr - buf);
        out.put(c + 1 < values.size() ? ',' : '\n');
    }
}

}  // namespace

PrimarySample load_primary(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header[0] != "y")
        throw ParseError("expected header starting with 'y'", 1, 1);
    const Eigen::Index p = static_cast<Eigen::Index>(table.header.size()) - 1;
    if (p < 1) throw ParseError("expected at least one covariate column", 1, 1);
    const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
    if (n < 2) throw DimensionMismatch("load_primary: need at least 2 rows");
    PrimarySample sample;
    sample.y.resize(n);
    sample.w.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        sample.y(i) = table.rows[static_cast<std::size_t>(i)][0];
        for (Eigen::Index k = 0; k < p; ++k)
            sample.w(i, k) = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k) + 1];
    }
    return sample;
}

ValidationSample load_validation(const std::string& path, Eigen::Index expected_p) {
    const CsvTable table = read_csv(path);
    if (table.header.size() % 2 != 0)
        throw ParseError("expected an even number of columns (w1..wp,x1..xp)", 1, 1);
    const Eigen::Index p = static_cast<Eigen::Index>(table.header.size()) / 2;
    if (p < 1) throw ParseError("expected at least one covariate column", 1, 1);
    if (expected_p > 0 && p != expected_p)
        throw DimensionMismatch("load_validation: file has p = " + std::to_string(p) +
                                ", expected p = " + std::to_string(expected_p));
    const Eigen::Index N = static_cast<Eigen::Index>(table.rows.size());
    if (N < 2) throw DimensionMismatch("load_validation: need at least 2 rows");
    ValidationSample sample;
    sample.w_tilde.resize(N, p);
    sample.x_tilde.resize(N, p);
    for (Eigen::Index s = 0; s < N; ++s) {
        for (Eigen::Index k = 0; k < p; ++k) {
            sample.w_tilde(s, k) = table.rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
            sample.x_tilde(s, k) =
                table.rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(p + k)];
        }
    }
    return sample;
}

void save_primary(const PrimarySample& sample, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path, 0, 0);
    out << "y";
    for (Eigen::Index k = 0; k < sample.p(); ++k) out << ",w" << (k + 1);
    out << "\n";
    std::vector<double> row(static_cast<std::size_t>(sample.p()) + 1);
    for (Eigen::Index i = 0; i < sample.n(); ++i) {
        row[0] = sample.y(i);
        for (Eigen::Index k = 0; k < sample.p(); ++k)
            row[static_cast<std::size_t>(k) + 1] = sample.w(i, k);
        write_line(out, row);
    }
}

void save_validation(const ValidationSample& sample, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path, 0, 0);
    for (Eigen::Index k = 0; k < sample.p(); ++k) out << (k ? "," : "") << "w" << (k + 1);
    for (Eigen::Index k = 0; k < sample.p(); ++k) out << ",x" << (k + 1);
    out << "\n";
    std::vector<double> row(2 * static_cast<std::size_t>(sample.p()));
    for (Eigen::Index s = 0; s < sample.N(); ++s) {
        for (Eigen::Index k = 0; k < sample.p(); ++k) {
            row[static_cast<std::size_t>(k)] = sample.w_tilde(s, k);
            row[static_cast<std::size_t>(sample.p() + k)] = sample.x_tilde(s, k);
        }
        write_line(out, row);
    }
}

}  // namespace eivcheck
