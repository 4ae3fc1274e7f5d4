#include "hsicreg/csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "hsicreg/errors.hpp"

namespace hsicreg {

namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) fail(ErrorKind::Data, "csv line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.empty()) continue;
        auto fields = split_line(line, line_no);
        if (table.header.empty()) {
            for (auto& f : fields) f = trim(f);
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            fail(ErrorKind::Data, "csv line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(table.header.size()) + " fields, found " +
                                      std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) fail(ErrorKind::Data, "csv: missing header row");
    return table;
}

Dataset load_csv(const std::string& path, const std::string& response, const std::vector<std::string>& predictors) {
    std::ifstream file(path);
    if (!file) fail(ErrorKind::Input, "cannot open '" + path + "'");
    const CsvTable table = read_csv(file);

    auto column = [&](const std::string& name) {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) fail(ErrorKind::Input, "csv '" + path + "': no column named '" + name + "'");
        return static_cast<std::size_t>(it - table.header.begin());
    };

    const std::size_t y_col = column(response);
    std::vector<std::string> names = predictors;
    if (names.empty()) {
        for (const auto& h : table.header) {
            if (h != response) names.push_back(h);
        }
    }
    std::vector<std::size_t> x_cols;
    for (const auto& name : names) x_cols.push_back(column(name));

    const std::size_t n = table.rows.size();
    if (n < names.size() + 2) {
        fail(ErrorKind::Input, "csv '" + path + "': " + std::to_string(n) + " data rows is too few for " +
                                   std::to_string(names.size()) + " predictors (need at least " +
                                   std::to_string(names.size() + 2) + ")");
    }

    auto parse = [&](std::size_t row, std::size_t col) {
        const std::string cell = trim(table.rows[row][col]);
        double v = 0.0;
        const char* end = cell.data() + cell.size();
        const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
        if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
            fail(ErrorKind::Data, "csv '" + path + "': row " + std::to_string(row + 1) + ", column '" +
                                      table.header[col] + "': '" + cell + "' is not a finite number");
        }
        return v;
    };

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(names.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        y(r) = parse(i, y_col);
        for (std::size_t j = 0; j < x_cols.size(); ++j) x(r, static_cast<Eigen::Index>(j)) = parse(i, x_cols[j]);
    }
    return Dataset::make(std::move(x), std::move(y), std::move(names));
}

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return {buf.data(), ptr};
}

void write_sample_csv(std::ostream& out, const SimulatedSample& sample) {
    const Dataset& d = sample.data;
    for (const auto& name : d.names) out << name << ',';
    out << "y,eta\n";
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        for (Eigen::Index j = 0; j < d.dim(); ++j) out << format_double(d.predictors(i, j)) << ',';
        out << format_double(d.response(i)) << ',' << format_double(sample.eta(i)) << '\n';
    }
}

}  // namespace hsicreg
