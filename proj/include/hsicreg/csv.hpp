#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hsicreg/bootstrap.hpp"
#include "hsicreg/linreg.hpp"

namespace hsicreg {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // data rows, file order
};

/// Comma-separated, mandatory header row, optional double-quoted fields with
/// "" escapes. Every row must have as many fields as the header.
[[nodiscard]] CsvTable read_csv(std::istream& in);

/// Loads `response` and `predictors` (all other columns when empty) as a
/// Dataset. Throws on missing columns, non-numeric cells (naming the row and
/// column), or fewer than predictors + 2 rows.
[[nodiscard]] Dataset load_csv(const std::string& path, const std::string& response,
                               const std::vector<std::string>& predictors = {});

/// Shortest decimal form that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

/// Writes predictor columns, y and eta, one row per observation.
void write_sample_csv(std::ostream& out, const SimulatedSample& sample);

}  // namespace hsicreg
