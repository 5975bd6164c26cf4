// Numeric tables as comma-separated text
//
// Header row, LF line endings, values at 17 significant digits, and an empty
// field for a missing value.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wga {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;

    // Index of a named column; throws FormatError when absent.
    std::size_t column(const std::string& name) const;
    // Every row must match the header width.
    void validate() const;
};

void write_csv(std::ostream& out, const CsvTable& table);
std::string to_csv(const CsvTable& table);
CsvTable read_csv(std::istream& in);
void save_csv(const std::string& path, const CsvTable& table);
CsvTable load_csv(const std::string& path);

}  // namespace wga
