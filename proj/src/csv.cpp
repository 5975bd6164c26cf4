#include "wga/csv.hpp"

#include "wga/error.hpp"
#include "wga/field.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace wga {

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw FormatError("csv has no column '" + name + "'");
}

void CsvTable::validate() const {
    if (header.empty()) {
        throw FormatError("csv table has no columns");
    }
    for (const auto& h : header) {
        if (h.find_first_of(",\n\r\"") != std::string::npos) {
            throw FormatError("csv column name '" + h + "' needs quoting, which is unsupported");
        }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != header.size()) {
            throw FormatError("csv row " + std::to_string(r) + " has " +
                              std::to_string(rows[r].size()) + " fields, header has " +
                              std::to_string(header.size()));
        }
    }
}

void write_csv(std::ostream& out, const CsvTable& table) {
    table.validate();
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out << (i ? "," : "") << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (row[i]) out << format_double(*row[i]);
        }
        out << '\n';
    }
}

std::string to_csv(const CsvTable& table) {
    std::ostringstream out;
    write_csv(out, table);
    return out.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("csv input is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != t.header.size()) {
            throw FormatError("csv line " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(t.header.size()));
        }
        std::vector<std::optional<double>> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            if (f.empty()) {
                row.emplace_back();
                continue;
            }
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end != f.c_str() + f.size()) {
                throw FormatError("csv line " + std::to_string(lineno) + ": '" + f +
                                  "' is not a number");
            }
            row.emplace_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void save_csv(const std::string& path, const CsvTable& table) {
    write_file_atomic(path, to_csv(table));
}

CsvTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open csv file '" + path + "'");
    }
    return read_csv(in);
}

}  // namespace wga
