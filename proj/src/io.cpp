#include "possim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace possim {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim spaces
        std::size_t a = cell.find_first_not_of(" \t\r");
        std::size_t b = cell.find_last_not_of(" \t\r");
        cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    return cells;
}

} // namespace

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::io_failure, "read_csv: cannot open " + path);
    Dataset d;
    d.label = path;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_csv_line(line);
        if (!have_header) {
            d.columns = cells;
            have_header = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                std::size_t pos = 0;
                double v = std::stod(c, &pos);
                require(pos == c.size(), ErrorCode::io_failure,
                        "read_csv: non-numeric cell '" + c + "' in " + path);
                row.push_back(v);
            } catch (const std::invalid_argument&) {
                fail(ErrorCode::io_failure, "read_csv: non-numeric cell '" + c + "' in " + path);
            }
        }
        d.rows.push_back(std::move(row));
    }
    require(have_header && !d.rows.empty(), ErrorCode::io_failure,
            "read_csv: no data rows in " + path);
    d.validate();
    return d;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& meta) {
    std::ofstream out(path);
    require(out.good(), ErrorCode::io_failure, "write_csv: cannot open " + path);
    for (const auto& m : meta) out << m << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << "\n";
    char buf[64];
    for (const auto& row : rows) {
        require(row.size() == columns.size(), ErrorCode::invalid_argument,
                "write_csv: row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.12g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
    require(out.good(), ErrorCode::io_failure, "write_csv: write failed for " + path);
}

std::string config_hash_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace possim
