#pragma once

#include <string>
#include <vector>

namespace contagion::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] int column(const std::string& name) const;  // -1 when absent
    [[nodiscard]] int require_column(const std::string& name) const;  // throws when absent
};

// Split a single CSV line on commas. Fields in our schemas never contain
// commas or quotes, so no quoting rules are applied.
[[nodiscard]] std::vector<std::string> split_line(const std::string& line);

// Read a CSV file with a header row. Blank lines are skipped.
[[nodiscard]] Table read_file(const std::string& path);

[[nodiscard]] std::string join(const std::vector<std::string>& fields);

// Fixed-precision double formatting that round-trips (max_digits10).
[[nodiscard]] std::string format_double(double v);

void write_file(const std::string& path,
                const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

}  // namespace contagion::csv
