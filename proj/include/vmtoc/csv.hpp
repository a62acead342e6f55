#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vmtoc::csv {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// `digits` significant digits, trailing zeros kept out.
std::string format_significant(double value, int digits);

/// Accumulates `#` comments, a header row and data rows.
class Table {
public:
    explicit Table(std::vector<std::string> columns);

    void comment(std::string_view text);
    void row(const std::vector<double>& values);
    void row(const std::vector<std::string>& cells);

    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::string comments_;
    std::string body_;
};

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace vmtoc::csv
