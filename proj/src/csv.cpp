#include "vmtoc/csv.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace vmtoc::csv {

std::string format_double(double value)
{
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{})
        throw std::runtime_error("failed to format double");
    return std::string(buf.data(), end);
}

std::string format_significant(double value, int digits)
{
    std::array<char, 64> buf{};
    const int n = std::snprintf(buf.data(), buf.size(), "%.*g", digits, value);
    return std::string(buf.data(), static_cast<std::size_t>(n));
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::comment(std::string_view text)
{
    comments_ += "# ";
    comments_ += text;
    comments_ += '\n';
}

void Table::row(const std::vector<double>& values)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i != 0)
            body_ += ',';
        body_ += format_double(values[i]);
    }
    body_ += '\n';
}

void Table::row(const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i != 0)
            body_ += ',';
        body_ += cells[i];
    }
    body_ += '\n';
}

std::string Table::str() const
{
    std::string out = comments_;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i != 0)
            out += ',';
        out += columns_[i];
    }
    out += '\n';
    out += body_;
    return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content)
{
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move output into " + path.string() + ": " + ec.message());
    }
}

} // namespace vmtoc::csv
