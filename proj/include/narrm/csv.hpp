#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace narrm::csv {

/// Shortest decimal text that round-trips to the same double ("nan"/"inf" for non-finite).
std::string format(double value);

/// Accumulates one comma-separated row; write() terminates it with LF.
class Row {
public:
    Row& operator<<(double value);
    Row& operator<<(std::string_view text);
    Row& operator<<(const char* text) { return *this << std::string_view(text); }
    Row& operator<<(std::size_t value);
    Row& operator<<(int value);
    Row& operator<<(bool value);

    void write(std::ostream& out) const;
    const std::string& str() const { return line_; }

private:
    void sep();
    std::string line_;
    bool first_ = true;
};

void write_header(std::ostream& out, const std::vector<std::string>& columns);

/// Parsed numeric table: header names plus row-major values.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a named column; throws std::invalid_argument when absent.
    std::size_t column(std::string_view name) const;
    std::vector<double> column_values(std::string_view name) const;
};

/// Reads a header row followed by all-numeric rows. Throws std::runtime_error
/// naming the line on malformed input.
Table read_numeric(std::istream& in);

}  // namespace narrm::csv
