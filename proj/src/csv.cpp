#include "narrm/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace narrm::csv {

std::string format(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        throw std::runtime_error("csv: cannot format value");
    }
    return std::string(buf, end);
}

void Row::sep() {
    if (!first_) {
        line_ += ',';
    }
    first_ = false;
}

Row& Row::operator<<(double value) {
    sep();
    line_ += format(value);
    return *this;
}

Row& Row::operator<<(std::string_view text) {
    sep();
    line_ += text;
    return *this;
}

Row& Row::operator<<(std::size_t value) {
    sep();
    line_ += std::to_string(value);
    return *this;
}

Row& Row::operator<<(int value) {
    sep();
    line_ += std::to_string(value);
    return *this;
}

Row& Row::operator<<(bool value) {
    sep();
    line_ += value ? '1' : '0';
    return *this;
}

void Row::write(std::ostream& out) const { out << line_ << '\n'; }

void write_header(std::ostream& out, const std::vector<std::string>& columns) {
    Row row;
    for (const auto& c : columns) {
        row << std::string_view(c);
    }
    row.write(out);
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw std::invalid_argument("csv: missing column '" + std::string(name) + "'");
}

std::vector<double> Table::column_values(std::string_view name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r[c]);
    }
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string& text, std::size_t line_no) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw std::runtime_error("csv: line " + std::to_string(line_no) + ": not a number: '" +
                                 text + "'");
    }
    return v;
}

}  // namespace

Table read_numeric(std::istream& in) {
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw std::runtime_error("csv: line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(table.header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            row.push_back(parse_double(f, line_no));
        }
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) {
        throw std::runtime_error("csv: empty input");
    }
    return table;
}

}  // namespace narrm::csv
