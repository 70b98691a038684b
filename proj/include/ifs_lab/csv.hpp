#pragma once

#include <cstddef>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace ifs {

/// In-memory table written as RFC-4180 CSV (CRLF line breaks).
class CsvTable {
public:
    CsvTable() = default;
    CsvTable(std::string name, std::vector<std::string> header)
        : name_(std::move(name)), header_(std::move(header))
    {
    }

    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& header() const noexcept { return header_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }

    void add_row(std::vector<std::string> row)
    {
        if (row.size() != header_.size()) {
            throw Error(ErrorKind::InvalidParameter,
                        "table " + name_ + ": row has " + std::to_string(row.size()) +
                            " fields, header has " + std::to_string(header_.size()));
        }
        rows_.push_back(std::move(row));
    }

    void write(std::ostream& os) const
    {
        write_record(os, header_);
        for (const auto& row : rows_) {
            write_record(os, row);
        }
    }

    std::string str() const
    {
        std::ostringstream os;
        write(os);
        return os.str();
    }

    static std::string quote(std::string_view field)
    {
        if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
            return std::string(field);
        }
        std::string out = "\"";
        for (char c : field) {
            if (c == '"') {
                out += '"';
            }
            out += c;
        }
        out += '"';
        return out;
    }

private:
    static void write_record(std::ostream& os, const std::vector<std::string>& fields)
    {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) {
                os << ',';
            }
            os << quote(fields[i]);
        }
        os << "\r\n";
    }

    std::string name_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace ifs
