#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace flpadv::csv {

struct Record {
    std::size_t line = 0;  // 1-based line where the record starts
    std::vector<std::string> fields;
};

// RFC 4180 reader: comma separated, double-quoted fields with "" escapes,
// LF or CRLF line ends, quoted fields may span lines. Blank lines are skipped
// and a leading UTF-8 byte-order mark is ignored.
std::vector<Record> parse(std::string_view input);

// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

std::string format_record(const std::vector<std::string>& fields);

}  // namespace flpadv::csv
