#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabsynth::csv {

using Record = std::vector<std::string>;

// Comma-delimited, double-quote quoting ("" escapes a quote), LF or CRLF
// line endings. A trailing newline does not start a new record; blank lines
// are skipped.
std::vector<Record> parse(std::string_view text);

// Quotes a field only when it contains a comma, quote, CR/LF, or edge whitespace.
std::string escape(std::string_view field);

std::string read_file(const std::string& path);

}  // namespace tabsynth::csv
