#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sqlev {

using CsvRow = std::vector<std::string>;

// RFC 4180 parsing. Handles quoted fields (embedded commas, quotes and
// newlines), CRLF line endings and a leading UTF-8 BOM.
std::vector<CsvRow> parse_csv(std::string_view text);
std::vector<CsvRow> read_csv_file(const std::string& path);  // throws DataError

std::string csv_field(std::string_view value);
std::string render_csv(const std::vector<CsvRow>& rows);
void write_csv_file(const std::string& path, const std::vector<CsvRow>& rows);

}  // namespace sqlev
