#pragma once

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace whamkit {

using Json = nlohmann::json;

// One JSON document per line. Empty lines are skipped; a malformed line
// raises FormatError naming the line number.
std::vector<Json> read_ndjson(std::istream& in, const std::string& source = "<stream>");
std::vector<Json> read_ndjson_file(const std::filesystem::path& path);

void write_ndjson_line(std::ostream& out, const Json& value);

// Reads a JSON array field of exactly `n` numbers.
std::vector<double> json_numbers(const Json& obj, const char* key, std::size_t n);

}  // namespace whamkit
