#include "whamkit/core/ndjson.h"

#include "whamkit/core/error.h"

#include <fstream>
#include <istream>
#include <ostream>

namespace whamkit {

std::vector<Json> read_ndjson(std::istream& in, const std::string& source) {
  std::vector<Json> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw FormatError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Json> read_ndjson_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_ndjson(in, path.string());
}

void write_ndjson_line(std::ostream& out, const Json& value) { out << value.dump() << '\n'; }

std::vector<double> json_numbers(const Json& obj, const char* key, std::size_t n) {
  if (!obj.contains(key) || !obj.at(key).is_array() || obj.at(key).size() != n) {
    throw FormatError(std::string("field '") + key + "' must be an array of " + std::to_string(n) +
                      " numbers");
  }
  std::vector<double> out;
  out.reserve(n);
  for (const auto& v : obj.at(key)) {
    if (!v.is_number()) throw FormatError(std::string("field '") + key + "' has a non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace whamkit
