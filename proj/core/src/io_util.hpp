#pragma once

// Private file and JSONL helpers shared by the core sources.

#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace cie::detail {

using json = nlohmann::json;

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file for reading: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  return out;
}

// Calls fn(line_number, parsed_object) for every non-empty line. Line
// numbers are 1-based. Parse failures and non-object lines throw with the
// line number in the message.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw std::runtime_error(path + ": malformed JSON object at line " + std::to_string(line_no));
    }
    fn(line_no, j);
  }
}

inline std::string require_string(const json& j, const char* key, const std::string& path,
                                  std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                             " is missing string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

// Shortest round-trip decimal form of a double, e.g. for CSV cells.
inline std::string double_repr(double v) { return json(v).dump(); }

}  // namespace cie::detail
