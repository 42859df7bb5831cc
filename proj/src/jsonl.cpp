#include "entailprof/jsonl.hpp"

#include <string>

#include "entailprof/common.hpp"

namespace entailprof {

std::vector<std::pair<std::size_t, nlohmann::json>> parse_jsonl_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, nlohmann::json>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!has_content(line)) continue;
    try {
      out.emplace_back(line_no, nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
  }
  return out;
}

nlohmann::json parse_json_document(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string(what) + ": malformed JSON (" + e.what() + ")");
  }
}

}  // namespace entailprof
