#ifndef ENTAILPROF_JSONL_HPP_
#define ENTAILPROF_JSONL_HPP_

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace entailprof {

/// Splits JSONL text into (1-based line number, parsed value) pairs.
/// Blank lines are skipped; a malformed line raises ValidationError naming it.
std::vector<std::pair<std::size_t, nlohmann::json>> parse_jsonl_lines(std::string_view text);

/// Parses a whole-file JSON document, naming `what` in the error message.
nlohmann::json parse_json_document(std::string_view text, std::string_view what);

}  // namespace entailprof

#endif  // ENTAILPROF_JSONL_HPP_
