#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace novscope::csv {

// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

// RFC 4180 style parsing of a whole document; LF or CRLF line endings.
std::vector<std::vector<std::string>> parse(std::string_view text);

std::optional<double> to_optional_double(std::string_view field);

}  // namespace novscope::csv
