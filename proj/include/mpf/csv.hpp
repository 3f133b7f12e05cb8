#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mpf {

/// Splits one CSV record. Double-quoted fields may contain commas and ""
/// escapes; nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line);

/// Quotes a field only when it contains a comma, quote or newline.
std::string quote_if_needed(const std::string& s);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace mpf
