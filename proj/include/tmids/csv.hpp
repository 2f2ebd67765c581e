#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tmids::csv {

/// Splits one CSV record. Handles double-quoted fields with "" escapes; does
/// not support embedded newlines. A trailing '\r' is dropped.
std::vector<std::string> split_line(std::string_view line);

std::string_view trim(std::string_view s);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Shortest round-trippable decimal form of a double.
std::string format_double(double v);

/// Parses a numeric field. Empty, NaN and infinity spellings produce NaN or
/// +/-inf (left for cleaning to drop); returns false only on garbage.
bool parse_number(std::string_view field, double& out);

}  // namespace tmids::csv
