#include "tmids/csv.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace tmids::csv {

std::vector<std::string> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool parse_number(std::string_view field, double& out) {
    field = trim(field);
    if (field.empty()) {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (field.front() == '+') field.remove_prefix(1);
    // from_chars accepts nan/inf/infinity case-insensitively
    const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    if (res.ptr != field.data() + field.size()) return false;
    if (res.ec == std::errc::result_out_of_range) {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    return res.ec == std::errc{};
}

}  // namespace tmids::csv
