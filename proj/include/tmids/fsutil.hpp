#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace tmids {

/// Writes through a sibling temp file and renames it over `path`, so readers
/// never observe a partial file. Throws IoError; the temp file is removed on failure.
void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer);
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace tmids
