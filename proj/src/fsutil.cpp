#include "tmids/fsutil.hpp"

#include <filesystem>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "tmids/error.hpp"

namespace tmids {

void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
            writer(out);
            out.flush();
            if (!out) throw IoError("write to '" + tmp.string() + "' failed");
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path + "': " + ec.message());
    } catch (...) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw;
    }
}

void write_file_atomic(const std::string& path, std::string_view content) {
    write_file_atomic(path, [&](std::ostream& out) { out.write(content.data(), static_cast<std::streamsize>(content.size())); });
}

}  // namespace tmids
