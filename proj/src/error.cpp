#include "tmids/error.hpp"

namespace tmids {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Input: return "input";
        case ErrorKind::Structural: return "structural";
        case ErrorKind::Config: return "config";
        case ErrorKind::Schema: return "schema";
        case ErrorKind::Split: return "split";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace tmids
