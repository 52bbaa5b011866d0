#include "ndscreen/error.hpp"

namespace ndscreen {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::parse: return "parse error";
        case ErrorKind::validation: return "validation error";
        case ErrorKind::range: return "range error";
        case ErrorKind::degenerate: return "degenerate input";
        case ErrorKind::shape: return "shape error";
        case ErrorKind::numeric: return "numeric error";
        case ErrorKind::config: return "config error";
        case ErrorKind::protocol: return "protocol error";
        case ErrorKind::io: return "I/O error";
    }
    return "error";
}

}  // namespace ndscreen
