#include "deadcore/error.hpp"

namespace deadcore {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::GridMismatch: return "grid-mismatch";
    case ErrorCode::BallExitsGrid: return "ball-exits-grid";
    case ErrorCode::FlatFunction: return "flat-function";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::NoFreeBoundary: return "no-free-boundary";
    case ErrorCode::UnorderedData: return "unordered-data";
    case ErrorCode::ParseError: return "parse-error";
    }
    return "unknown";
}

} // namespace deadcore
