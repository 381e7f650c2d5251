#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deadcore {

/// Machine-readable failure categories. The CLI maps these onto exit codes.
enum class ErrorCode {
    InvalidArgument,
    GridMismatch,
    BallExitsGrid,
    FlatFunction,
    NonConvergence,
    NoFreeBoundary,
    UnorderedData,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) {
        fail(code, what);
    }
}

} // namespace deadcore
