#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqrng {

enum class ErrorKind {
    invalid_argument,
    invalid_config,
    degenerate_data,
    fwhm_undefined,
    no_decorrelation,
    calibration_infeasible,
    zero_entropy,
    insufficient_data,
    parse_error,
    io_error,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) {
        throw Error(kind, what);
    }
}

} // namespace sqrng
