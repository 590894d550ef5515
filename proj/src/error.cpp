#include "sqrng/error.hpp"

namespace sqrng {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::degenerate_data: return "degenerate-data";
    case ErrorKind::fwhm_undefined: return "fwhm-undefined";
    case ErrorKind::no_decorrelation: return "no-decorrelation";
    case ErrorKind::calibration_infeasible: return "calibration-infeasible";
    case ErrorKind::zero_entropy: return "zero-entropy";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::io_error: return "io-error";
    }
    return "unknown";
}

} // namespace sqrng
