#pragma once

#include "sqrng/bitstream.hpp"
#include "sqrng/signal.hpp"

#include <cstdint>
#include <vector>

namespace sqrng {

struct AcfReport;

struct AdcConfig {
    int n_bits = 16;
    double v_min = 0.0; // mV
    double v_max = 1.0; // mV
    std::size_t undersample_factor = 1;

    void validate() const;
    [[nodiscard]] std::uint32_t max_code() const noexcept { return (1u << n_bits) - 1u; }
    [[nodiscard]] double lsb_mV() const noexcept;
};

struct DigitalTrace {
    std::vector<std::uint32_t> codes;
    double effective_rate_hz = 0.0;
    AdcConfig adc;
    std::size_t clipped = 0; // samples saturated at either rail

    [[nodiscard]] std::size_t size() const noexcept { return codes.size(); }
    [[nodiscard]] double clip_fraction() const noexcept {
        return codes.empty() ? 0.0 : static_cast<double>(clipped) / static_cast<double>(codes.size());
    }
};

/// floor((v - v_min) / (v_max - v_min) * 2^n), saturated to [0, 2^n - 1].
[[nodiscard]] std::uint32_t quantize(double v_mV, const AdcConfig& adc);

/// Centre of the code's quantization cell.
[[nodiscard]] double dequantize(std::uint32_t code, const AdcConfig& adc);

[[nodiscard]] DigitalTrace digitize(const SignalTrace& trace, const AdcConfig& adc);

/// Keeps samples 0, k, 2k, ...
[[nodiscard]] SignalTrace undersample(const SignalTrace& trace, std::size_t k);
[[nodiscard]] DigitalTrace undersample(const DigitalTrace& trace, std::size_t k);

/// Twice the first lag at which the autocorrelation is nonpositive.
[[nodiscard]] std::size_t select_undersample_factor(const AcfReport& acf);

/// Range mean +/- span_sigmas * std of the trace.
[[nodiscard]] AdcConfig auto_range(const SignalTrace& trace, int n_bits, double span_sigmas = 4.0);

/// n_bits per code, most significant bit first.
[[nodiscard]] BitStream to_bits(const DigitalTrace& dt);

} // namespace sqrng
