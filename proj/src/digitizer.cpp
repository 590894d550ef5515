#include "sqrng/digitizer.hpp"

#include "sqrng/analysis.hpp"
#include "sqrng/error.hpp"

#include <cmath>

namespace sqrng {

void AdcConfig::validate() const {
    require(n_bits >= 1 && n_bits <= 24, ErrorKind::invalid_config, "ADC n_bits must be in [1, 24]");
    require(std::isfinite(v_min) && std::isfinite(v_max) && v_min < v_max,
            ErrorKind::invalid_config, "ADC range needs v_min < v_max");
    require(undersample_factor >= 1, ErrorKind::invalid_config, "undersample factor must be >= 1");
}

double AdcConfig::lsb_mV() const noexcept {
    return (v_max - v_min) / static_cast<double>(1u << n_bits);
}

std::uint32_t quantize(double v_mV, const AdcConfig& adc) {
    const double levels = static_cast<double>(1u << adc.n_bits);
    const double scaled = std::floor((v_mV - adc.v_min) / (adc.v_max - adc.v_min) * levels);
    if (!(scaled > 0.0)) {
        return 0;
    }
    if (scaled >= levels - 1.0) {
        return adc.max_code();
    }
    return static_cast<std::uint32_t>(scaled);
}

double dequantize(std::uint32_t code, const AdcConfig& adc) {
    return adc.v_min + (static_cast<double>(code) + 0.5) * adc.lsb_mV();
}

DigitalTrace digitize(const SignalTrace& trace, const AdcConfig& adc) {
    adc.validate();
    require(!trace.samples.empty(), ErrorKind::invalid_argument, "cannot digitize an empty trace");

    DigitalTrace out;
    out.adc = adc;
    out.effective_rate_hz = trace.sample_rate_hz;
    out.codes.reserve(trace.size());
    for (double v : trace.samples) {
        const auto code = quantize(v, adc);
        if (code == 0 || code == adc.max_code()) {
            ++out.clipped;
        }
        out.codes.push_back(code);
    }
    return out;
}

namespace {

template <typename T>
std::vector<T> stride(const std::vector<T>& in, std::size_t k) {
    require(k >= 1, ErrorKind::invalid_argument, "undersample factor must be >= 1");
    std::vector<T> out;
    out.reserve((in.size() + k - 1) / k);
    for (std::size_t i = 0; i < in.size(); i += k) {
        out.push_back(in[i]);
    }
    return out;
}

} // namespace

SignalTrace undersample(const SignalTrace& trace, std::size_t k) {
    SignalTrace out;
    out.samples = stride(trace.samples, k);
    out.sample_rate_hz = trace.sample_rate_hz / static_cast<double>(k);
    out.label = trace.label;
    return out;
}

DigitalTrace undersample(const DigitalTrace& trace, std::size_t k) {
    DigitalTrace out;
    out.codes = stride(trace.codes, k);
    out.effective_rate_hz = trace.effective_rate_hz / static_cast<double>(k);
    out.adc = trace.adc;
    out.adc.undersample_factor = trace.adc.undersample_factor * k;
    for (auto c : out.codes) {
        if (c == 0 || c == out.adc.max_code()) {
            ++out.clipped;
        }
    }
    return out;
}

std::size_t select_undersample_factor(const AcfReport& acf) {
    return 2 * first_nonpositive_lag(acf);
}

AdcConfig auto_range(const SignalTrace& trace, int n_bits, double span_sigmas) {
    const double m = mean(trace.samples);
    const double s = std::sqrt(variance(trace.samples));
    require(s > 0.0, ErrorKind::degenerate_data, "cannot auto-range a constant trace");
    AdcConfig adc;
    adc.n_bits = n_bits;
    adc.v_min = m - span_sigmas * s;
    adc.v_max = m + span_sigmas * s;
    adc.validate();
    return adc;
}

BitStream to_bits(const DigitalTrace& dt) {
    BitStream out;
    out.reserve(dt.codes.size() * static_cast<std::size_t>(dt.adc.n_bits));
    for (auto c : dt.codes) {
        out.append_word(c, dt.adc.n_bits);
    }
    out.provenance = "adc codes, " + std::to_string(dt.adc.n_bits) + " bits MSB-first";
    return out;
}

} // namespace sqrng
