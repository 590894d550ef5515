#pragma once

#include "sqrng/signal.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sqrng {

/// Electron charge in coulombs.
inline constexpr double kElectronCharge = 1.602176634e-19;

/// Reference load for dBm conversions of voltage spectra.
inline constexpr double kReferenceLoadOhm = 50.0;

struct HistogramReport {
    std::vector<double> bin_edges; // mV, n_bins + 1 entries
    std::vector<std::uint64_t> counts;
    std::uint64_t total_n = 0;
    std::optional<double> fwhm_mV; // absent when the half-max crossings are undefined
    double mode_bin_prob = 0.0;
    int smoothing_bins = 3;

    [[nodiscard]] std::size_t n_bins() const noexcept { return counts.size(); }
    [[nodiscard]] double bin_width() const noexcept { return bin_edges[1] - bin_edges[0]; }
    [[nodiscard]] double bin_center(std::size_t i) const noexcept {
        return 0.5 * (bin_edges[i] + bin_edges[i + 1]);
    }
};

struct AcfReport {
    std::vector<double> coefficients; // r(0..max_lag), r(0) = 1
    std::optional<std::size_t> first_nonpositive_lag;
    std::size_t n_samples = 0;

    [[nodiscard]] std::size_t max_lag() const noexcept { return coefficients.size() - 1; }
};

struct PsdReport {
    std::vector<double> frequencies_hz;
    std::vector<double> density_mV2_per_Hz;
    std::vector<double> power_dBm_per_Hz; // into kReferenceLoadOhm
    std::size_t segment_length = 0;
    double overlap_fraction = 0.0;
    std::size_t segments = 0;
    std::optional<double> shot_noise_line_dBm_per_Hz;
};

struct ShotNoiseParams {
    double photocurrent_A = 0.0;
    double load_resistance_ohm = 0.0;
    double bandwidth_hz = 0.0;

    void validate() const;
};

struct ShotNoisePower {
    double watts = 0.0;
    double dBm = 0.0;
};

/// Equal-width bins spanning [min, max] of the data. The FWHM is filled in
/// when it is defined.
[[nodiscard]] HistogramReport histogram(std::span<const double> data, int n_bins);
[[nodiscard]] HistogramReport histogram(const SignalTrace& trace, int n_bins);

/// Full width at half maximum of the 3-bin smoothed density, interpolating
/// linearly between the outermost bins that straddle half the peak. The
/// density is taken as zero outside the histogram range.
[[nodiscard]] double fwhm(const HistogramReport& h);

/// Biased normalized autocorrelation
///   r(k) = sum_i (x_i - m)(x_{i+k} - m) / sum_i (x_i - m)^2.
[[nodiscard]] AcfReport autocorrelation(std::span<const double> x, std::size_t max_lag);
[[nodiscard]] AcfReport autocorrelation(const SignalTrace& trace, std::size_t max_lag);

/// Smallest k >= 1 with r(k) <= 0.
[[nodiscard]] std::size_t first_nonpositive_lag(const AcfReport& acf);

/// Welch estimate: Hann window, per-segment mean removal, one-sided,
/// normalized so that the density integrates to the trace variance.
[[nodiscard]] PsdReport psd_welch(const SignalTrace& trace, std::size_t segment_length,
                                  double overlap_fraction);

/// Integral of the one-sided density over frequency, in mV^2.
[[nodiscard]] double integrated_power_mV2(const PsdReport& psd);

/// P = 2 e R_L i df.
[[nodiscard]] ShotNoisePower shot_noise_power(const ShotNoiseParams& p);

/// Spectral level 2 e R_L i in dBm/Hz, for overlaying on a PSD.
[[nodiscard]] double shot_noise_density_dBm_per_Hz(const ShotNoiseParams& p);

/// R_L * i needed for a given shot-noise power over bandwidth df.
[[nodiscard]] double shot_noise_load_current_product(double dBm, double bandwidth_hz);

[[nodiscard]] double watts_to_dBm(double watts);

/// Sample variance over sample mean.
[[nodiscard]] double fano_factor(std::span<const std::uint32_t> counts);

} // namespace sqrng
