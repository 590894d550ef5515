#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sqrng {

enum class SourceKind { coherent, scattered };

/// Photon statistics of the light reaching the detector.
///
/// Coherent light gives Poisson counts. Scattered light is modelled as
/// multimode thermal light: the count rate is modulated per sample by a
/// Gamma(M, 1/M) speckle factor, so counts are negative binomial with
/// variance lambda * (1 + lambda / M).
struct SourceModel {
    SourceKind kind = SourceKind::coherent;
    double mean_rate = 1.0;  // lambda, photons per raw sample window
    double mode_count = 0.0; // M, scattered only
    /// Bandwidth seen by the speckle intensity modulation. 0 leaves the
    /// modulation white (independent from sample to sample).
    double speckle_bandwidth_hz = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DetectorModel {
    double bandwidth_hz = 5e9;
    double sample_rate_hz = 40e9;
    double gain_mV_per_photon = 0.01;
    double responsivity_A_per_W = 1.0;
    double load_resistance_ohm = 50.0;
    /// High-pass corner of the AC-coupled output; 0 means DC-coupled.
    double ac_coupling_hz = 0.0;

    void validate() const;

    /// Single-pole coefficient exp(-2 pi f_c / f_s).
    [[nodiscard]] double lowpass_coefficient() const;
};

struct NoiseModel {
    double electronic_sigma_mV = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SignalTrace {
    std::vector<double> samples; // mV
    double sample_rate_hz = 0.0;
    std::string label;

    void validate() const;
    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
};

struct VarianceDecomposition {
    double total_var = 0.0;      // mV^2
    double electronic_var = 0.0; // total - quantum
    double quantum_var = 0.0;
    /// Set when electronic_var is negative beyond sampling error.
    bool inconsistent = false;
};

/// Pole coefficient exp(-2 pi f / f_s); 0 when f is 0.
[[nodiscard]] double pole_coefficient(double corner_hz, double sample_rate_hz);

/// I.i.d. photon counts for one raw sample window each.
[[nodiscard]] std::vector<std::uint32_t> gen_photon_counts(const SourceModel& model, std::size_t n);

/// gain * counts through the detector response, starting from rest.
[[nodiscard]] SignalTrace counts_to_voltage(std::span<const std::uint32_t> counts,
                                            const DetectorModel& detector);

[[nodiscard]] SignalTrace add_electronic_noise(const SignalTrace& trace, const NoiseModel& noise);

/// The quantum part X_q of a detector record: photon shot noise plus, for
/// scattered light, the speckle intensity modulation. The detector starts
/// settled at the mean level so there is no start-up transient.
[[nodiscard]] SignalTrace synthesize_quantum(const SourceModel& source,
                                             const DetectorModel& detector, std::size_t n);

/// X_t = X_q + X_e.
[[nodiscard]] SignalTrace synthesize_total(const SourceModel& source, const DetectorModel& detector,
                                           const NoiseModel& noise, std::size_t n);

[[nodiscard]] VarianceDecomposition variance_decomposition(const SignalTrace& quantum_trace,
                                                           const SignalTrace& noisy_trace);

struct CalibrationSettings {
    std::size_t n_samples = 500'000;
    int n_bins = 256;
    double min_mode_count = 1.0;
    double max_mode_count = 1e9;
    double tolerance = 0.005; // relative, on the FWHM ratio
    int max_iterations = 60;
};

struct CalibrationResult {
    double mode_count = 0.0;
    double achieved_ratio = 0.0;
    double coherent_fwhm_mV = 0.0;
    int iterations = 0;
};

/// Finds M such that FWHM(scattered) / FWHM(coherent) hits the target,
/// bisecting on log M. `base` supplies lambda, speckle bandwidth and seed;
/// its kind and mode count are ignored.
[[nodiscard]] CalibrationResult calibrate_mode_count(double target_fwhm_ratio, const SourceModel& base,
                                                     const DetectorModel& detector,
                                                     const NoiseModel& noise,
                                                     const CalibrationSettings& settings = {});

[[nodiscard]] double mean(std::span<const double> x);
[[nodiscard]] double variance(std::span<const double> x); // population (divide by N)

} // namespace sqrng
