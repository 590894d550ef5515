#pragma once

#include "sqrng/analysis.hpp"
#include "sqrng/battery.hpp"
#include "sqrng/digitizer.hpp"
#include "sqrng/entropy.hpp"
#include "sqrng/extractor.hpp"
#include "sqrng/signal.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace sqrng {

inline constexpr int kConfigSchemaVersion = 1;

enum class Preset { coherent, silver, aluminum };

[[nodiscard]] std::optional<Preset> parse_preset(std::string_view name);
[[nodiscard]] std::string_view to_string(Preset p) noexcept;

struct AdcSettings {
    int n_bits = 16;
    /// Explicit range in mV; both absent means mean +/- range_sigmas std.
    std::optional<double> v_min;
    std::optional<double> v_max;
    double range_sigmas = 4.0;
    std::size_t undersample_factor = 0; // 0: twice the first nonpositive ACF lag
};

struct AnalysisSettings {
    std::size_t max_lag = 200;
    int n_bins = 256;
    std::size_t psd_segment = 4096;
    double psd_overlap = 0.5;
    /// Mean optical power on the detector; enables the shot-noise PSD line.
    std::optional<double> optical_power_W;
    EntropyMode entropy_mode = EntropyMode::empirical_total;
};

struct ExtractorSettings {
    LfsrConfig lfsr;
    int block_bits = 16;
};

struct PipelineConfig {
    std::string name = "custom";
    SourceModel source;
    DetectorModel detector;
    NoiseModel noise;
    AdcSettings adc;
    AnalysisSettings analysis;
    ExtractorSettings extractor;
    double alpha = 0.01;
    std::size_t n_samples = 2'000'000;
    std::string output_dir = "out";

    /// Throws invalid_config; returns warnings for soft limits.
    std::vector<std::string> validate() const;

    /// Same seed for the photon and electronic-noise streams.
    void set_seed(std::uint64_t seed);
};

/// Calibrated desk-scale presets at 40 GS/s.
[[nodiscard]] PipelineConfig preset_config(Preset p);

/// Fields absent from j keep the values in base. Unknown keys, type
/// mismatches and a missing or wrong schema_version are rejected.
[[nodiscard]] PipelineConfig parse_config(const nlohmann::json& j,
                                          const PipelineConfig& base = preset_config(Preset::silver));
[[nodiscard]] PipelineConfig load_config(const std::filesystem::path& path,
                                         const PipelineConfig& base = preset_config(Preset::silver));
[[nodiscard]] nlohmann::json to_json(const PipelineConfig& c);

/// The coherent source with the same mean rate and seed as c.source.
[[nodiscard]] SourceModel coherent_reference(const SourceModel& s);

struct PipelineResult {
    HistogramReport histogram;
    AcfReport acf;
    PsdReport psd;
    std::size_t acf_first_nonpositive_lag = 0;
    std::size_t undersample_factor = 0;
    AdcConfig adc;
    double clip_fraction = 0.0;
    EntropyReport entropy;
    ExtractionRatio extraction;
    std::size_t raw_bits = 0;
    WhitenResult whitened;
    TestReport tests;
    double effective_sample_rate_hz = 0.0;
    double output_bit_rate_hz = 0.0; // effective_sample_rate * keep_bits * n_bits / block_bits
    std::vector<std::string> warnings;
};

/// simulate -> acf -> undersample -> digitize -> min_entropy ->
/// extraction_ratio -> whiten -> test. Pure; nothing is written.
/// Errors are rethrown with the failing stage name prefixed.
[[nodiscard]] PipelineResult run_pipeline(const PipelineConfig& cfg);

struct PipelineBundle {
    PipelineResult result;
    std::filesystem::path bit_file;
    std::filesystem::path manifest;
};

/// Runs the pipeline and writes plot data, reports, the whitened bit file
/// and manifest.json into out_dir. No files are written if a stage fails.
PipelineBundle run_pipeline_to(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

} // namespace sqrng
