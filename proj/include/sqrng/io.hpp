#pragma once

#include "sqrng/analysis.hpp"
#include "sqrng/battery.hpp"
#include "sqrng/bitstream.hpp"
#include "sqrng/digitizer.hpp"
#include "sqrng/entropy.hpp"
#include "sqrng/extractor.hpp"
#include "sqrng/signal.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace sqrng::io {

using nlohmann::json;
namespace fs = std::filesystem;

/// Shortest text that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view content);
[[nodiscard]] std::string read_file(const fs::path& path);

[[nodiscard]] std::string sha256_hex(std::string_view data);

/// "<name>.json" next to a data file.
[[nodiscard]] fs::path sidecar_path(const fs::path& data_file);

// CSV bodies. Headers: index,voltage_mV / index,code / lag,r /
// freq_hz,power_dBm_per_Hz / bin_center_mV,count.
[[nodiscard]] std::string trace_csv(const SignalTrace& trace);
[[nodiscard]] std::string digital_csv(const DigitalTrace& dt);
[[nodiscard]] std::string acf_csv(const AcfReport& acf);
[[nodiscard]] std::string psd_csv(const PsdReport& psd);
[[nodiscard]] std::string histogram_csv(const HistogramReport& h);

/// Parses an index,voltage_mV body. Errors name the offending line.
[[nodiscard]] std::vector<double> parse_trace_csv(std::string_view text);

/// CSV plus sidecar metadata; sample_rate_hz and label are added to meta.
void write_trace(const fs::path& csv_path, const SignalTrace& trace, json meta = json::object());

/// Reads a trace CSV; the sample rate and label come from the sidecar.
[[nodiscard]] SignalTrace read_trace(const fs::path& csv_path);

/// Raw packed bytes plus sidecar {bit_length, source, ...meta}.
void write_bitstream(const fs::path& path, const BitStream& bits, json meta = json::object());
[[nodiscard]] BitStream read_bitstream(const fs::path& path);

[[nodiscard]] json to_json(const SourceModel& s);
[[nodiscard]] json to_json(const DetectorModel& d);
[[nodiscard]] json to_json(const NoiseModel& n);
[[nodiscard]] json to_json(const AdcConfig& a);
[[nodiscard]] json to_json(const LfsrConfig& c);
[[nodiscard]] json to_json(const EntropyReport& r);
[[nodiscard]] json to_json(const TestReport& r);
[[nodiscard]] json to_json(const VarianceDecomposition& v);

/// Hex encoding of an LFSR state, most significant digit first.
[[nodiscard]] std::string state_to_hex(const LfsrState& s, int degree);
[[nodiscard]] LfsrState state_from_hex(std::string_view hex);

/// Serializes with fixed key order and formatting so identical inputs give
/// identical bytes.
[[nodiscard]] std::string dump(const json& j);

} // namespace sqrng::io
