#include "sqrng/io.hpp"

#include "sqrng/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sqrng::io {

namespace {

template <typename Row>
std::string csv(std::string_view header, std::size_t rows, Row&& row) {
    std::string out;
    out.reserve(rows * 24 + header.size() + 1);
    out.append(header);
    out.push_back('\n');
    for (std::size_t i = 0; i < rows; ++i) {
        row(out, i);
        out.push_back('\n');
    }
    return out;
}

json read_sidecar(const fs::path& data_file) {
    const auto path = sidecar_path(data_file);
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::parse_error, path.string() + ": " + e.what());
    }
}

} // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        require(!ec, ErrorKind::io_error, path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorKind::io_error, tmp.string() + ": cannot open for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        require(static_cast<bool>(out), ErrorKind::io_error, tmp.string() + ": write failed");
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        fail(ErrorKind::io_error, path.string() + ": " + ec.message());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::io_error, path.string() + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    require(EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) == 1,
            ErrorKind::io_error, "sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

fs::path sidecar_path(const fs::path& data_file) {
    fs::path p = data_file;
    p += ".json";
    return p;
}

std::string trace_csv(const SignalTrace& trace) {
    return csv("index,voltage_mV", trace.size(), [&](std::string& out, std::size_t i) {
        out += std::to_string(i);
        out.push_back(',');
        out += format_double(trace.samples[i]);
    });
}

std::string digital_csv(const DigitalTrace& dt) {
    return csv("index,code", dt.size(), [&](std::string& out, std::size_t i) {
        out += std::to_string(i);
        out.push_back(',');
        out += std::to_string(dt.codes[i]);
    });
}

std::string acf_csv(const AcfReport& acf) {
    return csv("lag,r", acf.coefficients.size(), [&](std::string& out, std::size_t k) {
        out += std::to_string(k);
        out.push_back(',');
        out += format_double(acf.coefficients[k]);
    });
}

std::string psd_csv(const PsdReport& psd) {
    return csv("freq_hz,power_dBm_per_Hz", psd.frequencies_hz.size(), [&](std::string& out, std::size_t k) {
        out += format_double(psd.frequencies_hz[k]);
        out.push_back(',');
        out += format_double(psd.power_dBm_per_Hz[k]);
    });
}

std::string histogram_csv(const HistogramReport& h) {
    return csv("bin_center_mV,count", h.n_bins(), [&](std::string& out, std::size_t i) {
        out += format_double(h.bin_center(i));
        out.push_back(',');
        out += std::to_string(h.counts[i]);
    });
}

std::vector<double> parse_trace_csv(std::string_view text) {
    std::vector<double> values;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            require(line == "index,voltage_mV", ErrorKind::parse_error,
                    "line " + std::to_string(line_no) + ": expected header index,voltage_mV");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        auto bad = [&](const char* why) {
            fail(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": " + why);
        };
        if (comma == std::string_view::npos) {
            bad("expected two comma-separated fields");
        }
        std::size_t index = 0;
        const auto idx_field = line.substr(0, comma);
        auto r1 = std::from_chars(idx_field.data(), idx_field.data() + idx_field.size(), index);
        if (r1.ec != std::errc{} || r1.ptr != idx_field.data() + idx_field.size()) {
            bad("malformed index");
        }
        if (index != values.size()) {
            bad("indices must be consecutive from 0");
        }
        double v = 0.0;
        const auto v_field = line.substr(comma + 1);
        auto r2 = std::from_chars(v_field.data(), v_field.data() + v_field.size(), v);
        if (r2.ec != std::errc{} || r2.ptr != v_field.data() + v_field.size() || !std::isfinite(v)) {
            bad("malformed voltage");
        }
        values.push_back(v);
    }
    require(header_seen, ErrorKind::parse_error, "line 1: missing header index,voltage_mV");
    require(!values.empty(), ErrorKind::parse_error, "trace has no samples");
    return values;
}

void write_trace(const fs::path& csv_path, const SignalTrace& trace, json meta) {
    meta["sample_rate_hz"] = trace.sample_rate_hz;
    meta["label"] = trace.label;
    meta["samples"] = trace.size();
    write_file_atomic(csv_path, trace_csv(trace));
    write_file_atomic(sidecar_path(csv_path), dump(meta));
}

SignalTrace read_trace(const fs::path& csv_path) {
    SignalTrace trace;
    try {
        trace.samples = parse_trace_csv(read_file(csv_path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parse_error) {
            fail(ErrorKind::parse_error, csv_path.string() + ": " + e.what());
        }
        throw;
    }
    const json meta = read_sidecar(csv_path);
    require(meta.contains("sample_rate_hz") && meta["sample_rate_hz"].is_number(),
            ErrorKind::parse_error, sidecar_path(csv_path).string() + ": missing sample_rate_hz");
    trace.sample_rate_hz = meta["sample_rate_hz"].get<double>();
    trace.label = meta.value("label", std::string{});
    trace.validate();
    return trace;
}

void write_bitstream(const fs::path& path, const BitStream& bits, json meta) {
    meta["bit_length"] = bits.size();
    if (!meta.contains("source")) {
        meta["source"] = bits.provenance;
    }
    const auto& bytes = bits.bytes();
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    write_file_atomic(sidecar_path(path), dump(meta));
}

BitStream read_bitstream(const fs::path& path) {
    const std::string raw = read_file(path);
    const json meta = read_sidecar(path);
    require(meta.contains("bit_length") && meta["bit_length"].is_number_unsigned(),
            ErrorKind::parse_error, sidecar_path(path).string() + ": missing bit_length");
    const auto bit_length = meta["bit_length"].get<std::size_t>();
    require(raw.size() == (bit_length + 7) / 8, ErrorKind::parse_error,
            path.string() + ": byte count does not match bit_length " + std::to_string(bit_length));
    BitStream bits(std::vector<std::uint8_t>(raw.begin(), raw.end()), bit_length);
    bits.provenance = meta.value("source", std::string{});
    return bits;
}

json to_json(const SourceModel& s) {
    json j{{"kind", s.kind == SourceKind::coherent ? "coherent" : "scattered"},
           {"mean_rate", s.mean_rate},
           {"seed", s.seed}};
    if (s.kind == SourceKind::scattered) {
        j["mode_count"] = s.mode_count;
        j["speckle_bandwidth_hz"] = s.speckle_bandwidth_hz;
    }
    return j;
}

json to_json(const DetectorModel& d) {
    return json{{"bandwidth_hz", d.bandwidth_hz},
                {"sample_rate_hz", d.sample_rate_hz},
                {"gain_mV_per_photon", d.gain_mV_per_photon},
                {"responsivity_A_per_W", d.responsivity_A_per_W},
                {"load_resistance_ohm", d.load_resistance_ohm},
                {"ac_coupling_hz", d.ac_coupling_hz}};
}

json to_json(const NoiseModel& n) {
    return json{{"electronic_sigma_mV", n.electronic_sigma_mV}, {"seed", n.seed}};
}

json to_json(const AdcConfig& a) {
    return json{{"n_bits", a.n_bits},
                {"v_min", a.v_min},
                {"v_max", a.v_max},
                {"undersample_factor", a.undersample_factor}};
}

json to_json(const LfsrConfig& c) {
    return json{{"degree", c.degree},
                {"taps", c.taps},
                {"initial_state", state_to_hex(c.initial_state, c.degree)}};
}

json to_json(const EntropyReport& r) {
    return json{{"min_entropy_bits", r.min_entropy_bits},
                {"max_prob", r.max_prob},
                {"n_bits", r.n_bits},
                {"samples_used", r.samples_used},
                {"mode", std::string(to_string(r.mode))},
                {"warnings", r.warnings},
                {"shannon_bits", r.shannon_bits}};
}

json to_json(const TestReport& r) {
    json tests = json::array();
    for (const auto& t : r.records) {
        tests.push_back(json{{"name", t.name},
                             {"statistic", t.statistic},
                             {"p_value", t.p_value},
                             {"applicable", t.applicable},
                             {"pass", t.pass}});
    }
    json j{{"alpha", r.alpha}, {"bit_length", r.bit_length}, {"tests", tests}, {"all_pass", r.all_pass()}};
    j["bit_acf_lag1"] = r.acf_lag1;
    j["bit_acf_first_nonpositive_lag"] =
        r.acf_first_nonpositive_lag ? json(*r.acf_first_nonpositive_lag) : json(nullptr);
    return j;
}

json to_json(const VarianceDecomposition& v) {
    return json{{"total_var", v.total_var},
                {"electronic_var", v.electronic_var},
                {"quantum_var", v.quantum_var},
                {"inconsistent", v.inconsistent}};
}

std::string state_to_hex(const LfsrState& s, int degree) {
    static constexpr char hex[] = "0123456789abcdef";
    const int digits = (degree + 3) / 4;
    std::string out;
    for (int d = digits - 1; d >= 0; --d) {
        int nibble = 0;
        for (int b = 3; b >= 0; --b) {
            const int pos = 4 * d + b + 1;
            nibble = (nibble << 1) | (pos <= 128 && s.bit(pos) ? 1 : 0);
        }
        out.push_back(hex[nibble]);
    }
    return out;
}

LfsrState state_from_hex(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) {
        hex.remove_prefix(2);
    }
    require(!hex.empty() && hex.size() <= 32, ErrorKind::invalid_config,
            "LFSR state must be 1 to 32 hex digits");
    LfsrState s;
    int pos = 1;
    for (auto it = hex.rbegin(); it != hex.rend(); ++it) {
        int v = 0;
        const char c = *it;
        if (c >= '0' && c <= '9') {
            v = c - '0';
        } else if (c >= 'a' && c <= 'f') {
            v = c - 'a' + 10;
        } else if (c >= 'A' && c <= 'F') {
            v = c - 'A' + 10;
        } else {
            fail(ErrorKind::invalid_config, "LFSR state has a non-hex digit");
        }
        for (int b = 0; b < 4; ++b, ++pos) {
            s.set_bit(pos, (v >> b) & 1);
        }
    }
    return s;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace sqrng::io
