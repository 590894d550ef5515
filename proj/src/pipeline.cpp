#include "sqrng/pipeline.hpp"

#include "sqrng/error.hpp"
#include "sqrng/io.hpp"

#include <cmath>
#include <set>
#include <utility>

namespace sqrng {

namespace {

using nlohmann::json;

// Shared desk-scale detector: 40 GS/s sampling, a 0.4 GHz response that
// puts the coherent ACF crossing near lag 44, and 32 MHz AC coupling.
constexpr double kSampleRate = 40e9;
constexpr double kResponseBandwidth = 0.4e9;
constexpr double kAcCoupling = 32e6;
constexpr double kGain = 0.01;
// Coherent FWHM 0.40 mV with electronic noise holding 10% of the variance.
constexpr double kMeanRate = 8975.53;
constexpr double kElectronicSigma = 0.0537158;
constexpr double kSpeckleBandwidth = 1.4e9;
// FWHM ratios 1.675 and 4.175 against the coherent preset.
constexpr double kSilverModes = 15890.0;
constexpr double kAluminumModes = 1768.0;
// R_L * i = 0.07503 V into 50 ohm at 1 A/W.
constexpr double kOpticalPower = 1.5006e-3;

// Reads the keys of one JSON object and rejects the ones nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        require(j_.is_object(), ErrorKind::invalid_config, path_ + " must be an object");
    }

    template <typename T>
    bool get(const std::string& key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) {
            return false;
        }
        convert(*it, key, out);
        return true;
    }

    template <typename T>
    void get_optional(const std::string& key, std::optional<T>& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) {
            return;
        }
        if (it->is_null()) {
            out.reset();
            return;
        }
        T v{};
        convert(*it, key, v);
        out = v;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    Section child(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        const auto it = j_.find(key);
        return Section(it == j_.end() ? empty : *it, path_ + "." + key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            require(seen_.count(key) == 1, ErrorKind::invalid_config,
                    "unknown key " + path_ + "." + key);
        }
    }

private:
    [[noreturn]] void type_error(const std::string& key, const char* expected) const {
        fail(ErrorKind::invalid_config, path_ + "." + key + " must be " + expected);
    }

    void convert(const json& v, const std::string& key, double& out) const {
        if (!v.is_number()) {
            type_error(key, "a number");
        }
        out = v.get<double>();
    }
    void convert(const json& v, const std::string& key, int& out) const {
        if (!v.is_number_integer()) {
            type_error(key, "an integer");
        }
        out = v.get<int>();
    }
    void convert(const json& v, const std::string& key, std::uint64_t& out) const {
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            type_error(key, "a non-negative integer");
        }
        out = v.get<std::uint64_t>();
    }
    void convert(const json& v, const std::string& key, std::string& out) const {
        if (!v.is_string()) {
            type_error(key, "a string");
        }
        out = v.get<std::string>();
    }
    void convert(const json& v, const std::string& key, std::vector<int>& out) const {
        if (!v.is_array()) {
            type_error(key, "an array of integers");
        }
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number_integer()) {
                type_error(key, "an array of integers");
            }
            out.push_back(e.get<int>());
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

EntropyMode parse_entropy_mode(const std::string& s) {
    if (s == to_string(EntropyMode::empirical_total)) {
        return EntropyMode::empirical_total;
    }
    if (s == to_string(EntropyMode::model_quantum_only)) {
        return EntropyMode::model_quantum_only;
    }
    fail(ErrorKind::invalid_config, "analysis.entropy_mode must be empirical-total or model-quantum-only");
}

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage ") + name + ": " + e.what());
    }
}

} // namespace

std::optional<Preset> parse_preset(std::string_view name) {
    if (name == "coherent") {
        return Preset::coherent;
    }
    if (name == "silver") {
        return Preset::silver;
    }
    if (name == "aluminum") {
        return Preset::aluminum;
    }
    return std::nullopt;
}

std::string_view to_string(Preset p) noexcept {
    switch (p) {
    case Preset::coherent: return "coherent";
    case Preset::silver: return "silver";
    case Preset::aluminum: return "aluminum";
    }
    return "unknown";
}

std::vector<std::string> PipelineConfig::validate() const {
    source.validate();
    detector.validate();
    noise.validate();
    require(adc.n_bits >= 1 && adc.n_bits <= 24, ErrorKind::invalid_config, "adc.n_bits must be in [1, 24]");
    require(adc.v_min.has_value() == adc.v_max.has_value(), ErrorKind::invalid_config,
            "adc.v_min and adc.v_max must be given together");
    if (adc.v_min) {
        require(std::isfinite(*adc.v_min) && std::isfinite(*adc.v_max) && *adc.v_min < *adc.v_max,
                ErrorKind::invalid_config, "adc range must satisfy v_min < v_max");
    }
    require(std::isfinite(adc.range_sigmas) && adc.range_sigmas > 0.0, ErrorKind::invalid_config,
            "adc.range_sigmas must be > 0");
    require(analysis.max_lag >= 1, ErrorKind::invalid_config, "analysis.max_lag must be >= 1");
    require(analysis.n_bins >= 2, ErrorKind::invalid_config, "analysis.n_bins must be >= 2");
    require(analysis.psd_overlap >= 0.0 && analysis.psd_overlap < 1.0, ErrorKind::invalid_config,
            "analysis.psd_overlap must be in [0, 1)");
    if (analysis.optical_power_W) {
        require(std::isfinite(*analysis.optical_power_W) && *analysis.optical_power_W > 0.0,
                ErrorKind::invalid_config, "analysis.optical_power_W must be > 0");
    }
    extractor.lfsr.validate();
    require(extractor.block_bits >= 1, ErrorKind::invalid_config, "extractor.block_bits must be >= 1");
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::invalid_config, "tests.alpha must be in (0, 1)");
    require(n_samples >= 1, ErrorKind::invalid_config, "n_samples must be >= 1");
    require(n_samples > 4 * analysis.max_lag, ErrorKind::invalid_config,
            "n_samples must exceed 4 * analysis.max_lag");

    std::vector<std::string> warnings;
    if (n_samples < kMinEntropySampleFloor) {
        warnings.push_back("n_samples below " + std::to_string(kMinEntropySampleFloor) +
                           "; min-entropy estimates are unreliable");
    }
    return warnings;
}

void PipelineConfig::set_seed(std::uint64_t seed) {
    source.seed = seed;
    noise.seed = seed;
}

PipelineConfig preset_config(Preset p) {
    PipelineConfig c;
    c.name = std::string(to_string(p));
    c.detector.bandwidth_hz = kResponseBandwidth;
    c.detector.sample_rate_hz = kSampleRate;
    c.detector.gain_mV_per_photon = kGain;
    c.detector.ac_coupling_hz = kAcCoupling;
    c.noise.electronic_sigma_mV = kElectronicSigma;
    c.source.mean_rate = kMeanRate;
    c.analysis.optical_power_W = kOpticalPower;
    c.extractor.lfsr = default_lfsr(64);
    c.output_dir = "out/" + c.name;
    if (p != Preset::coherent) {
        c.source.kind = SourceKind::scattered;
        c.source.mode_count = p == Preset::silver ? kSilverModes : kAluminumModes;
        c.source.speckle_bandwidth_hz = kSpeckleBandwidth;
    }
    c.set_seed(1);
    return c;
}

PipelineConfig parse_config(const json& j, const PipelineConfig& base) {
    PipelineConfig c = base;
    Section root(j, "config");

    int version = 0;
    require(root.get("schema_version", version), ErrorKind::invalid_config, "config.schema_version is required");
    require(version == kConfigSchemaVersion, ErrorKind::invalid_config,
            "unsupported schema_version " + std::to_string(version));

    if (std::string preset; root.get("preset", preset)) {
        const auto p = parse_preset(preset);
        require(p.has_value(), ErrorKind::invalid_config, "unknown preset " + preset);
        c = preset_config(*p);
    }
    root.get("name", c.name);

    {
        auto s = root.child("source");
        if (std::string kind; s.get("kind", kind)) {
            require(kind == "coherent" || kind == "scattered", ErrorKind::invalid_config,
                    "source.kind must be coherent or scattered");
            c.source.kind = kind == "coherent" ? SourceKind::coherent : SourceKind::scattered;
        }
        s.get("mean_rate", c.source.mean_rate);
        s.get("mode_count", c.source.mode_count);
        s.get("speckle_bandwidth_hz", c.source.speckle_bandwidth_hz);
        s.get("seed", c.source.seed);
        s.finish();
    }
    {
        auto s = root.child("detector");
        s.get("bandwidth_hz", c.detector.bandwidth_hz);
        s.get("sample_rate_hz", c.detector.sample_rate_hz);
        s.get("gain_mV_per_photon", c.detector.gain_mV_per_photon);
        s.get("responsivity_A_per_W", c.detector.responsivity_A_per_W);
        s.get("load_resistance_ohm", c.detector.load_resistance_ohm);
        s.get("ac_coupling_hz", c.detector.ac_coupling_hz);
        s.finish();
    }
    {
        auto s = root.child("noise");
        s.get("electronic_sigma_mV", c.noise.electronic_sigma_mV);
        s.get("seed", c.noise.seed);
        s.finish();
    }
    {
        auto s = root.child("adc");
        s.get("n_bits", c.adc.n_bits);
        s.get_optional("v_min", c.adc.v_min);
        s.get_optional("v_max", c.adc.v_max);
        s.get("range_sigmas", c.adc.range_sigmas);
        std::uint64_t k = c.adc.undersample_factor;
        s.get("undersample_factor", k);
        c.adc.undersample_factor = k;
        s.finish();
    }
    {
        auto s = root.child("analysis");
        std::uint64_t v = c.analysis.max_lag;
        s.get("max_lag", v);
        c.analysis.max_lag = v;
        s.get("n_bins", c.analysis.n_bins);
        v = c.analysis.psd_segment;
        s.get("psd_segment", v);
        c.analysis.psd_segment = v;
        s.get("psd_overlap", c.analysis.psd_overlap);
        s.get_optional("optical_power_W", c.analysis.optical_power_W);
        if (std::string mode; s.get("entropy_mode", mode)) {
            c.analysis.entropy_mode = parse_entropy_mode(mode);
        }
        s.finish();
    }
    {
        auto s = root.child("extractor");
        int degree = c.extractor.lfsr.degree;
        const bool degree_set = s.get("degree", degree);
        if (degree_set && degree != c.extractor.lfsr.degree) {
            // taps and seed state follow the degree unless given explicitly
            c.extractor.lfsr.degree = degree;
            c.extractor.lfsr.taps = maximal_taps(degree);
            c.extractor.lfsr.initial_state = LfsrState::all_ones(degree);
        }
        s.get("taps", c.extractor.lfsr.taps);
        if (std::string hex; s.get("initial_state", hex)) {
            c.extractor.lfsr.initial_state = io::state_from_hex(hex);
        }
        s.get("block_bits", c.extractor.block_bits);
        s.finish();
    }
    {
        auto s = root.child("tests");
        s.get("alpha", c.alpha);
        s.finish();
    }
    std::uint64_t n = c.n_samples;
    root.get("n_samples", n);
    c.n_samples = n;
    root.get("output_dir", c.output_dir);
    root.finish();

    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path, const PipelineConfig& base) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::parse_error, path.string() + ": " + e.what());
    }
    try {
        return parse_config(j, base);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

json to_json(const PipelineConfig& c) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json source = io::to_json(c.source);
    if (c.source.kind == SourceKind::coherent) {
        source["mode_count"] = c.source.mode_count;
        source["speckle_bandwidth_hz"] = c.source.speckle_bandwidth_hz;
    }
    json extractor = io::to_json(c.extractor.lfsr);
    extractor["block_bits"] = c.extractor.block_bits;
    return json{
        {"schema_version", kConfigSchemaVersion},
        {"name", c.name},
        {"source", source},
        {"detector", io::to_json(c.detector)},
        {"noise", io::to_json(c.noise)},
        {"adc",
         {{"n_bits", c.adc.n_bits},
          {"v_min", opt(c.adc.v_min)},
          {"v_max", opt(c.adc.v_max)},
          {"range_sigmas", c.adc.range_sigmas},
          {"undersample_factor", c.adc.undersample_factor}}},
        {"analysis",
         {{"max_lag", c.analysis.max_lag},
          {"n_bins", c.analysis.n_bins},
          {"psd_segment", c.analysis.psd_segment},
          {"psd_overlap", c.analysis.psd_overlap},
          {"optical_power_W", opt(c.analysis.optical_power_W)},
          {"entropy_mode", std::string(to_string(c.analysis.entropy_mode))}}},
        {"extractor", extractor},
        {"tests", {{"alpha", c.alpha}}},
        {"n_samples", c.n_samples},
        {"output_dir", c.output_dir},
    };
}

SourceModel coherent_reference(const SourceModel& s) {
    SourceModel c = s;
    c.kind = SourceKind::coherent;
    c.mode_count = 0.0;
    c.speckle_bandwidth_hz = 0.0;
    return c;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult r;
    r.warnings = stage("config", [&] { return cfg.validate(); });

    const SignalTrace trace = stage("simulate", [&] {
        auto t = synthesize_total(cfg.source, cfg.detector, cfg.noise, cfg.n_samples);
        t.label = cfg.name;
        return t;
    });

    stage("histogram", [&] { r.histogram = histogram(trace, cfg.analysis.n_bins); });
    if (!r.histogram.fwhm_mV) {
        r.warnings.push_back("FWHM undefined for this histogram");
    }
    stage("psd", [&] {
        r.psd = psd_welch(trace, std::min(cfg.analysis.psd_segment, std::bit_floor(trace.size())),
                          cfg.analysis.psd_overlap);
        if (cfg.analysis.optical_power_W) {
            ShotNoiseParams p{cfg.detector.responsivity_A_per_W * *cfg.analysis.optical_power_W,
                              cfg.detector.load_resistance_ohm, cfg.detector.bandwidth_hz};
            r.psd.shot_noise_line_dBm_per_Hz = shot_noise_density_dBm_per_Hz(p);
        }
    });

    stage("acf", [&] {
        r.acf = autocorrelation(trace, cfg.analysis.max_lag);
        r.acf_first_nonpositive_lag = first_nonpositive_lag(r.acf);
    });
    stage("undersample", [&] {
        r.undersample_factor = cfg.adc.undersample_factor != 0 ? cfg.adc.undersample_factor
                                                               : select_undersample_factor(r.acf);
        require(r.undersample_factor < trace.size(), ErrorKind::insufficient_data,
                "undersample factor leaves fewer than two samples");
    });

    const DigitalTrace full = stage("digitize", [&] {
        if (cfg.adc.v_min) {
            r.adc.n_bits = cfg.adc.n_bits;
            r.adc.v_min = *cfg.adc.v_min;
            r.adc.v_max = *cfg.adc.v_max;
        } else {
            r.adc = auto_range(trace, cfg.adc.n_bits, cfg.adc.range_sigmas);
        }
        auto dt = digitize(trace, r.adc);
        r.clip_fraction = dt.clip_fraction();
        return dt;
    });

    stage("min_entropy", [&] {
        r.entropy = cfg.analysis.entropy_mode == EntropyMode::empirical_total
                        ? min_entropy(full)
                        : quantum_min_entropy(cfg.source, cfg.detector, r.adc, cfg.n_samples);
    });

    stage("extraction_ratio", [&] {
        r.extraction = extraction_ratio(r.entropy);
        require(r.extraction.keep_bits > 0, ErrorKind::zero_entropy,
                "min-entropy below one bit per sample; nothing to extract");
    });

    stage("whiten", [&] {
        const DigitalTrace sparse = undersample(full, r.undersample_factor);
        r.adc = sparse.adc;
        r.effective_sample_rate_hz = sparse.effective_rate_hz;
        const BitStream raw = to_bits(sparse);
        r.raw_bits = raw.size();
        r.whitened = lfsr_whiten(raw, cfg.extractor.lfsr, r.extraction.keep_bits, cfg.extractor.block_bits);
        r.output_bit_rate_hz = r.effective_sample_rate_hz * r.extraction.keep_bits *
                               static_cast<double>(r.adc.n_bits) / cfg.extractor.block_bits;
    });

    stage("test", [&] {
        TestOptions opt;
        opt.alpha = cfg.alpha;
        r.tests = run_battery(r.whitened.bits, opt);
    });
    return r;
}

PipelineBundle run_pipeline_to(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    PipelineBundle bundle;
    bundle.result = run_pipeline(cfg);
    const auto& r = bundle.result;

    json artifacts = json::object();
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        const auto path = out_dir / name;
        io::write_file_atomic(path, content);
        written.push_back(path);
        artifacts[name] = json{{"sha256", io::sha256_hex(content)}, {"bytes", content.size()}};
    };

    try {
        stage("write", [&] {
            emit("histogram.csv", io::histogram_csv(r.histogram));
            emit("acf.csv", io::acf_csv(r.acf));
            emit("psd.csv", io::psd_csv(r.psd));
            emit("bit_acf.csv", io::acf_csv(bit_acf(r.whitened.bits, 16)));
            emit("entropy.json", io::dump(io::to_json(r.entropy)));
            emit("test_report.json", io::dump(io::to_json(r.tests)));

            const auto& bytes = r.whitened.bits.bytes();
            const std::string payload(bytes.begin(), bytes.end());
            json bit_meta{{"bit_length", r.whitened.bits.size()},
                          {"source", r.whitened.bits.provenance},
                          {"adc_config", io::to_json(r.adc)},
                          {"lfsr", io::to_json(cfg.extractor.lfsr)},
                          {"keep_bits", r.extraction.keep_bits},
                          {"block_bits", cfg.extractor.block_bits},
                          {"discarded_bits", r.whitened.discarded_bits}};
            emit("bits.bin", payload);
            emit("bits.bin.json", io::dump(bit_meta));

            json stages{
                {"acf_first_nonpositive_lag", r.acf_first_nonpositive_lag},
                {"undersample_factor", r.undersample_factor},
                {"adc", io::to_json(r.adc)},
                {"clip_fraction", r.clip_fraction},
                {"fwhm_mV", r.histogram.fwhm_mV ? json(*r.histogram.fwhm_mV) : json(nullptr)},
                {"shot_noise_line_dBm_per_Hz",
                 r.psd.shot_noise_line_dBm_per_Hz ? json(*r.psd.shot_noise_line_dBm_per_Hz) : json(nullptr)},
                {"min_entropy", io::to_json(r.entropy)},
                {"keep_bits", r.extraction.keep_bits},
                {"extraction_ratio", r.extraction.ratio},
                {"raw_bits", r.raw_bits},
                {"whitened_bits", r.whitened.bits.size()},
                {"discarded_bits", r.whitened.discarded_bits},
                {"effective_sample_rate_hz", r.effective_sample_rate_hz},
                {"output_bit_rate_hz", r.output_bit_rate_hz},
                {"all_tests_pass", r.tests.all_pass()},
            };
            json manifest{{"schema_version", kConfigSchemaVersion},
                          {"config", to_json(cfg)},
                          {"stages", stages},
                          {"warnings", r.warnings},
                          {"artifacts", artifacts}};
            bundle.manifest = out_dir / "manifest.json";
            io::write_file_atomic(bundle.manifest, io::dump(manifest));
        });
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) {
            std::filesystem::remove(p, ec);
        }
        throw;
    }
    bundle.bit_file = out_dir / "bits.bin";
    return bundle;
}

} // namespace sqrng
