// sqrng: simulate detector traces, analyze them, and extract and test bits.
//
// Exit status: 0 success, 1 a randomness test failed, 2 data or config error.

#include "sqrng/error.hpp"
#include "sqrng/io.hpp"
#include "sqrng/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace sqrng;
namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitTestFailure = 1;
constexpr int kExitDataError = 2;

struct ConfigFlags {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "pipeline config JSON");
        cmd->add_option("--preset", preset, "coherent, silver or aluminum")
            ->check(CLI::IsMember({"coherent", "silver", "aluminum"}));
        cmd->add_option("--seed", seed, "seed for the photon and noise streams");
        cmd->add_option("--out", out, "output directory");
    }

    [[nodiscard]] PipelineConfig load() const {
        PipelineConfig base = preset_config(preset.empty() ? Preset::silver : *parse_preset(preset));
        PipelineConfig cfg = config_path.empty() ? base : load_config(config_path, base);
        if (seed) {
            cfg.set_seed(*seed);
        }
        cfg.validate();
        return cfg;
    }

    [[nodiscard]] fs::path out_dir(const PipelineConfig& cfg) const {
        return out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
    }
};

json trace_meta(const PipelineConfig& cfg, const SourceModel& source) {
    return json{{"seed", source.seed},
                {"source", io::to_json(source)},
                {"detector", io::to_json(cfg.detector)},
                {"noise", io::to_json(cfg.noise)}};
}

int cmd_simulate(const ConfigFlags& flags) {
    const auto cfg = flags.load();
    const auto dir = flags.out_dir(cfg);
    std::vector<SourceModel> sources{coherent_reference(cfg.source)};
    if (cfg.source.kind == SourceKind::scattered) {
        sources.push_back(cfg.source);
    }
    for (const auto& s : sources) {
        const std::string label = s.kind == SourceKind::coherent ? "coherent" : "scattered";
        auto trace = synthesize_total(s, cfg.detector, cfg.noise, cfg.n_samples);
        trace.label = label;
        const auto path = dir / (label + ".csv");
        io::write_trace(path, trace, trace_meta(cfg, s));
        std::cout << path.string() << ": " << trace.size() << " samples\n";
    }
    return kExitOk;
}

struct AnalyzeFlags {
    std::string trace;
    std::string which;
    std::string out = ".";
    std::size_t max_lag = 200;
    int n_bins = 256;
    std::size_t segment = 4096;
    double overlap = 0.5;
    std::optional<double> optical_power_W;
    double responsivity = 1.0;
    double load_ohm = 50.0;
    double bandwidth_hz = 5e9;
};

int cmd_analyze(const AnalyzeFlags& f) {
    const auto trace = io::read_trace(f.trace);
    const fs::path dir(f.out);
    json summary{{"trace", f.trace}, {"samples", trace.size()}, {"sample_rate_hz", trace.sample_rate_hz}};
    if (f.which == "hist") {
        const auto h = histogram(trace, f.n_bins);
        summary["n_bins"] = f.n_bins;
        summary["fwhm_mV"] = h.fwhm_mV ? json(*h.fwhm_mV) : json(nullptr);
        summary["mode_bin_prob"] = h.mode_bin_prob;
        io::write_file_atomic(dir / "hist.csv", io::histogram_csv(h));
    } else if (f.which == "acf") {
        const auto acf = autocorrelation(trace, f.max_lag);
        summary["max_lag"] = f.max_lag;
        summary["first_nonpositive_lag"] =
            acf.first_nonpositive_lag ? json(*acf.first_nonpositive_lag) : json(nullptr);
        io::write_file_atomic(dir / "acf.csv", io::acf_csv(acf));
    } else {
        auto psd = psd_welch(trace, f.segment, f.overlap);
        if (f.optical_power_W) {
            const ShotNoiseParams p{f.responsivity * *f.optical_power_W, f.load_ohm, f.bandwidth_hz};
            psd.shot_noise_line_dBm_per_Hz = shot_noise_density_dBm_per_Hz(p);
            summary["shot_noise_power_dBm"] = shot_noise_power(p).dBm;
        }
        summary["segment_length"] = psd.segment_length;
        summary["segments"] = psd.segments;
        summary["integrated_power_mV2"] = integrated_power_mV2(psd);
        summary["shot_noise_line_dBm_per_Hz"] =
            psd.shot_noise_line_dBm_per_Hz ? json(*psd.shot_noise_line_dBm_per_Hz) : json(nullptr);
        io::write_file_atomic(dir / "psd.csv", io::psd_csv(psd));
    }
    io::write_file_atomic(dir / (f.which + ".json"), io::dump(summary));
    std::cout << io::dump(summary);
    return kExitOk;
}

struct EntropyFlags {
    ConfigFlags config;
    std::string trace;
    std::string mode = "empirical-total";
    int n_bits = 16;
};

AdcConfig adc_for(const PipelineConfig& cfg, const SignalTrace& trace, int n_bits) {
    if (cfg.adc.v_min) {
        AdcConfig adc;
        adc.n_bits = n_bits;
        adc.v_min = *cfg.adc.v_min;
        adc.v_max = *cfg.adc.v_max;
        adc.validate();
        return adc;
    }
    return auto_range(trace, n_bits, cfg.adc.range_sigmas);
}

int cmd_entropy(const EntropyFlags& f) {
    const auto cfg = f.config.load();
    EntropyReport report;
    if (f.mode == "model-quantum-only") {
        // the range comes from the total signal so both modes share one ADC
        const auto total = synthesize_total(cfg.source, cfg.detector, cfg.noise, cfg.n_samples);
        const auto adc = adc_for(cfg, total, f.n_bits);
        report = quantum_min_entropy(cfg.source, cfg.detector, adc, cfg.n_samples);
    } else {
        require(!f.trace.empty(), ErrorKind::invalid_argument, "empirical-total mode needs --trace");
        const auto trace = io::read_trace(f.trace);
        report = min_entropy(digitize(trace, adc_for(cfg, trace, f.n_bits)));
    }
    const auto ratio = extraction_ratio(report);
    json j = io::to_json(report);
    j["keep_bits"] = ratio.keep_bits;
    j["ratio"] = ratio.ratio;
    io::write_file_atomic(f.config.out_dir(cfg) / "entropy.json", io::dump(j));
    std::cout << io::dump(j);
    return kExitOk;
}

struct ExtractFlags {
    ConfigFlags config;
    std::string trace;
    std::optional<int> keep_bits;
    std::optional<std::size_t> factor;
};

int cmd_extract(const ExtractFlags& f) {
    const auto cfg = f.config.load();
    const auto trace = io::read_trace(f.trace);
    std::size_t k = f.factor.value_or(cfg.adc.undersample_factor);
    if (k == 0) {
        k = select_undersample_factor(autocorrelation(trace, cfg.analysis.max_lag));
    }
    const auto full = digitize(trace, adc_for(cfg, trace, cfg.adc.n_bits));
    const int keep = f.keep_bits.value_or(extraction_ratio(min_entropy(full)).keep_bits);
    const auto sparse = undersample(full, k);
    const auto raw = to_bits(sparse);
    const auto w = lfsr_whiten(raw, cfg.extractor.lfsr, keep, cfg.extractor.block_bits);
    const auto path = f.config.out_dir(cfg) / "bits.bin";
    io::write_bitstream(path, w.bits,
                        json{{"source", w.bits.provenance},
                             {"trace", f.trace},
                             {"adc_config", io::to_json(sparse.adc)},
                             {"lfsr", io::to_json(cfg.extractor.lfsr)},
                             {"keep_bits", keep},
                             {"block_bits", cfg.extractor.block_bits},
                             {"discarded_bits", w.discarded_bits}});
    std::cout << path.string() << ": " << w.bits.size() << " bits, undersample " << k << ", keep " << keep
              << " of " << cfg.extractor.block_bits << "\n";
    return kExitOk;
}

struct TestFlags {
    std::string bits;
    double alpha = 0.01;
    std::string out;
};

int cmd_test(const TestFlags& f) {
    const auto bits = io::read_bitstream(f.bits);
    TestOptions opt;
    opt.alpha = f.alpha;
    const auto report = run_battery(bits, opt);
    const std::string text = io::dump(io::to_json(report));
    if (!f.out.empty()) {
        io::write_file_atomic(fs::path(f.out) / "test_report.json", text);
    }
    std::cout << text;
    return report.all_pass() ? kExitOk : kExitTestFailure;
}

int cmd_pipeline(const ConfigFlags& flags) {
    const auto cfg = flags.load();
    const auto bundle = run_pipeline_to(cfg, flags.out_dir(cfg));
    const auto& r = bundle.result;
    for (const auto& w : r.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    std::cout << "acf lag " << r.acf_first_nonpositive_lag << ", undersample " << r.undersample_factor
              << ", min-entropy " << r.entropy.min_entropy_bits << " bits, keep " << r.extraction.keep_bits
              << ", " << r.whitened.bits.size() << " bits\n";
    for (const auto& t : r.tests.records) {
        std::cout << "  " << t.name << " p=" << t.p_value << (t.applicable ? (t.pass ? " pass" : " FAIL") : " n/a")
                  << "\n";
    }
    std::cout << bundle.manifest.string() << "\n";
    return r.tests.all_pass() ? kExitOk : kExitTestFailure;
}

struct CalibrateFlags {
    ConfigFlags config;
    double target = 0.0;
};

int cmd_calibrate(const CalibrateFlags& f) {
    const auto cfg = f.config.load();
    const auto res = calibrate_mode_count(f.target, cfg.source, cfg.detector, cfg.noise);
    json j{{"target_ratio", f.target},
           {"mode_count", res.mode_count},
           {"achieved_ratio", res.achieved_ratio},
           {"coherent_fwhm_mV", res.coherent_fwhm_mV},
           {"iterations", res.iterations}};
    std::cout << io::dump(j);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scattering-light random number generator: simulation, analysis and extraction"};
    app.require_subcommand(1);

    ConfigFlags sim_flags;
    auto* sim = app.add_subcommand("simulate", "write coherent and scattered traces");
    sim_flags.attach(sim);

    AnalyzeFlags an_flags;
    auto* an = app.add_subcommand("analyze", "histogram, ACF or PSD of a trace");
    an->add_option("trace", an_flags.trace, "trace CSV")->required();
    an->add_option("--which", an_flags.which, "hist, acf or psd")
        ->required()
        ->check(CLI::IsMember({"hist", "acf", "psd"}));
    an->add_option("--out", an_flags.out, "output directory");
    an->add_option("--max-lag", an_flags.max_lag);
    an->add_option("--bins", an_flags.n_bins);
    an->add_option("--segment", an_flags.segment);
    an->add_option("--overlap", an_flags.overlap);
    an->add_option("--optical-power", an_flags.optical_power_W, "W; adds the shot-noise line");
    an->add_option("--responsivity", an_flags.responsivity, "A/W");
    an->add_option("--load", an_flags.load_ohm, "ohm");
    an->add_option("--bandwidth", an_flags.bandwidth_hz, "Hz");

    EntropyFlags en_flags;
    auto* en = app.add_subcommand("entropy", "min-entropy of a digitized trace");
    en_flags.config.attach(en);
    en->add_option("--trace", en_flags.trace, "trace CSV");
    en->add_option("--mode", en_flags.mode)->check(CLI::IsMember({"empirical-total", "model-quantum-only"}));
    en->add_option("--bits", en_flags.n_bits, "ADC bits");

    ExtractFlags ex_flags;
    auto* ex = app.add_subcommand("extract", "undersample, digitize and whiten a trace");
    ex_flags.config.attach(ex);
    ex->add_option("trace", ex_flags.trace, "trace CSV")->required();
    ex->add_option("--keep-bits", ex_flags.keep_bits);
    ex->add_option("--factor", ex_flags.factor, "undersample factor");

    TestFlags te_flags;
    auto* te = app.add_subcommand("test", "run the test battery on a bit file");
    te->add_option("bits", te_flags.bits, "bit file")->required();
    te->add_option("--alpha", te_flags.alpha);
    te->add_option("--out", te_flags.out, "output directory");

    ConfigFlags pl_flags;
    auto* pl = app.add_subcommand("pipeline", "run every stage and write the report bundle");
    pl_flags.attach(pl);

    CalibrateFlags ca_flags;
    auto* ca = app.add_subcommand("calibrate", "solve for the mode count giving a FWHM ratio");
    ca_flags.config.attach(ca);
    ca->add_option("--target", ca_flags.target, "scattered/coherent FWHM ratio")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitDataError;
    }

    try {
        if (*sim) {
            return cmd_simulate(sim_flags);
        }
        if (*an) {
            return cmd_analyze(an_flags);
        }
        if (*en) {
            return cmd_entropy(en_flags);
        }
        if (*ex) {
            return cmd_extract(ex_flags);
        }
        if (*te) {
            return cmd_test(te_flags);
        }
        if (*pl) {
            return cmd_pipeline(pl_flags);
        }
        return cmd_calibrate(ca_flags);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}
