// Acceptance run: one PASS/FAIL line per criterion.
//
// A criterion whose bound is tighter than the sampling spread of an ideal
// generator carries a note with the ideal-case probability of meeting it.
// Such a criterion is still run and reported as FAIL when it misses; the exit
// status is nonzero only for failures without a note.

#include "sqrng/analysis.hpp"
#include "sqrng/battery.hpp"
#include "sqrng/entropy.hpp"
#include "sqrng/error.hpp"
#include "sqrng/extractor.hpp"
#include "sqrng/io.hpp"
#include "sqrng/pipeline.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sqrng;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
    std::optional<std::string> statistical_note;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

BitStream coin(std::size_t n, std::uint64_t seed, double p_one = 0.5) {
    std::mt19937_64 eng(seed);
    std::bernoulli_distribution b(p_one);
    BitStream out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(b(eng));
    }
    return out;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

Outcome fwhm_broadening() {
    std::ostringstream os;
    bool ok = true;
    double coherent_fwhm = 0.0;
    for (auto p : {Preset::coherent, Preset::silver, Preset::aluminum}) {
        const auto cfg = preset_config(p);
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = run_pipeline(cfg);
        const double elapsed = seconds_since(t0);
        const double w = r.histogram.fwhm_mV.value_or(0.0);
        ok = ok && elapsed < 60.0 && r.clip_fraction < 1e-3 && r.histogram.fwhm_mV.has_value();
        os << to_string(p) << " fwhm=" << fmt(w) << "mV t=" << fmt(elapsed, 3) << "s clip=" << fmt(r.clip_fraction, 2);
        if (p == Preset::coherent) {
            coherent_fwhm = w;
        } else {
            const double target = p == Preset::silver ? 1.675 : 4.175;
            const double ratio = w / coherent_fwhm;
            ok = ok && within(ratio, target, 0.10 * target);
            os << " ratio=" << fmt(ratio) << " (target " << target << " +-10%)";
        }
        os << "; ";
    }
    return {ok, os.str()};
}

Outcome acf_ordering() {
    const int runs = 20;
    int ordered = 0;
    std::size_t preset_coherent_lag = 0;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (int seed = 1; seed <= runs; ++seed) {
        std::size_t lag[3] = {0, 0, 0};
        int i = 0;
        for (auto p : {Preset::coherent, Preset::silver, Preset::aluminum}) {
            auto cfg = preset_config(p);
            cfg.set_seed(static_cast<std::uint64_t>(seed));
            const auto trace = synthesize_total(cfg.source, cfg.detector, cfg.noise, cfg.n_samples);
            lag[i++] = first_nonpositive_lag(autocorrelation(trace, cfg.analysis.max_lag));
        }
        ordered += lag[0] > lag[1] && lag[1] > lag[2];
        lo = std::min(lo, lag[0]);
        hi = std::max(hi, lag[0]);
        if (seed == 1) {
            preset_coherent_lag = lag[0];
        }
    }
    const bool ok = ordered >= 19 && within(static_cast<double>(preset_coherent_lag), 44.0, 10.0);
    return {ok, "ordered in " + std::to_string(ordered) + "/20 (need >= 19); coherent preset lag " +
                    std::to_string(preset_coherent_lag) + " (target 44 +-10), range over seeds [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]"};
}

Outcome extraction_decorrelation() {
    int good = 0;
    std::ostringstream lags;
    for (int seed = 1; seed <= 20; ++seed) {
        auto cfg = preset_config(Preset::coherent);
        cfg.set_seed(static_cast<std::uint64_t>(seed));
        const auto r = run_pipeline(cfg);
        const auto lag = r.tests.acf_first_nonpositive_lag;
        good += lag && *lag <= 2;
        lags << (lag ? std::to_string(*lag) : std::string("none")) << (seed < 20 ? "," : "");
    }
    return {good >= 19, "lag <= 2 in " + std::to_string(good) + "/20 (need >= 19); lags " + lags.str()};
}

Outcome min_entropy_checks() {
    // uniform: every 16-bit code equally often, shuffled
    const std::size_t n = 10'000'000;
    DigitalTrace uniform;
    uniform.adc.n_bits = 16;
    uniform.adc.v_min = 0.0;
    uniform.adc.v_max = 1.0;
    uniform.codes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        uniform.codes[i] = static_cast<std::uint32_t>(i & 0xFFFFu);
    }
    std::shuffle(uniform.codes.begin(), uniform.codes.end(), std::mt19937_64(1));
    const double h_uniform = min_entropy(uniform).min_entropy_bits;

    // modal probability 2^-13.45, remaining mass flat below it
    CodeHistogram h(16);
    const auto top = static_cast<std::uint64_t>(std::llround(static_cast<double>(n) * std::pow(2.0, -13.45)));
    for (std::uint64_t i = 0; i < top; ++i) {
        h.add(0);
    }
    for (std::uint64_t i = 0; i < n - top; ++i) {
        h.add(1 + static_cast<std::uint32_t>(i % 65535));
    }
    const double h_constructed = min_entropy(h).min_entropy_bits;

    const auto cfg = preset_config(Preset::silver);
    const auto total = synthesize_total(cfg.source, cfg.detector, cfg.noise, cfg.n_samples);
    const auto adc = auto_range(total, 16);
    const auto ht = min_entropy(digitize(total, adc));
    const auto hq = quantum_min_entropy(cfg.source, cfg.detector, adc, cfg.n_samples);
    const double se = std::hypot(ht.standard_error(), hq.standard_error());

    const bool ok = within(h_uniform, 16.0, 0.02) && within(h_constructed, 13.45, 0.05) &&
                    hq.min_entropy_bits <= ht.min_entropy_bits + 2.0 * se;
    return {ok, "uniform " + fmt(h_uniform, 6) + " (16 +-0.02); constructed " + fmt(h_constructed, 6) +
                    " (13.45 +-0.05); quantum " + fmt(hq.min_entropy_bits, 6) + " <= total " +
                    fmt(ht.min_entropy_bits, 6) + " + 2*" + fmt(se, 3)};
}

Outcome shot_noise() {
    const double e = 1.602176634e-19;
    const double hand = 2.0 * e * 50.0 * 1e-3 * 5e9;
    const ShotNoiseParams base{1e-3, 50.0, 5e9};
    const auto p = shot_noise_power(base);
    bool linear = true;
    for (int which = 0; which < 3; ++which) {
        for (double f : {2.0, 3.0, 0.5}) {
            ShotNoiseParams q = base;
            (which == 0 ? q.photocurrent_A : which == 1 ? q.load_resistance_ohm : q.bandwidth_hz) *= f;
            linear = linear && std::abs(shot_noise_power(q).watts / p.watts - f) <= 4e-16 * f;
        }
    }
    const bool ok = std::abs(p.watts / 8.011e-11 - 1.0) <= 0.005 && std::abs(p.watts / hand - 1.0) <= 0.005 &&
                    std::abs(p.dBm - (-70.96)) <= 0.01 && linear;
    return {ok, fmt(p.watts, 6) + " W (hand " + fmt(hand, 6) + ", 8.011e-11 +-0.5%), " + fmt(p.dBm, 5) +
                    " dBm, linear " + (linear ? "yes" : "no")};
}

std::size_t brute_force_complexity(std::uint32_t word, std::size_t n) {
    for (std::size_t L = 0; L <= n; ++L) {
        for (std::uint32_t c = 0; c < (1u << L); ++c) {
            bool ok = true;
            for (std::size_t i = L; i < n && ok; ++i) {
                std::uint32_t v = 0;
                for (std::size_t j = 1; j <= L; ++j) {
                    v ^= (c >> (j - 1)) & (word >> (i - j)) & 1u;
                }
                ok = v == ((word >> i) & 1u);
            }
            if (ok) {
                return L;
            }
        }
    }
    return n;
}

Outcome berlekamp_massey_checks() {
    const auto t0 = std::chrono::steady_clock::now();
    int mismatches = 0;
    for (std::uint32_t w = 0; w < (1u << 12); ++w) {
        BitStream b;
        for (std::size_t i = 0; i < 12; ++i) {
            b.push_back((w >> i) & 1u);
        }
        mismatches += berlekamp_massey(b).linear_complexity != brute_force_complexity(w, 12);
    }
    const double elapsed = seconds_since(t0);

    int in_range = 0;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto L = berlekamp_massey(coin(1000, seed)).linear_complexity;
        in_range += L >= 498 && L <= 502;
        lo = std::min(lo, L);
        hi = std::max(hi, L);
    }
    const bool ok = mismatches == 0 && elapsed < 60.0 && in_range == 100;
    return {ok, "exhaustive mismatches " + std::to_string(mismatches) + "/4096 in " + fmt(elapsed, 3) +
                    "s; L in [498,502] for " + std::to_string(in_range) + "/100 seeds, observed [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]"};
}

Outcome battery_calibration() {
    const std::size_t n = 1'000'000;
    int fair = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        fair += run_battery(coin(n, 7000 + seed)).all_pass();
    }
    const double p_biased = monobit(coin(n, 1, 0.6));

    int whitened = 0, short_streams = 0;
    for (int seed = 1; seed <= 100; ++seed) {
        auto cfg = preset_config(Preset::silver);
        cfg.set_seed(static_cast<std::uint64_t>(seed));
        cfg.n_samples = 6'500'000;
        const auto r = run_pipeline(cfg);
        if (r.whitened.bits.size() < n) {
            ++short_streams;
            continue;
        }
        TestOptions opt;
        opt.alpha = cfg.alpha;
        whitened += run_battery(r.whitened.bits.prefix(n), opt).all_pass();
    }
    const bool ok = fair >= 98 && p_biased < 1e-6 && whitened >= 98;
    return {ok, "fair coin " + std::to_string(fair) + "/100; 60% ones monobit p=" + fmt(p_biased, 3) +
                    "; whitened silver " + std::to_string(whitened) + "/100" +
                    (short_streams ? " (" + std::to_string(short_streams) + " streams short of 1e6 bits)" : "")};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SQRNG_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "sqrng_acceptance_determinism";
    fs::remove_all(root);
    const int rc_a = run_cli("pipeline --preset silver --out " + (root / "a").string());
    const int rc_b = run_cli("pipeline --preset silver --out " + (root / "b").string());
    if ((rc_a != 0 && rc_a != 1) || rc_a != rc_b) {
        return {false, "pipeline exit codes " + std::to_string(rc_a) + ", " + std::to_string(rc_b)};
    }
    const bool bits = io::read_file(root / "a" / "bits.bin") == io::read_file(root / "b" / "bits.bin");
    const bool sidecar = io::read_file(root / "a" / "bits.bin.json") == io::read_file(root / "b" / "bits.bin.json");
    const bool manifest = io::read_file(root / "a" / "manifest.json") == io::read_file(root / "b" / "manifest.json");
    fs::remove_all(root);
    return {bits && sidecar && manifest, std::string("bits.bin ") + (bits ? "identical" : "differs") +
                                             ", bits.bin.json " + (sidecar ? "identical" : "differs") +
                                             ", manifest.json " + (manifest ? "identical" : "differs")};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "fwhm-broadening", fwhm_broadening, std::nullopt},
        {2, "acf-ordering", acf_ordering, std::nullopt},
        {3, "extraction-decorrelation", extraction_decorrelation,
         "an ideal bit stream has first nonpositive lag <= 2 with probability 3/4, so >= 19/20 holds with "
         "probability 0.024"},
        {4, "min-entropy", min_entropy_checks, std::nullopt},
        {5, "shot-noise", shot_noise, std::nullopt},
        {6, "berlekamp-massey", berlekamp_massey_checks,
         "for ideal 1000-bit streams P(498 <= L <= 502) = 0.969, so all 100 seeds hold with probability 0.04"},
        {7, "battery-calibration", battery_calibration,
         "four tests at alpha 0.01 pass jointly with probability about 0.96, so >= 98/100 holds with "
         "probability about 0.23 per stream family"},
        {8, "determinism", determinism, std::nullopt},
    };

    int unexplained = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << " " << c.name << ": " << o.detail << " ["
                  << fmt(seconds_since(t0), 3) << "s]\n";
        if (!o.pass) {
            if (c.statistical_note) {
                std::cout << "      statistical limit: " << *c.statistical_note << "\n";
            } else {
                ++unexplained;
            }
        }
        std::cout.flush();
    }
    std::cout << (unexplained == 0 ? "acceptance: no unexplained failures\n"
                                   : "acceptance: " + std::to_string(unexplained) + " unexplained failure(s)\n");
    return unexplained == 0 ? 0 : 1;
}
