#include "sqrng/analysis.hpp"
#include "sqrng/error.hpp"
#include "sqrng/pipeline.hpp"
#include "sqrng/signal.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sqrng;

namespace {

SourceModel coherent(double lambda, std::uint64_t seed = 7) {
    SourceModel s;
    s.kind = SourceKind::coherent;
    s.mean_rate = lambda;
    s.seed = seed;
    return s;
}

SourceModel scattered(double lambda, double modes, std::uint64_t seed = 7) {
    SourceModel s = coherent(lambda, seed);
    s.kind = SourceKind::scattered;
    s.mode_count = modes;
    return s;
}

// Sample variance / sample mean, written out independently of fano_factor.
double fano_oracle(const std::vector<std::uint32_t>& c) {
    double m = 0.0;
    for (auto v : c) {
        m += v;
    }
    m /= static_cast<double>(c.size());
    double s = 0.0;
    for (auto v : c) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(c.size() - 1) / m;
}

DetectorModel dc_detector(double bandwidth_hz, double rate_hz = 40e9) {
    DetectorModel d;
    d.bandwidth_hz = bandwidth_hz;
    d.sample_rate_hz = rate_hz;
    d.gain_mV_per_photon = 1.0;
    return d;
}

} // namespace

TEST(PhotonCounts, CoherentFanoIsOne) {
    const auto c = gen_photon_counts(coherent(100.0), 1'000'000);
    EXPECT_NEAR(fano_oracle(c), 1.0, 0.01);
    EXPECT_NEAR(fano_factor(c), fano_oracle(c), 1e-12);
}

TEST(PhotonCounts, ScatteredLargeModeCountIsCoherentLimit) {
    const auto c = gen_photon_counts(scattered(100.0, 1e9), 1'000'000);
    EXPECT_NEAR(fano_oracle(c), 1.0, 0.01);
}

TEST(PhotonCounts, ScatteredFanoFollowsMandel) {
    // 1 + lambda / M
    EXPECT_NEAR(fano_oracle(gen_photon_counts(scattered(100.0, 10.0), 1'000'000)), 11.0, 0.3);
    EXPECT_NEAR(fano_factor(gen_photon_counts(scattered(50.0, 5.0), 1'000'000)), 11.0, 0.3);
}

TEST(PhotonCounts, FanoWithinThreeStandardErrors) {
    // var(Fano) ~ 2 F^2 / n for large lambda (Gaussian approximation)
    const std::size_t n = 200'000;
    for (double m : {20.0, 200.0}) {
        const double lambda = 40.0;
        const double expected = 1.0 + lambda / m;
        const double se = expected * std::sqrt(2.0 / static_cast<double>(n)) * 1.5;
        EXPECT_NEAR(fano_factor(gen_photon_counts(scattered(lambda, m, 3), n)), expected, 3.0 * se) << m;
    }
}

TEST(PhotonCounts, Deterministic) {
    const auto a = gen_photon_counts(scattered(30.0, 4.0, 11), 5000);
    const auto b = gen_photon_counts(scattered(30.0, 4.0, 11), 5000);
    const auto c = gen_photon_counts(scattered(30.0, 4.0, 12), 5000);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(PhotonCounts, RejectsInvalidModels) {
    EXPECT_THROW((void)gen_photon_counts(coherent(0.0), 10), Error);
    EXPECT_THROW((void)gen_photon_counts(coherent(-1.0), 10), Error);
    EXPECT_THROW((void)gen_photon_counts(scattered(10.0, 0.0), 10), Error);
    EXPECT_THROW((void)gen_photon_counts(coherent(1.0), 0), Error);
}

TEST(CountsToVoltage, ConstantInputSettlesAtGainTimesCount) {
    DetectorModel d = dc_detector(5e9);
    d.gain_mV_per_photon = 0.01;
    const std::vector<std::uint32_t> counts(2000, 37);
    const auto t = counts_to_voltage(counts, d);
    EXPECT_NEAR(t.samples.back(), 0.37, 1e-12);
}

TEST(CountsToVoltage, ImpulseGivesGeometricDecay) {
    DetectorModel d = dc_detector(5e9);
    d.gain_mV_per_photon = 0.5;
    std::vector<std::uint32_t> counts(20, 0);
    counts[0] = 1;
    const auto t = counts_to_voltage(counts, d);
    const double a = std::exp(-2.0 * M_PI * 5e9 / 40e9);
    // hand-unrolled y_k = a y_{k-1} + (1 - a) x_k from rest
    double y = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        y = a * y + (1.0 - a) * 0.5 * counts[k];
        EXPECT_NEAR(t.samples[k], y, 1e-15);
        EXPECT_NEAR(t.samples[k], 0.5 * (1.0 - a) * std::pow(a, static_cast<double>(k)), 1e-15);
    }
}

TEST(CountsToVoltage, LowpassReducesWhiteVariance) {
    const auto counts = gen_photon_counts(coherent(50.0), 200'000);
    std::vector<double> in(counts.begin(), counts.end());
    const auto t = counts_to_voltage(counts, dc_detector(40e9 / 8.0));
    EXPECT_LT(variance(t.samples), variance(in));
}

TEST(CountsToVoltage, AcCouplingRemovesDc) {
    DetectorModel d = dc_detector(5e9);
    d.ac_coupling_hz = 100e6;
    const std::vector<std::uint32_t> counts(20000, 10);
    const auto t = counts_to_voltage(counts, d);
    EXPECT_NEAR(t.samples.back(), 0.0, 1e-6);
}

TEST(DetectorModel, RejectsInvalidParameters) {
    DetectorModel d;
    d.bandwidth_hz = 30e9; // above Nyquist at 40 GS/s
    EXPECT_THROW(d.validate(), Error);
    d = DetectorModel{};
    d.gain_mV_per_photon = 0.0;
    EXPECT_THROW(d.validate(), Error);
    d = DetectorModel{};
    d.ac_coupling_hz = d.bandwidth_hz;
    EXPECT_THROW(d.validate(), Error);
}

TEST(ElectronicNoise, ZeroSigmaIsIdentity) {
    SignalTrace t{{1.0, 2.0, 3.5}, 1e9, "x"};
    NoiseModel n;
    EXPECT_EQ(add_electronic_noise(t, n).samples, t.samples);
}

TEST(ElectronicNoise, IndependentVariancesAdd) {
    // input variance 1 mV^2 from a +/-1 square wave, noise sigma 2 mV
    SignalTrace t;
    t.sample_rate_hz = 1e9;
    t.samples.resize(1'000'000);
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
        t.samples[i] = (i & 1) ? 1.0 : -1.0;
    }
    NoiseModel n{2.0, 5};
    EXPECT_NEAR(variance(add_electronic_noise(t, n).samples), 5.0, 0.05);
}

TEST(ElectronicNoise, Deterministic) {
    SignalTrace t{std::vector<double>(1000, 0.0), 1e9, "x"};
    NoiseModel n{1.0, 9};
    EXPECT_EQ(add_electronic_noise(t, n).samples, add_electronic_noise(t, n).samples);
    NoiseModel m{1.0, 10};
    EXPECT_NE(add_electronic_noise(t, n).samples, add_electronic_noise(t, m).samples);
}

TEST(ElectronicNoise, RejectsNegativeSigma) {
    SignalTrace t{{0.0}, 1e9, "x"};
    EXPECT_THROW((void)add_electronic_noise(t, NoiseModel{-1.0, 0}), Error);
}

TEST(VarianceDecomposition, NoiselessHasZeroElectronicPart) {
    const auto cfg = preset_config(Preset::coherent);
    const auto q = synthesize_quantum(cfg.source, cfg.detector, 100'000);
    const auto d = variance_decomposition(q, add_electronic_noise(q, NoiseModel{0.0, 1}));
    EXPECT_NEAR(d.electronic_var, 0.0, 1e-15);
    EXPECT_FALSE(d.inconsistent);
}

TEST(VarianceDecomposition, UnitPlusUnit) {
    SignalTrace q;
    q.sample_rate_hz = 1e9;
    q.samples = add_electronic_noise(SignalTrace{std::vector<double>(1'000'000, 0.0), 1e9, ""},
                                     NoiseModel{1.0, 21})
                    .samples;
    const auto noisy = add_electronic_noise(q, NoiseModel{1.0, 22});
    const auto d = variance_decomposition(q, noisy);
    EXPECT_NEAR(d.quantum_var, 1.0, 0.01);
    EXPECT_NEAR(d.total_var, 2.0, 0.02);
    EXPECT_NEAR(d.total_var, d.quantum_var + d.electronic_var, 1e-9 * d.total_var);
    EXPECT_FALSE(d.inconsistent);
}

TEST(VarianceDecomposition, FlagsNegativeElectronicVariance) {
    const auto cfg = preset_config(Preset::coherent);
    const auto q = synthesize_quantum(cfg.source, cfg.detector, 10'000);
    SignalTrace half = q;
    for (auto& v : half.samples) {
        v *= 0.5;
    }
    EXPECT_TRUE(variance_decomposition(q, half).inconsistent);
}

TEST(Synthesis, ScatteredAndCoherentShareMean) {
    const auto cfg = preset_config(Preset::aluminum);
    const std::size_t n = 1'000'000;
    const auto s = synthesize_total(cfg.source, cfg.detector, cfg.noise, n);
    const auto c = synthesize_total(coherent_reference(cfg.source), cfg.detector, cfg.noise, n);
    // generous SE: correlated samples, effective count ~ n / 100
    const double se = std::sqrt(variance(s.samples) / (static_cast<double>(n) / 100.0));
    EXPECT_NEAR(mean(s.samples), mean(c.samples), 3.0 * se);
}

TEST(Synthesis, FwhmDecreasesWithModeCount) {
    const auto cfg = preset_config(Preset::silver);
    double prev = 1e300;
    for (double m : {500.0, 5000.0, 50000.0}) {
        SourceModel s = cfg.source;
        s.mode_count = m;
        const double w = fwhm(histogram(synthesize_total(s, cfg.detector, cfg.noise, 400'000), 256));
        EXPECT_LT(w, prev) << m;
        prev = w;
    }
}

TEST(Synthesis, Deterministic) {
    const auto cfg = preset_config(Preset::silver);
    const auto a = synthesize_total(cfg.source, cfg.detector, cfg.noise, 10'000);
    const auto b = synthesize_total(cfg.source, cfg.detector, cfg.noise, 10'000);
    EXPECT_EQ(a.samples, b.samples);
}

TEST(Calibration, SilverRoundTrip) {
    const auto cfg = preset_config(Preset::silver);
    const auto res = calibrate_mode_count(1.675, cfg.source, cfg.detector, cfg.noise);
    SourceModel s = cfg.source;
    s.mode_count = res.mode_count;
    s.seed = 99; // re-measure on an independent realisation
    const double w = fwhm(histogram(synthesize_total(s, cfg.detector, cfg.noise, 500'000), 256));
    const double w0 =
        fwhm(histogram(synthesize_total(coherent_reference(s), cfg.detector, cfg.noise, 500'000), 256));
    EXPECT_GE(w / w0, 1.64);
    EXPECT_LE(w / w0, 1.71);

    const auto al = calibrate_mode_count(4.175, cfg.source, cfg.detector, cfg.noise);
    EXPECT_LT(al.mode_count, res.mode_count);
}

TEST(Calibration, RatioNearOneGivesLargeModeCount) {
    const auto cfg = preset_config(Preset::silver);
    CalibrationSettings st;
    st.n_samples = 100'000;
    const auto res = calibrate_mode_count(1.001, cfg.source, cfg.detector, cfg.noise, st);
    EXPECT_GT(res.mode_count, 1e5);
}

TEST(Calibration, InfeasibleTargetIsReported) {
    const auto cfg = preset_config(Preset::silver);
    CalibrationSettings st;
    st.n_samples = 50'000;
    st.min_mode_count = 1e4; // caps the achievable broadening
    try {
        (void)calibrate_mode_count(50.0, cfg.source, cfg.detector, cfg.noise, st);
        FAIL() << "expected calibration_infeasible";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::calibration_infeasible);
    }
    EXPECT_THROW((void)calibrate_mode_count(0.9, cfg.source, cfg.detector, cfg.noise, st), Error);
}
