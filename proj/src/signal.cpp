#include "sqrng/signal.hpp"

#include "rng.hpp"
#include "sqrng/analysis.hpp"
#include "sqrng/error.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace sqrng {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

class SinglePole {
public:
    SinglePole(double coefficient, double settled) : a_(coefficient), state_(settled) {}

    double step(double x) {
        state_ = a_ * state_ + (1.0 - a_) * x;
        return state_;
    }

private:
    double a_;
    double state_;
};

struct PhotonDraws {
    std::vector<std::uint32_t> counts;
    std::vector<double> modulation; // speckle factor g, empty for coherent light
};

PhotonDraws draw_photons(const SourceModel& model, std::size_t n) {
    require(n >= 1, ErrorKind::invalid_argument, "photon count request must be >= 1");
    model.validate();

    auto engine = detail::make_engine(model.seed, detail::Stream::photons);
    PhotonDraws out;
    out.counts.resize(n);
    if (model.kind == SourceKind::coherent) {
        std::poisson_distribution<std::uint32_t> poisson(model.mean_rate);
        for (auto& c : out.counts) {
            c = poisson(engine);
        }
        return out;
    }

    out.modulation.resize(n);
    std::gamma_distribution<double> speckle(model.mode_count, 1.0 / model.mode_count);
    std::poisson_distribution<std::uint32_t> poisson;
    using Param = std::poisson_distribution<std::uint32_t>::param_type;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = speckle(engine);
        out.modulation[i] = g;
        out.counts[i] = poisson(engine, Param(model.mean_rate * g));
    }
    return out;
}

} // namespace

void SourceModel::validate() const {
    require(positive(mean_rate) && mean_rate <= 1e9, ErrorKind::invalid_argument,
            "source mean_rate must be in (0, 1e9]");
    if (kind == SourceKind::scattered) {
        require(positive(mode_count), ErrorKind::invalid_argument,
                "scattered source needs mode_count > 0");
    }
    require(std::isfinite(speckle_bandwidth_hz) && speckle_bandwidth_hz >= 0.0,
            ErrorKind::invalid_argument, "speckle_bandwidth_hz must be >= 0");
}

void DetectorModel::validate() const {
    require(positive(bandwidth_hz) && positive(sample_rate_hz) && positive(gain_mV_per_photon) &&
                positive(responsivity_A_per_W) && positive(load_resistance_ohm),
            ErrorKind::invalid_config, "detector parameters must be strictly positive");
    require(bandwidth_hz < sample_rate_hz / 2.0, ErrorKind::invalid_config,
            "detector bandwidth must be below half the sample rate");
    require(std::isfinite(ac_coupling_hz) && ac_coupling_hz >= 0.0 && ac_coupling_hz < bandwidth_hz,
            ErrorKind::invalid_config, "ac_coupling_hz must be in [0, bandwidth_hz)");
}

double DetectorModel::lowpass_coefficient() const {
    return pole_coefficient(bandwidth_hz, sample_rate_hz);
}

void NoiseModel::validate() const {
    require(std::isfinite(electronic_sigma_mV) && electronic_sigma_mV >= 0.0,
            ErrorKind::invalid_argument, "electronic_sigma_mV must be >= 0");
}

void SignalTrace::validate() const {
    require(!samples.empty(), ErrorKind::invalid_argument, "signal trace is empty");
    require(positive(sample_rate_hz), ErrorKind::invalid_argument,
            "signal trace sample rate must be > 0");
    for (double v : samples) {
        require(std::isfinite(v), ErrorKind::invalid_argument, "signal trace has non-finite sample");
    }
}

double pole_coefficient(double corner_hz, double sample_rate_hz) {
    if (corner_hz <= 0.0) {
        return 0.0;
    }
    return std::exp(-2.0 * std::numbers::pi * corner_hz / sample_rate_hz);
}

std::vector<std::uint32_t> gen_photon_counts(const SourceModel& model, std::size_t n) {
    return draw_photons(model, n).counts;
}

SignalTrace counts_to_voltage(std::span<const std::uint32_t> counts, const DetectorModel& detector) {
    require(!counts.empty(), ErrorKind::invalid_argument, "counts must be non-empty");
    detector.validate();

    SinglePole lowpass(detector.lowpass_coefficient(), 0.0);
    const bool ac = detector.ac_coupling_hz > 0.0;
    SinglePole baseline(pole_coefficient(detector.ac_coupling_hz, detector.sample_rate_hz), 0.0);

    SignalTrace out;
    out.sample_rate_hz = detector.sample_rate_hz;
    out.label = "detector output";
    out.samples.reserve(counts.size());
    for (auto c : counts) {
        double y = lowpass.step(detector.gain_mV_per_photon * static_cast<double>(c));
        if (ac) {
            y -= baseline.step(y);
        }
        out.samples.push_back(y);
    }
    return out;
}

SignalTrace add_electronic_noise(const SignalTrace& trace, const NoiseModel& noise) {
    noise.validate();
    SignalTrace out = trace;
    if (noise.electronic_sigma_mV == 0.0) {
        return out;
    }
    auto engine = detail::make_engine(noise.seed, detail::Stream::electronic);
    std::normal_distribution<double> gauss(0.0, noise.electronic_sigma_mV);
    for (auto& v : out.samples) {
        v += gauss(engine);
    }
    out.label += " + electronic noise";
    return out;
}

SignalTrace synthesize_quantum(const SourceModel& source, const DetectorModel& detector,
                               std::size_t n) {
    detector.validate();
    const PhotonDraws draws = draw_photons(source, n);
    const double lambda = source.mean_rate;
    const bool scattered = source.kind == SourceKind::scattered;

    // Shot noise follows the detector low-pass. The speckle modulation
    // lambda * (g - 1) has its own, faster response. Both then share the AC
    // coupling, whose DC level is restored at lambda.
    SinglePole shot_path(detector.lowpass_coefficient(), lambda);
    SinglePole speckle_path(pole_coefficient(source.speckle_bandwidth_hz, detector.sample_rate_hz),
                            0.0);
    const bool ac = detector.ac_coupling_hz > 0.0;
    SinglePole baseline(pole_coefficient(detector.ac_coupling_hz, detector.sample_rate_hz), lambda);

    SignalTrace out;
    out.sample_rate_hz = detector.sample_rate_hz;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double excess = scattered ? lambda * (draws.modulation[i] - 1.0) : 0.0;
        const double shot = static_cast<double>(draws.counts[i]) - excess;
        double y = shot_path.step(shot);
        if (scattered) {
            y += speckle_path.step(excess);
        }
        if (ac) {
            y = y - baseline.step(y) + lambda;
        }
        out.samples[i] = detector.gain_mV_per_photon * y;
    }

    std::ostringstream label;
    label << (scattered ? "scattered" : "coherent") << " lambda=" << lambda;
    if (scattered) {
        label << " M=" << source.mode_count;
    }
    label << " seed=" << source.seed;
    out.label = label.str();
    return out;
}

SignalTrace synthesize_total(const SourceModel& source, const DetectorModel& detector,
                             const NoiseModel& noise, std::size_t n) {
    return add_electronic_noise(synthesize_quantum(source, detector, n), noise);
}

VarianceDecomposition variance_decomposition(const SignalTrace& quantum_trace,
                                             const SignalTrace& noisy_trace) {
    require(quantum_trace.size() == noisy_trace.size() && quantum_trace.size() >= 2,
            ErrorKind::invalid_argument, "variance decomposition needs equal-length traces");
    require(quantum_trace.sample_rate_hz == noisy_trace.sample_rate_hz, ErrorKind::invalid_argument,
            "variance decomposition needs traces at the same rate");

    VarianceDecomposition d;
    d.quantum_var = variance(quantum_trace.samples);
    d.total_var = variance(noisy_trace.samples);
    d.electronic_var = d.total_var - d.quantum_var;
    // Gaussian standard error of a variance estimate, sigma^2 sqrt(2 / N).
    const double se = std::max(d.total_var, d.quantum_var) *
                      std::sqrt(2.0 / static_cast<double>(noisy_trace.size()));
    d.inconsistent = d.electronic_var < -3.0 * se;
    return d;
}

CalibrationResult calibrate_mode_count(double target_fwhm_ratio, const SourceModel& base,
                                       const DetectorModel& detector, const NoiseModel& noise,
                                       const CalibrationSettings& settings) {
    require(std::isfinite(target_fwhm_ratio) && target_fwhm_ratio > 1.0,
            ErrorKind::invalid_argument, "target FWHM ratio must be > 1");
    require(settings.min_mode_count > 0.0 && settings.min_mode_count < settings.max_mode_count,
            ErrorKind::invalid_argument, "calibration mode-count bracket is empty");

    auto measure = [&](const SourceModel& s) {
        const auto trace = synthesize_total(s, detector, noise, settings.n_samples);
        return fwhm(histogram(trace, settings.n_bins));
    };

    SourceModel coherent = base;
    coherent.kind = SourceKind::coherent;
    CalibrationResult result;
    result.coherent_fwhm_mV = measure(coherent);

    auto ratio_at = [&](double m) {
        SourceModel s = base;
        s.kind = SourceKind::scattered;
        s.mode_count = m;
        return measure(s) / result.coherent_fwhm_mV;
    };

    const double max_ratio = ratio_at(settings.min_mode_count);
    if (max_ratio < target_fwhm_ratio) {
        std::ostringstream msg;
        msg << "FWHM ratio " << target_fwhm_ratio << " unreachable; max achievable ratio is "
            << max_ratio << " at M = " << settings.min_mode_count;
        fail(ErrorKind::calibration_infeasible, msg.str());
    }
    const double min_ratio = ratio_at(settings.max_mode_count);
    if (min_ratio >= target_fwhm_ratio) {
        result.mode_count = settings.max_mode_count;
        result.achieved_ratio = min_ratio;
        return result;
    }

    // ratio(lo) >= target > ratio(hi)
    double lo = std::log(settings.min_mode_count);
    double hi = std::log(settings.max_mode_count);
    double best_err = std::abs(max_ratio - target_fwhm_ratio);
    result.mode_count = settings.min_mode_count;
    result.achieved_ratio = max_ratio;
    for (int it = 0; it < settings.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double m = std::exp(mid);
        const double r = ratio_at(m);
        result.iterations = it + 1;
        if (std::abs(r - target_fwhm_ratio) < best_err) {
            best_err = std::abs(r - target_fwhm_ratio);
            result.mode_count = m;
            result.achieved_ratio = r;
        }
        if (best_err <= settings.tolerance * target_fwhm_ratio) {
            break;
        }
        (r >= target_fwhm_ratio ? lo : hi) = mid;
    }
    return result;
}

double mean(std::span<const double> x) {
    require(!x.empty(), ErrorKind::invalid_argument, "mean of empty sequence");
    long double sum = 0.0L;
    for (double v : x) {
        sum += v;
    }
    return static_cast<double>(sum / static_cast<long double>(x.size()));
}

double variance(std::span<const double> x) {
    const double m = mean(x);
    long double sum = 0.0L;
    for (double v : x) {
        const long double d = v - m;
        sum += d * d;
    }
    return static_cast<double>(sum / static_cast<long double>(x.size()));
}

} // namespace sqrng
