#include "sqrng/analysis.hpp"

#include "sqrng/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

namespace sqrng {

namespace {

// Outside the data range the density is zero; index -1 and n map there.
double smoothed_at(const std::vector<std::uint64_t>& counts, std::ptrdiff_t i) {
    const auto n = static_cast<std::ptrdiff_t>(counts.size());
    double sum = 0.0;
    for (std::ptrdiff_t j = i - 1; j <= i + 1; ++j) {
        if (j >= 0 && j < n) {
            sum += static_cast<double>(counts[static_cast<std::size_t>(j)]);
        }
    }
    return sum / 3.0;
}

std::optional<double> try_fwhm(const HistogramReport& h) {
    const auto n = static_cast<std::ptrdiff_t>(h.n_bins());
    std::vector<double> s(static_cast<std::size_t>(n + 2));
    for (std::ptrdiff_t i = -1; i <= n; ++i) {
        s[static_cast<std::size_t>(i + 1)] = smoothed_at(h.counts, i);
    }
    const double peak = *std::max_element(s.begin(), s.end());
    if (peak <= 0.0) {
        return std::nullopt;
    }
    const double half = 0.5 * peak;

    // Positions in the padded array; padded index p has centre edge0 + (p - 0.5) w.
    std::size_t left = 0;
    while (s[left] < half) {
        ++left;
    }
    std::size_t right = s.size() - 1;
    while (s[right] < half) {
        --right;
    }
    if (left == 0 || right == s.size() - 1) {
        return std::nullopt;
    }
    const double w = h.bin_width();
    auto centre = [&](std::size_t p) { return h.bin_edges[0] + (static_cast<double>(p) - 0.5) * w; };
    const double x_left = centre(left - 1) + (half - s[left - 1]) / (s[left] - s[left - 1]) * w;
    const double x_right = centre(right) + (s[right] - half) / (s[right] - s[right + 1]) * w;
    return x_right - x_left;
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

} // namespace

void ShotNoiseParams::validate() const {
    auto ok = [](double x) { return std::isfinite(x) && x > 0.0; };
    require(ok(photocurrent_A) && ok(load_resistance_ohm) && ok(bandwidth_hz),
            ErrorKind::invalid_argument, "shot-noise parameters must be strictly positive");
}

HistogramReport histogram(std::span<const double> data, int n_bins) {
    require(n_bins >= 2, ErrorKind::invalid_argument, "histogram needs at least 2 bins");
    require(data.size() >= static_cast<std::size_t>(n_bins), ErrorKind::invalid_argument,
            "histogram needs at least n_bins samples");
    const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    require(hi > lo, ErrorKind::degenerate_data, "histogram of constant data");

    HistogramReport h;
    const auto nb = static_cast<std::size_t>(n_bins);
    const double w = (hi - lo) / static_cast<double>(n_bins);
    h.bin_edges.resize(nb + 1);
    for (std::size_t i = 0; i <= nb; ++i) {
        h.bin_edges[i] = lo + static_cast<double>(i) * w;
    }
    h.bin_edges[nb] = hi;
    h.counts.assign(nb, 0);
    for (double v : data) {
        auto idx = static_cast<std::size_t>((v - lo) / w);
        h.counts[std::min(idx, nb - 1)]++;
    }
    h.total_n = data.size();
    h.mode_bin_prob = static_cast<double>(*std::max_element(h.counts.begin(), h.counts.end())) /
                      static_cast<double>(h.total_n);
    h.fwhm_mV = try_fwhm(h);
    return h;
}

HistogramReport histogram(const SignalTrace& trace, int n_bins) {
    return histogram(std::span<const double>(trace.samples), n_bins);
}

double fwhm(const HistogramReport& h) {
    require(h.n_bins() >= 2 && h.bin_edges.size() == h.n_bins() + 1, ErrorKind::invalid_argument,
            "malformed histogram");
    const auto width = try_fwhm(h);
    require(width.has_value(), ErrorKind::fwhm_undefined,
            "no half-maximum crossing on one side of the peak");
    return *width;
}

AcfReport autocorrelation(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    require(n >= 4 && max_lag < n / 4, ErrorKind::invalid_argument,
            "autocorrelation needs max_lag < length / 4");
    const double m = mean(x);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = x[i] - m;
    }

    AcfReport out;
    out.n_samples = n;
    out.coefficients.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        // four independent accumulators keep the dependency chain short
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        const std::size_t len = n - k;
        const double* p = d.data();
        const double* q = d.data() + k;
        std::size_t i = 0;
        for (; i + 4 <= len; i += 4) {
            a0 += p[i] * q[i];
            a1 += p[i + 1] * q[i + 1];
            a2 += p[i + 2] * q[i + 2];
            a3 += p[i + 3] * q[i + 3];
        }
        for (; i < len; ++i) {
            a0 += p[i] * q[i];
        }
        out.coefficients[k] = (a0 + a1) + (a2 + a3);
    }
    const double c0 = out.coefficients[0];
    require(c0 > 0.0, ErrorKind::degenerate_data, "autocorrelation of zero-variance data");
    for (auto& r : out.coefficients) {
        r /= c0;
    }
    out.coefficients[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        if (out.coefficients[k] <= 0.0) {
            out.first_nonpositive_lag = k;
            break;
        }
    }
    return out;
}

AcfReport autocorrelation(const SignalTrace& trace, std::size_t max_lag) {
    return autocorrelation(std::span<const double>(trace.samples), max_lag);
}

std::size_t first_nonpositive_lag(const AcfReport& acf) {
    for (std::size_t k = 1; k < acf.coefficients.size(); ++k) {
        if (acf.coefficients[k] <= 0.0) {
            return k;
        }
    }
    fail(ErrorKind::no_decorrelation,
         "autocorrelation stays positive up to lag " + std::to_string(acf.max_lag()) + "; raise max_lag");
}

PsdReport psd_welch(const SignalTrace& trace, std::size_t segment_length, double overlap_fraction) {
    trace.validate();
    require(segment_length >= 2 && std::has_single_bit(segment_length), ErrorKind::invalid_argument,
            "PSD segment length must be a power of two");
    require(segment_length <= trace.size(), ErrorKind::invalid_argument,
            "PSD segment longer than the trace");
    require(overlap_fraction >= 0.0 && overlap_fraction < 1.0, ErrorKind::invalid_argument,
            "PSD overlap must be in [0, 1)");

    const std::size_t L = segment_length;
    const auto overlap = static_cast<std::size_t>(std::llround(overlap_fraction * static_cast<double>(L)));
    const std::size_t step = std::max<std::size_t>(1, L - overlap);
    const std::size_t bins = L / 2 + 1;
    const double fs = trace.sample_rate_hz;

    std::vector<double> window(L);
    double window_power = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(L)));
        window_power += window[i] * window[i];
    }

    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * L)));
    std::unique_ptr<fftw_complex, FftwFree> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), in.get(), out.get(), FFTW_ESTIMATE);
    }

    std::vector<double> acc(bins, 0.0);
    std::size_t segments = 0;
    for (std::size_t start = 0; start + L <= trace.size(); start += step) {
        const double m = mean(std::span<const double>(trace.samples).subspan(start, L));
        for (std::size_t i = 0; i < L; ++i) {
            in.get()[i] = (trace.samples[start + i] - m) * window[i];
        }
        fftw_execute(plan);
        for (std::size_t k = 0; k < bins; ++k) {
            const double re = out.get()[k][0];
            const double im = out.get()[k][1];
            acc[k] += re * re + im * im;
        }
        ++segments;
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    PsdReport report;
    report.segment_length = L;
    report.overlap_fraction = overlap_fraction;
    report.segments = segments;
    report.frequencies_hz.resize(bins);
    report.density_mV2_per_Hz.resize(bins);
    report.power_dBm_per_Hz.resize(bins);
    const double scale = 1.0 / (fs * window_power * static_cast<double>(segments));
    for (std::size_t k = 0; k < bins; ++k) {
        const bool edge = (k == 0) || (k == L / 2);
        const double density = acc[k] * scale * (edge ? 1.0 : 2.0);
        report.frequencies_hz[k] = static_cast<double>(k) * fs / static_cast<double>(L);
        report.density_mV2_per_Hz[k] = density;
        const double watts_per_hz = density * 1e-6 / kReferenceLoadOhm;
        report.power_dBm_per_Hz[k] = watts_to_dBm(std::max(watts_per_hz, 1e-30));
    }
    return report;
}

double integrated_power_mV2(const PsdReport& psd) {
    require(psd.frequencies_hz.size() >= 2, ErrorKind::invalid_argument, "PSD has too few bins");
    const double df = psd.frequencies_hz[1] - psd.frequencies_hz[0];
    double total = 0.0;
    for (double d : psd.density_mV2_per_Hz) {
        total += d * df;
    }
    return total;
}

double watts_to_dBm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

ShotNoisePower shot_noise_power(const ShotNoiseParams& p) {
    p.validate();
    ShotNoisePower out;
    out.watts = 2.0 * kElectronCharge * p.load_resistance_ohm * p.photocurrent_A * p.bandwidth_hz;
    out.dBm = watts_to_dBm(out.watts);
    return out;
}

double shot_noise_density_dBm_per_Hz(const ShotNoiseParams& p) {
    p.validate();
    return watts_to_dBm(2.0 * kElectronCharge * p.load_resistance_ohm * p.photocurrent_A);
}

double shot_noise_load_current_product(double dBm, double bandwidth_hz) {
    require(bandwidth_hz > 0.0, ErrorKind::invalid_argument, "bandwidth must be > 0");
    const double watts = 1e-3 * std::pow(10.0, dBm / 10.0);
    return watts / (2.0 * kElectronCharge * bandwidth_hz);
}

double fano_factor(std::span<const std::uint32_t> counts) {
    require(counts.size() >= 2, ErrorKind::invalid_argument, "Fano factor needs >= 2 counts");
    long double sum = 0.0L;
    for (auto c : counts) {
        sum += c;
    }
    const long double m = sum / static_cast<long double>(counts.size());
    require(m > 0.0L, ErrorKind::invalid_argument, "Fano factor of zero-mean counts");
    long double ss = 0.0L;
    for (auto c : counts) {
        const long double d = static_cast<long double>(c) - m;
        ss += d * d;
    }
    const long double var = ss / static_cast<long double>(counts.size() - 1);
    return static_cast<double>(var / m);
}

} // namespace sqrng
