#include "sqrng/battery.hpp"

#include "sqrng/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <array>
#include <cmath>

namespace sqrng {

namespace {

void check_length(const BitStream& bits, std::size_t floor, bool testing_mode, const char* test) {
    const std::size_t need = testing_mode ? 2 : floor;
    require(bits.size() >= need, ErrorKind::insufficient_data,
            std::string(test) + " needs at least " + std::to_string(need) + " bits");
}

double igamc(double a, double x) {
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(a, x);
}

struct Outcome {
    double statistic;
    double p_value;
};

Outcome block_frequency_outcome(const BitStream& bits, std::size_t block_len, bool testing_mode) {
    check_length(bits, kMinTestBits, testing_mode, "block frequency");
    require(block_len >= 1 && block_len <= bits.size(), ErrorKind::insufficient_data,
            "block frequency needs at least one full block");
    const std::size_t blocks = bits.size() / block_len;
    double chi2 = 0.0;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        std::size_t ones = 0;
        for (std::size_t i = 0; i < block_len; ++i) {
            ones += bits[pos++];
        }
        const double dev = static_cast<double>(ones) / static_cast<double>(block_len) - 0.5;
        chi2 += dev * dev;
    }
    chi2 *= 4.0 * static_cast<double>(block_len);
    return {chi2, igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0)};
}

Outcome serial2_outcome(const BitStream& bits, bool testing_mode) {
    check_length(bits, kMinTestBits, testing_mode, "serial test");
    const std::size_t len = bits.size();
    const auto n = static_cast<double>(len);

    // overlapping patterns with cyclic wrap-around
    std::array<double, 4> pairs{};
    std::array<double, 2> singles{};
    for (std::size_t i = 0; i < len; ++i) {
        const int a = bits[i];
        const int b = bits[(i + 1) % len];
        pairs[static_cast<std::size_t>(2 * a + b)] += 1.0;
        singles[static_cast<std::size_t>(a)] += 1.0;
    }
    auto psi2 = [n](const auto& counts) {
        double sum = 0.0;
        for (double c : counts) {
            sum += c * c;
        }
        return static_cast<double>(counts.size()) / n * sum - n;
    };
    const double del = psi2(pairs) - psi2(singles);
    return {del, igamc(1.0, del / 2.0)};
}

} // namespace

bool TestReport::all_pass() const {
    for (const auto& r : records) {
        if (r.applicable && !r.pass) {
            return false;
        }
    }
    return true;
}

double monobit(const BitStream& bits, bool testing_mode) {
    check_length(bits, kMinTestBits, testing_mode, "monobit");
    const auto n = static_cast<double>(bits.size());
    const auto ones = static_cast<double>(bits.count_ones());
    const double s_obs = std::abs(2.0 * ones - n) / std::sqrt(n);
    return std::erfc(s_obs / std::sqrt(2.0));
}

RunsResult runs_test(const BitStream& bits, bool testing_mode) {
    check_length(bits, kMinTestBits, testing_mode, "runs test");
    const std::size_t len = bits.size();
    const auto n = static_cast<double>(len);
    const double pi = static_cast<double>(bits.count_ones()) / n;

    RunsResult r;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) {
        r.applicable = false;
        r.p_value = 0.0;
        return r;
    }
    std::size_t runs = 1;
    for (std::size_t i = 1; i < len; ++i) {
        runs += bits[i] != bits[i - 1];
    }
    r.statistic = static_cast<double>(runs);
    const double expected = 2.0 * n * pi * (1.0 - pi);
    r.p_value = std::erfc(std::abs(r.statistic - expected) /
                          (2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi)));
    return r;
}

std::size_t default_block_len(std::size_t n) {
    // block length >= 20, > n / 100, and fewer than 100 blocks; short
    // testing-mode streams fall back to a single block
    return std::min(n, std::max<std::size_t>(20, n / 99 + 1));
}

double block_frequency(const BitStream& bits, std::size_t block_len, bool testing_mode) {
    return block_frequency_outcome(bits, block_len, testing_mode).p_value;
}

double serial2(const BitStream& bits, bool testing_mode) {
    return serial2_outcome(bits, testing_mode).p_value;
}

AcfReport bit_acf(const BitStream& bits, std::size_t max_lag) {
    std::vector<double> x(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        x[i] = bits[i] ? 1.0 : -1.0;
    }
    return autocorrelation(x, max_lag);
}

TestReport run_battery(const BitStream& bits, const TestOptions& options) {
    require(options.alpha > 0.0 && options.alpha < 1.0, ErrorKind::invalid_argument,
            "alpha must be in (0, 1)");
    TestReport report;
    report.alpha = options.alpha;
    report.bit_length = bits.size();

    auto add = [&](std::string name, double statistic, double p, bool applicable) {
        report.records.push_back(
            TestRecord{std::move(name), statistic, p, applicable, applicable && p >= options.alpha});
    };

    const auto n = static_cast<double>(bits.size());
    const double p_mono = monobit(bits, options.testing_mode);
    add("monobit", std::abs(2.0 * static_cast<double>(bits.count_ones()) - n) / std::sqrt(n), p_mono,
        true);

    const auto runs = runs_test(bits, options.testing_mode);
    add("runs", runs.statistic, runs.p_value, runs.applicable);

    const std::size_t block = options.block_len ? options.block_len : default_block_len(bits.size());
    const auto bf = block_frequency_outcome(bits, block, options.testing_mode);
    add("block_frequency", bf.statistic, bf.p_value, true);

    const auto serial = serial2_outcome(bits, options.testing_mode);
    add("serial2", serial.statistic, serial.p_value, true);

    const std::size_t ones = bits.count_ones();
    const bool constant = ones == 0 || ones == bits.size();
    if (!constant && bits.size() > 4 * options.acf_max_lag) {
        const auto acf = bit_acf(bits, options.acf_max_lag);
        report.acf_first_nonpositive_lag = acf.first_nonpositive_lag;
        report.acf_lag1 = acf.coefficients.size() > 1 ? acf.coefficients[1] : 0.0;
    }
    return report;
}

} // namespace sqrng
