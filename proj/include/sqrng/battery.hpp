#pragma once

#include "sqrng/analysis.hpp"
#include "sqrng/bitstream.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sqrng {

/// Minimum stream length in normal operation. Testing mode drops the floor
/// so short worked examples can be evaluated.
inline constexpr std::size_t kMinTestBits = 100;

struct TestOptions {
    double alpha = 0.01;
    bool testing_mode = false;
    std::size_t block_len = 0; // block-frequency block length; 0 picks a default
    std::size_t acf_max_lag = 16;
};

struct TestRecord {
    std::string name;
    double statistic = 0.0;
    double p_value = 0.0;
    bool applicable = true; // false when a precondition gate failed; p is 0 and the record is excluded from all_pass
    bool pass = false;
};

struct TestReport {
    std::vector<TestRecord> records;
    double alpha = 0.01;
    std::size_t bit_length = 0;
    /// Bit-level autocorrelation (bits mapped to +/-1), diagnostic only.
    std::optional<std::size_t> acf_first_nonpositive_lag;
    double acf_lag1 = 0.0;

    /// True when every applicable test passes.
    [[nodiscard]] bool all_pass() const;
};

struct RunsResult {
    double p_value = 0.0;
    double statistic = 0.0; // total runs V
    bool applicable = true;
};

/// erfc(|#ones - #zeros| / sqrt(2 n)).
[[nodiscard]] double monobit(const BitStream& bits, bool testing_mode = false);

/// Total-runs test, gated on |pi - 1/2| < 2 / sqrt(n).
[[nodiscard]] RunsResult runs_test(const BitStream& bits, bool testing_mode = false);

/// Chi-square over per-block ones fractions.
[[nodiscard]] double block_frequency(const BitStream& bits, std::size_t block_len,
                                     bool testing_mode = false);
[[nodiscard]] std::size_t default_block_len(std::size_t n);

/// Overlapping 2-bit serial test, first statistic (del psi^2).
[[nodiscard]] double serial2(const BitStream& bits, bool testing_mode = false);

/// Bits mapped to +/-1, then the biased normalized autocorrelation.
[[nodiscard]] AcfReport bit_acf(const BitStream& bits, std::size_t max_lag);

[[nodiscard]] TestReport run_battery(const BitStream& bits, const TestOptions& options = {});

} // namespace sqrng
