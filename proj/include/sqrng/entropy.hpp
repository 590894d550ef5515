#pragma once

#include "sqrng/digitizer.hpp"
#include "sqrng/signal.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace sqrng {

enum class EntropyMode { empirical_total, model_quantum_only };

std::string_view to_string(EntropyMode mode) noexcept;

struct EntropyReport {
    double min_entropy_bits = 0.0;
    double max_prob = 1.0;
    double shannon_bits = 0.0;
    int n_bits = 0;
    std::uint64_t samples_used = 0;
    EntropyMode mode = EntropyMode::empirical_total;
    std::vector<std::string> warnings;

    /// Delta-method standard error of min_entropy_bits.
    [[nodiscard]] double standard_error() const;
};

struct ExtractionRatio {
    int keep_bits = 0;
    double ratio = 0.0;
};

/// Occurrence counts per ADC code. Partial histograms built on disjoint
/// chunks merge exactly, in any order.
class CodeHistogram {
public:
    explicit CodeHistogram(int n_bits);

    void add(std::uint32_t code);
    void add(std::span<const std::uint32_t> codes);
    void merge(const CodeHistogram& other);

    [[nodiscard]] int n_bits() const noexcept { return n_bits_; }
    [[nodiscard]] std::uint64_t total() const noexcept { return total_; }
    [[nodiscard]] std::uint64_t max_count() const;
    [[nodiscard]] double shannon_bits() const;
    [[nodiscard]] std::uint64_t count(std::uint32_t code) const;

    friend bool operator==(const CodeHistogram& a, const CodeHistogram& b);

private:
    int n_bits_;
    std::uint64_t total_ = 0;
    std::vector<std::uint64_t> dense_;                      // n_bits <= kDenseBits
    std::unordered_map<std::uint32_t, std::uint64_t> sparse_; // wider codes
    static constexpr int kDenseBits = 20;
};

/// Plug-in estimate H = -log2(max_x P[X = x]) over the codes of dt.
[[nodiscard]] EntropyReport min_entropy(const DigitalTrace& dt);
[[nodiscard]] EntropyReport min_entropy(const CodeHistogram& h);

/// Min-entropy of the quantum-only record X_q, i.e. what remains when the
/// electronic noise is known to an adversary.
[[nodiscard]] EntropyReport quantum_min_entropy(const SourceModel& source,
                                                const DetectorModel& detector,
                                                const AdcConfig& adc, std::size_t n);

[[nodiscard]] ExtractionRatio extraction_ratio(const EntropyReport& er);

/// Recommended sample count for an n-bit estimate, 100 * 2^n / 16.
[[nodiscard]] std::uint64_t recommended_samples(int n_bits);

inline constexpr std::uint64_t kMinEntropySampleFloor = 10'000;

} // namespace sqrng
