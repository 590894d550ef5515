#pragma once

#include "sqrng/bitstream.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sqrng {

/// Up to 128 register bits. Bit p - 1 of the value holds register position p;
/// position 1 is the most recently shifted-in bit.
struct LfsrState {
    std::array<std::uint64_t, 2> words{0, 0};

    [[nodiscard]] bool bit(int position) const noexcept {
        const int i = position - 1;
        return (words[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1u;
    }
    void set_bit(int position, bool value) noexcept {
        const int i = position - 1;
        auto& w = words[static_cast<std::size_t>(i >> 6)];
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        w = value ? (w | mask) : (w & ~mask);
    }
    [[nodiscard]] bool is_zero() const noexcept { return words[0] == 0 && words[1] == 0; }

    static LfsrState all_ones(int degree);
    static LfsrState from_u64(std::uint64_t value) { return LfsrState{{value, 0}}; }

    friend bool operator==(const LfsrState&, const LfsrState&) = default;
};

struct LfsrConfig {
    int degree = 64;
    std::vector<int> taps{64, 63, 61, 60};
    LfsrState initial_state = LfsrState::all_ones(64);

    void validate() const;
};

/// Maximal-length tap sets for degree 2..32 and 64.
[[nodiscard]] std::vector<int> maximal_taps(int degree);

/// Config with maximal_taps(degree) and an all-ones start state.
[[nodiscard]] LfsrConfig default_lfsr(int degree);

/// Fibonacci register: the feedback bit is the XOR of the tap positions and
/// enters at position 1; the bit at position `degree` leaves.
class Lfsr {
public:
    explicit Lfsr(const LfsrConfig& cfg);

    /// Shifts once with feedback XOR input; returns the bit shifted out.
    bool step(bool input = false) noexcept;

    [[nodiscard]] const LfsrState& state() const noexcept { return state_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }

private:
    int degree_;
    LfsrState state_;
    std::array<std::uint64_t, 2> tap_mask_{0, 0};
    std::array<std::uint64_t, 2> state_mask_{0, 0};
};

struct BmResult {
    std::size_t linear_complexity = 0;
    /// c_1..c_L: s_n = sum_j c_j s_{n-j} (mod 2).
    std::vector<std::uint8_t> connection;
};

/// Shortest LFSR generating the sequence.
[[nodiscard]] BmResult berlekamp_massey(const BitStream& bits);

/// Linear complexity of the prefixes of length step, 2 step, ... and of the
/// whole sequence.
[[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>>
linear_complexity_profile(const BitStream& bits, std::size_t step);

/// Regenerates n bits from the first L bits of `seed` using the recurrence.
[[nodiscard]] BitStream run_recurrence(const BmResult& r, const BitStream& seed, std::size_t n);

[[nodiscard]] BitStream lfsr_generate(const LfsrConfig& cfg, std::size_t n);

struct WhitenResult {
    BitStream bits;
    std::size_t blocks = 0;
    std::size_t discarded_bits = 0; // trailing partial block
};

/// Feeds each raw bit into the feedback path; after every block_bits input
/// bits the keep_bits lowest register positions are emitted, oldest first.
[[nodiscard]] WhitenResult lfsr_whiten(const BitStream& raw, const LfsrConfig& cfg, int keep_bits,
                                       int block_bits);

} // namespace sqrng
