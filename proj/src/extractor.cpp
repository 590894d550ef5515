#include "sqrng/extractor.hpp"

#include "sqrng/error.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace sqrng {

namespace {

// Xilinx XAPP052 table; with XOR feedback every nonzero state is on the
// maximal cycle.
const std::map<int, std::vector<int>>& tap_table() {
    static const std::map<int, std::vector<int>> table{
        {2, {2, 1}},          {3, {3, 2}},          {4, {4, 3}},          {5, {5, 3}},
        {6, {6, 5}},          {7, {7, 6}},          {8, {8, 6, 5, 4}},    {9, {9, 5}},
        {10, {10, 7}},        {11, {11, 9}},        {12, {12, 6, 4, 1}},  {13, {13, 4, 3, 1}},
        {14, {14, 5, 3, 1}},  {15, {15, 14}},       {16, {16, 15, 13, 4}}, {17, {17, 14}},
        {18, {18, 11}},       {19, {19, 6, 2, 1}},  {20, {20, 17}},       {21, {21, 19}},
        {22, {22, 21}},       {23, {23, 18}},       {24, {24, 23, 22, 17}}, {25, {25, 22}},
        {26, {26, 6, 2, 1}},  {27, {27, 5, 2, 1}},  {28, {28, 25}},       {29, {29, 27}},
        {30, {30, 6, 4, 1}},  {31, {31, 28}},       {32, {32, 22, 2, 1}}, {64, {64, 63, 61, 60}},
    };
    return table;
}

std::array<std::uint64_t, 2> low_mask(int bits) {
    std::array<std::uint64_t, 2> m{0, 0};
    m[0] = bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
    if (bits > 64) {
        m[1] = bits >= 128 ? ~std::uint64_t{0} : (std::uint64_t{1} << (bits - 64)) - 1;
    }
    return m;
}

// Sequence bits reversed and packed LSB-first, so that the discrepancy sum
// sum_j c_j s_{N-j} becomes an AND of two word arrays at an offset.
class ReversedBits {
public:
    explicit ReversedBits(const BitStream& bits)
        : n_(bits.size()), words_((n_ + 63) / 64 + 2, 0) {
        for (std::size_t i = 0; i < n_; ++i) {
            if (bits[i]) {
                const std::size_t r = n_ - 1 - i;
                words_[r >> 6] |= std::uint64_t{1} << (r & 63);
            }
        }
    }

    // 64 bits starting at bit `pos`; bits past the end read as zero.
    [[nodiscard]] std::uint64_t window(std::size_t pos) const noexcept {
        const std::size_t w = pos >> 6;
        const unsigned sh = pos & 63;
        if (w >= words_.size()) {
            return 0;
        }
        std::uint64_t lo = words_[w] >> sh;
        if (sh != 0 && w + 1 < words_.size()) {
            lo |= words_[w + 1] << (64 - sh);
        }
        return lo;
    }

private:
    std::size_t n_;
    std::vector<std::uint64_t> words_;
};

struct BmRun {
    std::vector<std::uint64_t> c;
    std::size_t length = 0;
};

template <typename OnStep>
BmRun run_berlekamp_massey(const BitStream& bits, OnStep&& on_step) {
    const std::size_t n = bits.size();
    const ReversedBits rev(bits);
    const std::size_t words = n / 64 + 2;
    std::vector<std::uint64_t> c(words, 0), b(words, 0), t;
    c[0] = 1;
    b[0] = 1;
    std::size_t L = 0;
    std::size_t b_degree = 0; // degree bound of b
    std::size_t m = 1;

    auto xor_shifted = [&](std::size_t shift) {
        const std::size_t ws = shift >> 6;
        const unsigned bs = shift & 63;
        const std::size_t b_words = b_degree / 64 + 1;
        for (std::size_t i = 0; i < b_words && i + ws < words; ++i) {
            c[i + ws] ^= b[i] << bs;
            if (bs != 0 && i + ws + 1 < words) {
                c[i + ws + 1] ^= b[i] >> (64 - bs);
            }
        }
    };

    for (std::size_t N = 0; N < n; ++N) {
        // d = sum_{j=0..L} c_j s_{N-j}; s_{N-j} sits at reversed index n-1-N+j
        const std::size_t offset = n - 1 - N;
        std::uint64_t acc = 0;
        const std::size_t full = (L + 1) / 64;
        for (std::size_t w = 0; w < full; ++w) {
            acc ^= c[w] & rev.window(offset + 64 * w);
        }
        if (const unsigned rest = (L + 1) & 63; rest != 0) {
            const std::uint64_t mask = (std::uint64_t{1} << rest) - 1;
            acc ^= c[full] & rev.window(offset + 64 * full) & mask;
        }
        const bool d = std::popcount(acc) & 1;

        if (!d) {
            ++m;
        } else if (2 * L <= N) {
            t = c;
            xor_shifted(m);
            const std::size_t old_l = L;
            L = N + 1 - L;
            b.swap(t);
            b_degree = old_l;
            m = 1;
        } else {
            xor_shifted(m);
            ++m;
        }
        on_step(N + 1, L);
    }
    return BmRun{std::move(c), L};
}

} // namespace

LfsrState LfsrState::all_ones(int degree) {
    return LfsrState{low_mask(degree)};
}

void LfsrConfig::validate() const {
    require(degree >= 2 && degree <= 128, ErrorKind::invalid_config, "LFSR degree must be in [2, 128]");
    require(!taps.empty(), ErrorKind::invalid_config, "LFSR needs at least one tap");
    for (int t : taps) {
        require(t >= 1 && t <= degree, ErrorKind::invalid_config, "LFSR tap outside [1, degree]");
    }
    require(*std::max_element(taps.begin(), taps.end()) == degree, ErrorKind::invalid_config,
            "highest LFSR tap must equal the degree");
    const auto mask = low_mask(degree);
    require((initial_state.words[0] & ~mask[0]) == 0 && (initial_state.words[1] & ~mask[1]) == 0,
            ErrorKind::invalid_config, "LFSR initial state wider than the degree");
    require(!initial_state.is_zero(), ErrorKind::invalid_config, "LFSR initial state must be nonzero");
}

std::vector<int> maximal_taps(int degree) {
    const auto& table = tap_table();
    const auto it = table.find(degree);
    require(it != table.end(), ErrorKind::invalid_argument,
            "no tabulated maximal-length taps for degree " + std::to_string(degree));
    return it->second;
}

LfsrConfig default_lfsr(int degree) {
    LfsrConfig cfg;
    cfg.degree = degree;
    cfg.taps = maximal_taps(degree);
    cfg.initial_state = LfsrState::all_ones(degree);
    return cfg;
}

Lfsr::Lfsr(const LfsrConfig& cfg) : degree_(cfg.degree), state_(cfg.initial_state) {
    cfg.validate();
    for (int t : cfg.taps) {
        const int i = t - 1;
        tap_mask_[static_cast<std::size_t>(i >> 6)] |= std::uint64_t{1} << (i & 63);
    }
    state_mask_ = low_mask(degree_);
}

bool Lfsr::step(bool input) noexcept {
    auto& w = state_.words;
    const bool out = state_.bit(degree_);
    const bool fb = ((std::popcount(w[0] & tap_mask_[0]) + std::popcount(w[1] & tap_mask_[1])) & 1) ^
                    static_cast<int>(input);
    w[1] = ((w[1] << 1) | (w[0] >> 63)) & state_mask_[1];
    w[0] = ((w[0] << 1) | static_cast<std::uint64_t>(fb)) & state_mask_[0];
    return out;
}

BmResult berlekamp_massey(const BitStream& bits) {
    const auto run = run_berlekamp_massey(bits, [](std::size_t, std::size_t) {});
    BmResult r;
    r.linear_complexity = run.length;
    r.connection.resize(run.length);
    for (std::size_t j = 1; j <= run.length; ++j) {
        r.connection[j - 1] = static_cast<std::uint8_t>((run.c[j >> 6] >> (j & 63)) & 1u);
    }
    return r;
}

std::vector<std::pair<std::size_t, std::size_t>> linear_complexity_profile(const BitStream& bits,
                                                                         std::size_t step) {
    require(step >= 1, ErrorKind::invalid_argument, "profile step must be >= 1");
    std::vector<std::pair<std::size_t, std::size_t>> profile;
    const std::size_t n = bits.size();
    run_berlekamp_massey(bits, [&](std::size_t prefix, std::size_t L) {
        if (prefix % step == 0 || prefix == n) {
            profile.emplace_back(prefix, L);
        }
    });
    return profile;
}

BitStream run_recurrence(const BmResult& r, const BitStream& seed, std::size_t n) {
    const std::size_t L = r.linear_complexity;
    require(seed.size() >= std::min(L, n), ErrorKind::invalid_argument,
            "recurrence seed shorter than the linear complexity");
    std::vector<std::uint8_t> s(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < L) {
            s[i] = seed[i];
            continue;
        }
        std::uint8_t v = 0;
        for (std::size_t j = 1; j <= L; ++j) {
            v ^= static_cast<std::uint8_t>(r.connection[j - 1] & s[i - j]);
        }
        s[i] = v;
    }
    return BitStream::from_bits(s);
}

BitStream lfsr_generate(const LfsrConfig& cfg, std::size_t n) {
    Lfsr reg(cfg);
    BitStream out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(reg.step());
    }
    out.provenance = "lfsr degree " + std::to_string(cfg.degree);
    return out;
}

WhitenResult lfsr_whiten(const BitStream& raw, const LfsrConfig& cfg, int keep_bits, int block_bits) {
    require(block_bits >= 1, ErrorKind::invalid_argument, "block_bits must be >= 1");
    require(keep_bits >= 0 && keep_bits <= block_bits, ErrorKind::invalid_argument,
            "keep_bits must be in [0, block_bits]");
    require(keep_bits > 0, ErrorKind::zero_entropy, "zero min-entropy: nothing to extract");
    require(keep_bits <= cfg.degree, ErrorKind::invalid_argument,
            "keep_bits cannot exceed the register degree");
    require(raw.size() >= static_cast<std::size_t>(block_bits), ErrorKind::invalid_argument,
            "raw stream shorter than one block");

    Lfsr reg(cfg);
    const auto block = static_cast<std::size_t>(block_bits);
    WhitenResult out;
    out.blocks = raw.size() / block;
    out.discarded_bits = raw.size() - out.blocks * block;
    out.bits.reserve(out.blocks * static_cast<std::size_t>(keep_bits));
    std::size_t pos = 0;
    for (std::size_t b = 0; b < out.blocks; ++b) {
        for (std::size_t i = 0; i < block; ++i) {
            reg.step(raw[pos++]);
        }
        for (int p = keep_bits; p >= 1; --p) {
            out.bits.push_back(reg.state().bit(p));
        }
    }
    out.bits.provenance = "lfsr whitened, keep " + std::to_string(keep_bits) + " of " +
                          std::to_string(block_bits);
    return out;
}

} // namespace sqrng
