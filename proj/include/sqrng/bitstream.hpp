#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sqrng {

/// Packed bit sequence, MSB-first within each byte. Bits past bit_length in
/// the last byte are always zero.
class BitStream {
public:
    BitStream() = default;

    /// Takes ownership of packed bytes; trailing pad bits are cleared.
    BitStream(std::vector<std::uint8_t> bytes, std::size_t bit_length);

    static BitStream from_bits(std::span<const std::uint8_t> bits); // one 0/1 per element
    static BitStream from_string(std::string_view bits);            // "0110..."

    void push_back(bool bit) {
        if ((bit_length_ & 7u) == 0) {
            bytes_.push_back(0);
        }
        if (bit) {
            bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_length_ & 7u));
        }
        ++bit_length_;
    }

    /// Appends the low `width` bits of value, most significant first.
    void append_word(std::uint64_t value, int width);

    [[nodiscard]] bool operator[](std::size_t i) const noexcept {
        return (bytes_[i >> 3] >> (7u - (i & 7u))) & 1u;
    }

    [[nodiscard]] std::size_t size() const noexcept { return bit_length_; }
    [[nodiscard]] bool empty() const noexcept { return bit_length_ == 0; }
    [[nodiscard]] const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
    [[nodiscard]] std::size_t count_ones() const noexcept;

    void reserve(std::size_t bits) { bytes_.reserve((bits + 7) / 8); }

    [[nodiscard]] BitStream prefix(std::size_t n) const;
    [[nodiscard]] BitStream complement() const;
    [[nodiscard]] std::string to_string() const;

    std::string provenance;

    friend bool operator==(const BitStream& a, const BitStream& b) {
        return a.bit_length_ == b.bit_length_ && a.bytes_ == b.bytes_;
    }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t bit_length_ = 0;
};

} // namespace sqrng
