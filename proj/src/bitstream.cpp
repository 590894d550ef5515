#include "sqrng/bitstream.hpp"

#include "sqrng/error.hpp"

#include <bit>

namespace sqrng {

BitStream::BitStream(std::vector<std::uint8_t> bytes, std::size_t bit_length)
    : bytes_(std::move(bytes)), bit_length_(bit_length) {
    require(bytes_.size() == (bit_length_ + 7) / 8, ErrorKind::invalid_argument,
            "byte count does not match bit_length");
    if (const auto tail = bit_length_ & 7u; tail != 0) {
        bytes_.back() &= static_cast<std::uint8_t>(0xFFu << (8u - tail));
    }
}

BitStream BitStream::from_bits(std::span<const std::uint8_t> bits) {
    BitStream out;
    out.reserve(bits.size());
    for (auto b : bits) {
        out.push_back(b != 0);
    }
    return out;
}

BitStream BitStream::from_string(std::string_view bits) {
    BitStream out;
    out.reserve(bits.size());
    for (char c : bits) {
        require(c == '0' || c == '1', ErrorKind::invalid_argument, "bit string must be 0/1 only");
        out.push_back(c == '1');
    }
    return out;
}

void BitStream::append_word(std::uint64_t value, int width) {
    for (int b = width - 1; b >= 0; --b) {
        push_back((value >> b) & 1u);
    }
}

std::size_t BitStream::count_ones() const noexcept {
    std::size_t ones = 0;
    for (auto byte : bytes_) {
        ones += static_cast<std::size_t>(std::popcount(byte));
    }
    return ones;
}

BitStream BitStream::prefix(std::size_t n) const {
    require(n <= bit_length_, ErrorKind::invalid_argument, "prefix longer than stream");
    std::vector<std::uint8_t> bytes(bytes_.begin(), bytes_.begin() + static_cast<std::ptrdiff_t>((n + 7) / 8));
    BitStream out(std::move(bytes), n);
    out.provenance = provenance;
    return out;
}

BitStream BitStream::complement() const {
    std::vector<std::uint8_t> bytes(bytes_);
    for (auto& b : bytes) {
        b = static_cast<std::uint8_t>(~b);
    }
    BitStream out(std::move(bytes), bit_length_);
    out.provenance = provenance;
    return out;
}

std::string BitStream::to_string() const {
    std::string s;
    s.reserve(bit_length_);
    for (std::size_t i = 0; i < bit_length_; ++i) {
        s.push_back((*this)[i] ? '1' : '0');
    }
    return s;
}

} // namespace sqrng
