#include "sqrng/entropy.hpp"

#include "sqrng/error.hpp"

#include <algorithm>
#include <cmath>

namespace sqrng {

std::string_view to_string(EntropyMode mode) noexcept {
    switch (mode) {
    case EntropyMode::empirical_total: return "empirical-total";
    case EntropyMode::model_quantum_only: return "model-quantum-only";
    }
    return "unknown";
}

double EntropyReport::standard_error() const {
    if (samples_used == 0 || max_prob <= 0.0 || max_prob >= 1.0) {
        return 0.0;
    }
    const double n = static_cast<double>(samples_used);
    return std::sqrt(max_prob * (1.0 - max_prob) / n) / (max_prob * std::log(2.0));
}

CodeHistogram::CodeHistogram(int n_bits) : n_bits_(n_bits) {
    require(n_bits >= 1 && n_bits <= 24, ErrorKind::invalid_argument, "n_bits must be in [1, 24]");
    if (n_bits <= kDenseBits) {
        dense_.assign(std::size_t{1} << n_bits, 0);
    }
}

void CodeHistogram::add(std::uint32_t code) {
    require(code < (1u << n_bits_), ErrorKind::invalid_argument, "code out of range");
    if (dense_.empty()) {
        ++sparse_[code];
    } else {
        ++dense_[code];
    }
    ++total_;
}

void CodeHistogram::add(std::span<const std::uint32_t> codes) {
    for (auto c : codes) {
        add(c);
    }
}

void CodeHistogram::merge(const CodeHistogram& other) {
    require(other.n_bits_ == n_bits_, ErrorKind::invalid_argument,
            "cannot merge histograms of different widths");
    if (dense_.empty()) {
        for (const auto& [code, n] : other.sparse_) {
            sparse_[code] += n;
        }
    } else {
        for (std::size_t i = 0; i < dense_.size(); ++i) {
            dense_[i] += other.dense_[i];
        }
    }
    total_ += other.total_;
}

std::uint64_t CodeHistogram::max_count() const {
    std::uint64_t best = 0;
    if (dense_.empty()) {
        for (const auto& [code, n] : sparse_) {
            best = std::max(best, n);
        }
    } else {
        best = *std::max_element(dense_.begin(), dense_.end());
    }
    return best;
}

std::uint64_t CodeHistogram::count(std::uint32_t code) const {
    if (dense_.empty()) {
        const auto it = sparse_.find(code);
        return it == sparse_.end() ? 0 : it->second;
    }
    return code < dense_.size() ? dense_[code] : 0;
}

double CodeHistogram::shannon_bits() const {
    if (total_ == 0) {
        return 0.0;
    }
    const double n = static_cast<double>(total_);
    double h = 0.0;
    auto term = [&](std::uint64_t c) {
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log2(p);
        }
    };
    if (dense_.empty()) {
        for (const auto& [code, c] : sparse_) {
            term(c);
        }
    } else {
        for (auto c : dense_) {
            term(c);
        }
    }
    return h;
}

bool operator==(const CodeHistogram& a, const CodeHistogram& b) {
    return a.n_bits_ == b.n_bits_ && a.total_ == b.total_ && a.dense_ == b.dense_ &&
           a.sparse_ == b.sparse_;
}

std::uint64_t recommended_samples(int n_bits) {
    return 100 * (std::uint64_t{1} << n_bits) / 16;
}

EntropyReport min_entropy(const CodeHistogram& h) {
    require(h.total() > 0, ErrorKind::invalid_argument, "min-entropy of an empty trace");
    EntropyReport r;
    r.n_bits = h.n_bits();
    r.samples_used = h.total();
    r.max_prob = static_cast<double>(h.max_count()) / static_cast<double>(h.total());
    // -log2(1) is -0.0; report a clean zero
    r.min_entropy_bits = r.max_prob >= 1.0 ? 0.0 : -std::log2(r.max_prob);
    r.shannon_bits = h.shannon_bits();
    if (r.samples_used < kMinEntropySampleFloor) {
        r.warnings.push_back("fewer than " + std::to_string(kMinEntropySampleFloor) +
                             " samples; plug-in estimate unreliable");
    } else if (r.samples_used < recommended_samples(r.n_bits)) {
        r.warnings.push_back("below the recommended " +
                             std::to_string(recommended_samples(r.n_bits)) + " samples");
    }
    return r;
}

EntropyReport min_entropy(const DigitalTrace& dt) {
    require(!dt.codes.empty(), ErrorKind::invalid_argument, "min-entropy of an empty trace");
    CodeHistogram h(dt.adc.n_bits);
    h.add(dt.codes);
    return min_entropy(h);
}

EntropyReport quantum_min_entropy(const SourceModel& source, const DetectorModel& detector,
                                  const AdcConfig& adc, std::size_t n) {
    require(n >= 1, ErrorKind::invalid_argument, "min-entropy of an empty trace");
    const auto trace = synthesize_quantum(source, detector, n);
    auto r = min_entropy(digitize(trace, adc));
    r.mode = EntropyMode::model_quantum_only;
    return r;
}

ExtractionRatio extraction_ratio(const EntropyReport& er) {
    require(er.n_bits >= 1 && er.min_entropy_bits >= 0.0 &&
                er.min_entropy_bits <= static_cast<double>(er.n_bits) + 1e-12,
            ErrorKind::invalid_argument, "invalid entropy report");
    ExtractionRatio out;
    out.keep_bits = static_cast<int>(std::floor(er.min_entropy_bits + 1e-12));
    out.keep_bits = std::min(out.keep_bits, er.n_bits);
    out.ratio = static_cast<double>(out.keep_bits) / static_cast<double>(er.n_bits);
    return out;
}

} // namespace sqrng
