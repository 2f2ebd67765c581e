#include "tmids/literals.hpp"

#include <string>

#include "tmids/error.hpp"

namespace tmids {

namespace {

void set_bit(std::vector<std::uint64_t>& words, std::size_t k) { words[k >> 6] |= std::uint64_t{1} << (k & 63); }

void clear_bit(std::vector<std::uint64_t>& words, std::size_t k) { words[k >> 6] &= ~(std::uint64_t{1} << (k & 63)); }

}  // namespace

std::vector<std::uint8_t> LiteralVector::to_bits() const {
    std::vector<std::uint8_t> out(feature_count());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*this)[k] ? 1 : 0;
    return out;
}

LiteralVector binarized(std::span<const std::uint8_t> sample_bits) {
    LiteralBuilder builder(sample_bits.size());
    for (std::size_t k = 0; k < sample_bits.size(); ++k) {
        const auto v = sample_bits[k];
        if (v > 1) throw InputError("binarized: value " + std::to_string(v) + " at position " + std::to_string(k) + " is not 0/1");
        if (v == 1) builder.set_feature(k);
    }
    return std::move(builder).finish();
}

LiteralBuilder::LiteralBuilder(std::size_t feature_count) {
    lits_.n_ = feature_count;
    lits_.words_.assign(literal_words(2 * feature_count), 0);
    // all negations start at 1
    for (std::size_t k = 0; k < feature_count; ++k) set_bit(lits_.words_, feature_count + k);
}

void LiteralBuilder::set_feature(std::size_t bit) {
    if (bit >= lits_.n_) throw InputError("feature bit " + std::to_string(bit) + " out of range");
    set_bit(lits_.words_, bit);
    clear_bit(lits_.words_, lits_.n_ + bit);
}

LiteralVector LiteralBuilder::finish() && { return std::move(lits_); }

}  // namespace tmids
