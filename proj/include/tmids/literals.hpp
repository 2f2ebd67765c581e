#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tmids {

/// The binarized sample seen by the machine: n feature bits followed by their n
/// negations, bit-packed into 64-bit words. Bits past 2n in the last word are zero.
class LiteralVector {
public:
    LiteralVector() = default;

    std::size_t feature_count() const noexcept { return n_; }
    std::size_t size() const noexcept { return 2 * n_; }
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    bool operator[](std::size_t k) const noexcept { return (words_[k >> 6] >> (k & 63)) & 1u; }

    /// The n feature bits; inverse of binarized().
    std::vector<std::uint8_t> to_bits() const;

    bool operator==(const LiteralVector&) const = default;

private:
    friend LiteralVector binarized(std::span<const std::uint8_t> sample_bits);
    friend class LiteralBuilder;

    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

inline std::size_t literal_words(std::size_t literal_count) { return (literal_count + 63) / 64; }

/// Builds the 2n-literal vector from n feature bits. Throws InputError on any
/// value other than 0 or 1.
LiteralVector binarized(std::span<const std::uint8_t> sample_bits);

/// Incremental construction from a sparse set of hot feature bits; used by the
/// binarizer so one-hot rows never materialize as byte vectors.
class LiteralBuilder {
public:
    explicit LiteralBuilder(std::size_t feature_count);
    void set_feature(std::size_t bit);
    LiteralVector finish() &&;

private:
    LiteralVector lits_;
};

}  // namespace tmids
