#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace tmids {

// Seeded generator with distribution helpers whose output depends only on the
// engine sequence (std::mt19937_64 is fully specified), unlike the
// implementation-defined std:: distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_open_closed() { return 1.0 - uniform(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open_closed();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const auto j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Draws the number of failures before the first success of a Bernoulli(p)
/// sequence. Lets sparse Bernoulli selections over long literal ranges jump
/// directly between hits.
class GeometricSkip {
public:
    explicit GeometricSkip(double p) : p_(p), log_q_(p < 1.0 ? std::log1p(-p) : 0.0) {}

    std::uint64_t draw(Rng& rng) const {
        if (p_ >= 1.0) return 0;
        if (p_ <= 0.0) return std::numeric_limits<std::uint64_t>::max();
        const double g = std::floor(std::log(rng.uniform_open_closed()) / log_q_);
        if (!(g < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
        return static_cast<std::uint64_t>(g);
    }

    double probability() const { return p_; }

private:
    double p_;
    double log_q_;
};

}  // namespace tmids
