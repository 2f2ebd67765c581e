#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tmids/literals.hpp"
#include "tmids/matrix.hpp"

namespace tmids {

/// Per-feature z-scoring with population standard deviation. Features whose
/// training spread is zero are flagged constant and map to 0.
class Standardizer {
public:
    Standardizer() = default;
    Standardizer(std::vector<double> mean, std::vector<double> stddev);

    std::size_t feature_count() const noexcept { return mean_.size(); }
    std::span<const double> mean() const noexcept { return mean_; }
    std::span<const double> stddev() const noexcept { return stddev_; }
    bool is_constant(std::size_t feature) const { return !(stddev_[feature] > 0.0); }

    double transform_value(std::size_t feature, double value) const {
        return is_constant(feature) ? 0.0 : (value - mean_[feature]) / stddev_[feature];
    }
    /// Throws InputError on length mismatch.
    void transform_row(std::span<const double> in, std::span<double> out) const;
    Matrix transform(const Matrix& m) const;

    bool operator==(const Standardizer&) const = default;

private:
    std::vector<double> mean_;
    std::vector<double> stddev_;
};

/// Throws InputError on an empty matrix.
Standardizer fit_standardizer(const Matrix& train);

/// Quantile cut points per feature. Bin b covers (thr[b-1], thr[b]]; values
/// below the first cut land in bin 0 and values above the last cut in the last
/// effective bin. Every feature occupies exactly n_bins output bits; bits past
/// the effective bin count stay zero.
class QuantileBinner {
public:
    QuantileBinner() = default;
    QuantileBinner(int n_bins, std::vector<std::vector<double>> thresholds);

    int n_bins() const noexcept { return n_bins_; }
    std::size_t feature_count() const noexcept { return thresholds_.size(); }
    std::span<const double> thresholds(std::size_t feature) const { return thresholds_[feature]; }
    int effective_bins(std::size_t feature) const { return static_cast<int>(thresholds_[feature].size()) + 1; }
    std::size_t bit_width() const noexcept { return thresholds_.size() * static_cast<std::size_t>(n_bins_); }

    /// Bin index of one standardized value. Throws InputError if non-finite.
    int bin(std::size_t feature, double value) const;

    bool operator==(const QuantileBinner&) const = default;

private:
    int n_bins_ = 0;
    std::vector<std::vector<double>> thresholds_;
};

/// Type-1 empirical quantiles at k/n_bins, k = 1..n_bins-1, with duplicate
/// cuts and cuts at the column maximum dropped. Throws ConfigError when
/// n_bins < 2 and InputError on an empty or non-finite matrix.
QuantileBinner fit_bins(const Matrix& standardized, int n_bins);

/// Concatenated one-hot codes of a raw (unstandardized) row.
std::vector<std::uint8_t> transform(const QuantileBinner& binner, const Standardizer& standardizer,
                                    std::span<const double> row);

/// Maps machine literals back to model features and bins.
class FeatureLayout {
public:
    FeatureLayout() = default;
    FeatureLayout(std::vector<std::string> feature_names, int n_bins);

    std::size_t feature_count() const noexcept { return names_.size(); }
    std::size_t bit_count() const noexcept { return names_.size() * static_cast<std::size_t>(n_bins_); }
    int n_bins() const noexcept { return n_bins_; }
    const std::string& name(std::size_t feature) const { return names_[feature]; }
    std::span<const std::string> names() const noexcept { return names_; }

    std::size_t feature_of_bit(std::size_t bit) const { return bit / static_cast<std::size_t>(n_bins_); }
    int bin_of_bit(std::size_t bit) const { return static_cast<int>(bit % static_cast<std::size_t>(n_bins_)); }
    /// Literal k < n refers to bit k, literal n + k to its negation.
    std::size_t bit_of_literal(std::size_t literal) const {
        return literal < bit_count() ? literal : literal - bit_count();
    }
    bool is_negated(std::size_t literal) const { return literal >= bit_count(); }

private:
    std::vector<std::string> names_;
    int n_bins_ = 0;
};

/// Fitted standardizer + binner + feature names: everything needed to turn a
/// raw model-feature row into machine literals.
class Preprocessor {
public:
    Preprocessor() = default;
    Preprocessor(std::vector<std::string> feature_names, Standardizer standardizer, QuantileBinner binner);

    const std::vector<std::string>& feature_names() const noexcept { return names_; }
    const Standardizer& standardizer() const noexcept { return standardizer_; }
    const QuantileBinner& binner() const noexcept { return binner_; }
    FeatureLayout layout() const { return FeatureLayout(names_, binner_.n_bins()); }
    std::size_t bit_width() const noexcept { return binner_.bit_width(); }

    LiteralVector literals(std::span<const double> raw_row) const;
    /// Same as literals() for rows that are already standardized.
    LiteralVector literals_from_standardized(std::span<const double> standardized_row) const;

    bool operator==(const Preprocessor&) const = default;

private:
    std::vector<std::string> names_;
    Standardizer standardizer_;
    QuantileBinner binner_;
};

}  // namespace tmids
