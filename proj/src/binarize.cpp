#include "tmids/binarize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tmids/error.hpp"

namespace tmids {

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
    if (mean_.size() != stddev_.size()) throw InputError("standardizer: mean/stddev length mismatch");
    for (auto& s : stddev_) {
        if (!std::isfinite(s) || s < 0.0) throw InputError("standardizer: invalid standard deviation");
    }
}

void Standardizer::transform_row(std::span<const double> in, std::span<double> out) const {
    if (in.size() != feature_count() || out.size() != feature_count())
        throw InputError("standardizer: row has " + std::to_string(in.size()) + " values, expected " +
                         std::to_string(feature_count()));
    for (std::size_t f = 0; f < in.size(); ++f) out[f] = transform_value(f, in[f]);
}

Matrix Standardizer::transform(const Matrix& m) const {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) transform_row(m.row(i), out.row(i));
    return out;
}

Standardizer fit_standardizer(const Matrix& train) {
    if (train.rows() == 0 || train.cols() == 0) throw InputError("fit_standardizer: empty matrix");
    const auto n = static_cast<double>(train.rows());
    std::vector<double> mean(train.cols(), 0.0);
    std::vector<double> stddev(train.cols(), 0.0);
    for (std::size_t f = 0; f < train.cols(); ++f) {
        double sum = 0.0;
        double lo = train(0, f);
        double hi = lo;
        for (std::size_t i = 0; i < train.rows(); ++i) {
            const double v = train(i, f);
            if (!std::isfinite(v)) throw InputError("fit_standardizer: non-finite value in column " + std::to_string(f));
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        mean[f] = sum / n;
        if (lo == hi) {
            mean[f] = lo;
            continue;  // constant column
        }
        double ss = 0.0;
        for (std::size_t i = 0; i < train.rows(); ++i) {
            const double d = train(i, f) - mean[f];
            ss += d * d;
        }
        stddev[f] = std::sqrt(ss / n);
    }
    return Standardizer(std::move(mean), std::move(stddev));
}

QuantileBinner::QuantileBinner(int n_bins, std::vector<std::vector<double>> thresholds)
    : n_bins_(n_bins), thresholds_(std::move(thresholds)) {
    if (n_bins_ < 2) throw ConfigError("n_bins must be >= 2");
    for (const auto& t : thresholds_) {
        if (t.size() > static_cast<std::size_t>(n_bins_ - 1)) throw InputError("binner: too many thresholds");
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!std::isfinite(t[i])) throw InputError("binner: non-finite threshold");
            if (i > 0 && !(t[i - 1] < t[i])) throw InputError("binner: thresholds must be strictly increasing");
        }
    }
}

int QuantileBinner::bin(std::size_t feature, double value) const {
    if (!std::isfinite(value)) throw InputError("binner: non-finite value for feature " + std::to_string(feature));
    const auto& t = thresholds_[feature];
    // number of cuts strictly below the value: a value equal to a cut stays in the lower bin
    return static_cast<int>(std::lower_bound(t.begin(), t.end(), value) - t.begin());
}

QuantileBinner fit_bins(const Matrix& standardized, int n_bins) {
    if (n_bins < 2) throw ConfigError("n_bins must be >= 2");
    if (standardized.rows() == 0 || standardized.cols() == 0) throw InputError("fit_bins: empty matrix");
    const auto rows = standardized.rows();
    std::vector<std::vector<double>> thresholds(standardized.cols());
    for (std::size_t f = 0; f < standardized.cols(); ++f) {
        auto col = standardized.column(f);
        for (double v : col) {
            if (!std::isfinite(v)) throw InputError("fit_bins: non-finite value in column " + std::to_string(f));
        }
        std::sort(col.begin(), col.end());
        const double top = col.back();
        auto& cuts = thresholds[f];
        for (int k = 1; k < n_bins; ++k) {
            // inverse empirical CDF: smallest x with F(x) >= k / n_bins
            const std::size_t rank = (rows * static_cast<std::size_t>(k) + static_cast<std::size_t>(n_bins) - 1) /
                                     static_cast<std::size_t>(n_bins);
            const double q = col[rank == 0 ? 0 : rank - 1];
            if (q >= top) break;
            if (cuts.empty() || cuts.back() < q) cuts.push_back(q);
        }
    }
    return QuantileBinner(n_bins, std::move(thresholds));
}

std::vector<std::uint8_t> transform(const QuantileBinner& binner, const Standardizer& standardizer,
                                    std::span<const double> row) {
    if (row.size() != binner.feature_count() || row.size() != standardizer.feature_count())
        throw InputError("transform: row has " + std::to_string(row.size()) + " values, expected " +
                         std::to_string(binner.feature_count()));
    std::vector<std::uint8_t> bits(binner.bit_width(), 0);
    for (std::size_t f = 0; f < row.size(); ++f) {
        if (!std::isfinite(row[f])) throw InputError("transform: non-finite value for feature " + std::to_string(f));
        const int b = binner.bin(f, standardizer.transform_value(f, row[f]));
        bits[f * static_cast<std::size_t>(binner.n_bins()) + static_cast<std::size_t>(b)] = 1;
    }
    return bits;
}

FeatureLayout::FeatureLayout(std::vector<std::string> feature_names, int n_bins)
    : names_(std::move(feature_names)), n_bins_(n_bins) {
    if (n_bins_ < 1) throw ConfigError("layout: n_bins must be >= 1");
}

Preprocessor::Preprocessor(std::vector<std::string> feature_names, Standardizer standardizer, QuantileBinner binner)
    : names_(std::move(feature_names)), standardizer_(std::move(standardizer)), binner_(std::move(binner)) {
    if (names_.size() != standardizer_.feature_count() || names_.size() != binner_.feature_count())
        throw StructuralError("preprocessor: feature name, standardizer and binner widths differ");
}

LiteralVector Preprocessor::literals(std::span<const double> raw_row) const {
    if (raw_row.size() != names_.size())
        throw InputError("row has " + std::to_string(raw_row.size()) + " model features, expected " +
                         std::to_string(names_.size()));
    LiteralBuilder builder(bit_width());
    const auto width = static_cast<std::size_t>(binner_.n_bins());
    for (std::size_t f = 0; f < raw_row.size(); ++f) {
        if (!std::isfinite(raw_row[f])) throw InputError("non-finite value for feature '" + names_[f] + "'");
        builder.set_feature(f * width + static_cast<std::size_t>(binner_.bin(f, standardizer_.transform_value(f, raw_row[f]))));
    }
    return std::move(builder).finish();
}

LiteralVector Preprocessor::literals_from_standardized(std::span<const double> standardized_row) const {
    if (standardized_row.size() != names_.size())
        throw InputError("row has " + std::to_string(standardized_row.size()) + " model features, expected " +
                         std::to_string(names_.size()));
    LiteralBuilder builder(bit_width());
    const auto width = static_cast<std::size_t>(binner_.n_bins());
    for (std::size_t f = 0; f < standardized_row.size(); ++f)
        builder.set_feature(f * width + static_cast<std::size_t>(binner_.bin(f, standardized_row[f])));
    return std::move(builder).finish();
}

}  // namespace tmids
