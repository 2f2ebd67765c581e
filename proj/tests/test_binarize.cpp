#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tmids/binarize.hpp"
#include "tmids/error.hpp"
#include "tmids/rng.hpp"

using namespace tmids;

namespace {

Matrix column_matrix(const std::vector<double>& v) {
    Matrix m(0, 1);
    for (double x : v) m.append_row(std::span<const double>(&x, 1));
    return m;
}

// Cut points by sorting and reading the ceil(N*k/n_bins)-th order statistic.
std::vector<double> sort_index_cuts(std::vector<double> col, int n_bins) {
    std::sort(col.begin(), col.end());
    std::vector<double> cuts;
    const double n = static_cast<double>(col.size());
    for (int k = 1; k < n_bins; ++k) {
        const auto rank = static_cast<std::size_t>(std::ceil(n * k / n_bins - 1e-12));
        const double q = col[std::max<std::size_t>(rank, 1) - 1];
        if (q < col.back() && (cuts.empty() || cuts.back() < q)) cuts.push_back(q);
    }
    return cuts;
}

}  // namespace

TEST_SUITE("binarize") {

TEST_CASE("standardizer on [1,2,3]") {
    const auto s = fit_standardizer(column_matrix({1, 2, 3}));
    CHECK(s.mean()[0] == doctest::Approx(2.0));
    CHECK(s.stddev()[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(s.transform_value(0, 1.0) == doctest::Approx(-1.224744871391589));
    CHECK(s.transform_value(0, 2.0) == doctest::Approx(0.0));
    CHECK(s.transform_value(0, 3.0) == doctest::Approx(1.224744871391589));
}

TEST_CASE("constant column standardizes to zero") {
    const auto s = fit_standardizer(column_matrix({4, 4, 4}));
    CHECK(s.is_constant(0));
    CHECK(s.stddev()[0] == 0.0);
    CHECK(s.transform_value(0, 4.0) == 0.0);
    CHECK(s.transform_value(0, 100.0) == 0.0);
    const auto b = fit_bins(s.transform(column_matrix({4, 4, 4})), 10);
    CHECK(b.thresholds(0).empty());
    CHECK(b.effective_bins(0) == 1);
    CHECK(b.bin(0, 0.0) == 0);
}

TEST_CASE("standardized training columns have mean 0 and std 1") {
    Rng rng(5);
    Matrix m(0, 3);
    for (int i = 0; i < 500; ++i) {
        const double row[3] = {rng.normal() * 1e6 + 3e7, rng.uniform(), static_cast<double>(rng.below(7))};
        m.append_row(row);
    }
    const auto s = fit_standardizer(m);
    const auto z = s.transform(m);
    for (std::size_t f = 0; f < 3; ++f) {
        double sum = 0, ss = 0;
        for (std::size_t i = 0; i < z.rows(); ++i) sum += z(i, f);
        const double mean = sum / static_cast<double>(z.rows());
        for (std::size_t i = 0; i < z.rows(); ++i) ss += (z(i, f) - mean) * (z(i, f) - mean);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::sqrt(ss / static_cast<double>(z.rows())) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("standardizer errors") {
    CHECK_THROWS_AS(fit_standardizer(Matrix(0, 2)), InputError);
    CHECK_THROWS_AS(fit_standardizer(column_matrix({1.0, std::nan("")})), InputError);
    CHECK_THROWS_AS(Standardizer({0.0}, {-1.0}), InputError);
    const auto s = fit_standardizer(column_matrix({1, 2}));
    std::vector<double> out(1);
    CHECK_THROWS_AS(s.transform_row(std::vector<double>{1, 2}, out), InputError);
}

TEST_CASE("quartile cuts of 1..100") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    const auto b = fit_bins(column_matrix(v), 4);
    const auto t = b.thresholds(0);
    REQUIRE(t.size() == 3);
    CHECK(t[0] == 25.0);
    CHECK(t[1] == 50.0);
    CHECK(t[2] == 75.0);
    CHECK(b.bin(0, 25.0) == 0);  // right-closed
    CHECK(b.bin(0, 25.5) == 1);
    CHECK(b.bin(0, 100.0) == 3);
    CHECK(b.bin(0, -1e9) == 0);
    CHECK(b.bin(0, 1e9) == 3);
}

TEST_CASE("two bins split at the median") {
    const auto b = fit_bins(column_matrix({5, 1, 4, 2, 3}), 2);
    REQUIRE(b.thresholds(0).size() == 1);
    CHECK(b.thresholds(0)[0] == 3.0);
}

TEST_CASE("repeated values collapse duplicate cuts") {
    const auto b = fit_bins(column_matrix({0, 0, 0, 0, 1}), 4);
    REQUIRE(b.thresholds(0).size() == 1);
    CHECK(b.thresholds(0)[0] == 0.0);
    CHECK(b.effective_bins(0) == 2);
    CHECK(b.bin(0, 0.0) == 0);
    CHECK(b.bin(0, 1.0) == 1);
    CHECK(b.bit_width() == 4);
}

TEST_CASE("binner validation") {
    CHECK_THROWS_AS(QuantileBinner(1, {{}}), ConfigError);
    CHECK_THROWS_AS(QuantileBinner(3, {{1.0, 1.0}}), InputError);
    CHECK_THROWS_AS(QuantileBinner(3, {{2.0, 1.0}}), InputError);
    CHECK_THROWS_AS(QuantileBinner(2, {{1.0, 2.0}}), InputError);
    CHECK_THROWS_AS(fit_bins(column_matrix({1, 2}), 1), ConfigError);
    const QuantileBinner b(3, {{0.0}});
    CHECK_THROWS_AS(b.bin(0, std::numeric_limits<double>::infinity()), InputError);
}

TEST_CASE("one-hot density and monotonicity on random columns") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rows = 1 + rng.below(300);
        const int n_bins = 2 + static_cast<int>(rng.below(40));
        std::vector<double> col;
        const bool discrete = rng.below(3) == 0;
        for (std::uint64_t i = 0; i < rows; ++i)
            col.push_back(discrete ? static_cast<double>(rng.below(5)) : rng.normal() * 3.0);
        const auto m = column_matrix(col);
        const auto s = fit_standardizer(m);
        const auto z = s.transform(m);
        const auto b = fit_bins(z, n_bins);
        CHECK(std::vector<double>(b.thresholds(0).begin(), b.thresholds(0).end()) == sort_index_cuts(z.column(0), n_bins));
        std::vector<double> probes = col;
        for (int p = 0; p < 20; ++p) probes.push_back(rng.normal() * 10.0);
        std::sort(probes.begin(), probes.end());
        int prev = -1;
        for (double x : probes) {
            const auto bits = transform(b, s, std::span<const double>(&x, 1));
            REQUIRE(bits.size() == static_cast<std::size_t>(n_bins));
            CHECK(std::count(bits.begin(), bits.end(), 1) == 1);
            const auto hot = static_cast<int>(std::find(bits.begin(), bits.end(), 1) - bits.begin());
            CHECK(hot < b.effective_bins(0));
            CHECK(hot >= prev);
            prev = hot;
        }
    }
}

TEST_CASE("feature layout") {
    const FeatureLayout layout({"a", "b"}, 3);
    CHECK(layout.bit_count() == 6);
    CHECK(layout.feature_of_bit(4) == 1);
    CHECK(layout.bin_of_bit(4) == 1);
    CHECK(layout.bit_of_literal(4) == 4);
    CHECK(layout.bit_of_literal(10) == 4);
    CHECK(layout.is_negated(10));
    CHECK_FALSE(layout.is_negated(5));
    CHECK(layout.name(1) == "b");
}

TEST_CASE("preprocessor literals equal the one-hot transform") {
    Rng rng(8);
    Matrix m(0, 3);
    for (int i = 0; i < 100; ++i) {
        const double row[3] = {rng.normal(), 7.0, rng.uniform() * 50};
        m.append_row(row);
    }
    auto s = fit_standardizer(m);
    auto b = fit_bins(s.transform(m), 5);
    const Preprocessor pre({"x", "const", "y"}, s, b);
    CHECK(pre.bit_width() == 15);
    CHECK(pre.layout().bit_count() == 15);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto bits = transform(b, s, m.row(i));
        CHECK(pre.literals(m.row(i)) == binarized(bits));
        std::vector<double> z(3);
        s.transform_row(m.row(i), z);
        CHECK(pre.literals_from_standardized(z) == binarized(bits));
    }
    const double bad[3] = {1.0, std::nan(""), 2.0};
    CHECK_THROWS_AS(pre.literals(bad), InputError);
    const double short_row[2] = {1.0, 2.0};
    CHECK_THROWS_AS(pre.literals(short_row), InputError);
    CHECK_THROWS_AS(Preprocessor({"x"}, s, b), StructuralError);
}

}  // TEST_SUITE
