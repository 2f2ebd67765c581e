#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tmids/csv.hpp"
#include "tmids/dataset.hpp"
#include "tmids/error.hpp"
#include "tmids/rng.hpp"

using namespace tmids;

namespace {

std::string header_line(const FlowSchema& s) {
    std::string h;
    for (std::size_t c = 0; c < s.columns.size(); ++c) h += (c ? "," : "") + csv::escape(s.columns[c]);
    return h;
}

// A data row with every model feature set to `value` and the given label.
std::string data_line(const FlowSchema& s, const std::string& value, const std::string& label) {
    std::string line;
    for (std::size_t c = 0; c < s.columns.size(); ++c) {
        if (c) line += ',';
        const auto& name = s.columns[c];
        if (name == s.label_column)
            line += label;
        else if (std::find(s.identifier_columns.begin(), s.identifier_columns.end(), name) != s.identifier_columns.end())
            line += "id";
        else
            line += value;
    }
    return line;
}

FlowTable small_table(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    FlowTable t;
    t.feature_names = {"a", "b"};
    t.class_names = {"x", "y", "z"};
    t.features = Matrix(0, 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.features.append_row(rows[i]);
        t.labels.push_back(labels[i]);
        t.identifiers.push_back({});
        t.source_row.push_back(i + 1);
    }
    return t;
}

// Smallest residual of `s` against every segment between two rows of the pool.
double convex_residual(std::span<const double> s, const Matrix& pool, const std::vector<std::size_t>& rows) {
    double best = INFINITY;
    for (auto a : rows) {
        for (auto b : rows) {
            if (a == b) continue;
            const auto x = pool.row(a), y = pool.row(b);
            double dd = 0, ds = 0;
            for (std::size_t f = 0; f < s.size(); ++f) {
                dd += (y[f] - x[f]) * (y[f] - x[f]);
                ds += (s[f] - x[f]) * (y[f] - x[f]);
            }
            const double u = dd > 0 ? std::clamp(ds / dd, 0.0, 1.0) : 0.0;
            double r = 0;
            for (std::size_t f = 0; f < s.size(); ++f) {
                const double e = s[f] - (x[f] + u * (y[f] - x[f]));
                r += e * e;
            }
            best = std::min(best, std::sqrt(r));
        }
    }
    return best;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("flow schema") {
    const auto s = FlowSchema::medsec();
    CHECK(s.columns.size() == 84);
    const auto f = s.model_features();
    CHECK(f.size() == 79);
    for (const auto* dropped : {"Flow ID", "Src IP", "Dst IP", "Timestamp", "Label"})
        CHECK(std::find(f.begin(), f.end(), dropped) == f.end());
    CHECK(std::find(f.begin(), f.end(), "Flow Duration") != f.end());
    CHECK(s.num_classes() == 5);
    CHECK(s.parse_label("Benign") == 0);
    CHECK(s.parse_label(" lateral movement ") == 3);
    CHECK(s.parse_label("2") == 2);
    CHECK_FALSE(s.parse_label("5").has_value());
    CHECK_FALSE(s.parse_label("Botnet").has_value());
    CHECK_FALSE(s.parse_label("").has_value());
}

TEST_CASE("csv field helpers") {
    CHECK(csv::split_line("a,\"b,c\",d\r") == std::vector<std::string>{"a", "b,c", "d"});
    CHECK(csv::split_line("\"he said \"\"hi\"\"\",") == std::vector<std::string>{"he said \"hi\"", ""});
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK(csv::escape("plain") == "plain");
    double v = 0;
    CHECK(csv::parse_number(" 1.5 ", v));
    CHECK(v == 1.5);
    CHECK(csv::parse_number("", v));
    CHECK(std::isnan(v));
    CHECK(csv::parse_number("Infinity", v));
    CHECK(std::isinf(v));
    CHECK_FALSE(csv::parse_number("12abc", v));
    CHECK(csv::format_double(0.1) == "0.1");
}

TEST_CASE("synthetic table survives a csv round trip") {
    const auto schema = FlowSchema::medsec();
    const auto t = gen_synthetic(20, separated_profiles(5, 79, 6.0), 3);
    std::stringstream buf;
    write_csv(t, schema, buf);
    const auto back = read_csv(buf, schema);
    CHECK(back.rows() == t.rows());
    CHECK(back.features == t.features);
    CHECK(back.labels == t.labels);
    CHECK(back.identifiers == t.identifiers);
    CHECK(back.quarantined == 0);
    CHECK(back.source_row.front() == 1);
}

TEST_CASE("missing columns are a schema error") {
    std::istringstream in("Flow Duration,Label\n1,Benign\n");
    try {
        read_csv(in, FlowSchema::medsec());
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("'Tot Fwd Pkts'") != std::string::npos);
    }
}

TEST_CASE("bad rows are quarantined, BOM and CRLF are tolerated") {
    const auto s = FlowSchema::medsec();
    std::string text = "\xEF\xBB\xBF" + header_line(s) + "\r\n";
    text += data_line(s, "1", "Benign") + "\r\n";
    text += data_line(s, "2", "Exfiltration") + "\n";
    text += data_line(s, "oops", "Benign") + "\n";
    text += data_line(s, "3", "Botnet") + "\n";
    text += "1,2,3\n";
    text += "\n";
    text += data_line(s, "", "1") + "\n";  // empty numbers parse as missing
    std::istringstream in(text);
    const auto t = read_csv(in, s);
    CHECK(t.rows() == 3);
    CHECK(t.quarantined == 3);
    CHECK(t.labels == std::vector<int>{0, 4, 1});
    CHECK(t.source_row == std::vector<std::size_t>{1, 2, 6});
    CHECK(std::isnan(t.features(2, 0)));
}

TEST_CASE("load_csv reports unreadable paths") {
    CHECK_THROWS_AS(load_csv("/nonexistent/flows.csv", FlowSchema::medsec()), IoError);
}

TEST_CASE("clean drops missing values and duplicates") {
    auto t = small_table({{1, 2}, {NAN, 2}, {1, 2}, {1, 2}, {0.0, 5}, {-0.0, 5}, {1, INFINITY}}, {0, 0, 0, 1, 2, 2, 1});
    t.quarantined = 4;
    const auto [c, rep] = clean(t);
    CHECK(rep.input_rows == 7);
    CHECK(rep.missing == 2);
    CHECK(rep.duplicates == 2);
    CHECK(rep.output_rows == 3);
    CHECK(rep.quarantined == 4);
    CHECK(c.labels == std::vector<int>{0, 1, 2});
    CHECK(c.source_row == std::vector<std::size_t>{1, 4, 5});
    const auto [again, rep2] = clean(c);
    CHECK(again.features == c.features);
    CHECK(rep2.missing == 0);
    CHECK(rep2.duplicates == 0);
}

TEST_CASE("stratified split keeps class shares") {
    std::vector<int> labels;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 50 + 37 * c; ++i) labels.push_back(c);
    SplitSpec spec;
    spec.seed = 9;
    const auto idx = split_indices(labels, 3, spec);
    CHECK(idx.train.size() + idx.test.size() == labels.size());
    std::set<std::size_t> all(idx.train.begin(), idx.train.end());
    for (auto i : idx.test) CHECK(all.insert(i).second);
    CHECK(all.size() == labels.size());
    CHECK(std::is_sorted(idx.train.begin(), idx.train.end()));
    for (int c = 0; c < 3; ++c) {
        const auto total = std::count(labels.begin(), labels.end(), c);
        const auto in_train = std::count_if(idx.train.begin(), idx.train.end(), [&](auto i) { return labels[i] == c; });
        CHECK(std::abs(static_cast<double>(in_train) - 0.8 * static_cast<double>(total)) <= 1.0);
    }
    const auto again = split_indices(labels, 3, spec);
    CHECK(again.train == idx.train);
    spec.seed = 10;
    CHECK(split_indices(labels, 3, spec).train != idx.train);
}

TEST_CASE("split keeps a row of every class on both sides") {
    const std::vector<int> labels{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
    const auto idx = split_indices(labels, 2, SplitSpec{0.9, true, 1});
    CHECK(std::count_if(idx.test.begin(), idx.test.end(), [&](auto i) { return labels[i] == 1; }) == 1);
    CHECK(std::count_if(idx.train.begin(), idx.train.end(), [&](auto i) { return labels[i] == 1; }) == 1);
}

TEST_CASE("split errors") {
    const std::vector<int> single{0, 0, 0, 1};
    CHECK_THROWS_AS(split_indices(single, 2, SplitSpec{}), SplitError);
    const std::vector<int> ok{0, 0, 1, 1};
    CHECK_THROWS_AS(split_indices(ok, 2, SplitSpec{1.0, true, 1}), ConfigError);
    CHECK_THROWS_AS(split_indices(ok, 1, SplitSpec{}), InputError);
    const auto unstrat = split_indices(ok, 2, SplitSpec{0.5, false, 1});
    CHECK(unstrat.train.size() == 2);
}

TEST_CASE("smote balances classes with convex combinations") {
    Rng rng(21);
    Matrix m(0, 4);
    std::vector<int> labels;
    const std::size_t sizes[3] = {40, 12, 3};
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < sizes[c]; ++i) {
            const double row[4] = {rng.normal() + 5.0 * c, rng.normal(), rng.uniform(), static_cast<double>(c)};
            m.append_row(row);
            labels.push_back(c);
        }
    }
    const auto out = smote(m, labels, 3, 5, 77);
    CHECK(out.report.pre_counts == std::vector<std::size_t>{40, 12, 3});
    CHECK(out.report.post_counts == std::vector<std::size_t>{40, 40, 40});
    CHECK(out.report.synthetic == 65);
    CHECK(out.original_rows == m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) CHECK(std::equal(m.row(i).begin(), m.row(i).end(), out.features.row(i).begin()));
    std::vector<std::vector<std::size_t>> members(3);
    for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
    for (std::size_t i = m.rows(); i < out.features.rows(); ++i)
        CHECK(convex_residual(out.features.row(i), m, members[static_cast<std::size_t>(out.labels[i])]) < 1e-9);
    // class 2 has 3 rows: k drops to 2
    CHECK(std::any_of(out.report.warnings.begin(), out.report.warnings.end(),
                      [](const std::string& w) { return w.find("reduced to 2") != std::string::npos; }));
    const auto again = smote(m, labels, 3, 5, 77);
    CHECK(again.features == out.features);
}

TEST_CASE("smote on degenerate classes") {
    Matrix m(0, 1);
    for (double v : {1.0, 2.0, 3.0, 9.0}) m.append_row(std::span<const double>(&v, 1));
    const std::vector<int> labels{0, 0, 0, 1};
    const auto out = smote(m, labels, 3, 5, 1);
    CHECK(out.report.post_counts == std::vector<std::size_t>{3, 3, 0});
    for (std::size_t i = 4; i < out.features.rows(); ++i) CHECK(out.features(i, 0) == 9.0);
    CHECK(out.report.warnings.size() == 2);
    CHECK_THROWS_AS(smote(m, labels, 3, 0, 1), ConfigError);
    const std::vector<int> short_labels{0, 1};
    CHECK_THROWS_AS(smote(m, short_labels, 2, 1, 1), InputError);
}

TEST_CASE("smote neighbours come from the k nearest") {
    // 1-D class on a line: with k=1, every synthetic point lies between a
    // point and its nearest neighbour, never across a wide gap.
    Matrix m(0, 1);
    std::vector<int> labels;
    for (double v : {0.0, 1.0, 100.0, 101.0}) {
        m.append_row(std::span<const double>(&v, 1));
        labels.push_back(1);
    }
    for (int i = 0; i < 20; ++i) {
        const double v = 500.0 + i;
        m.append_row(std::span<const double>(&v, 1));
        labels.push_back(0);
    }
    const auto out = smote(m, labels, 2, 1, 4);
    for (std::size_t i = m.rows(); i < out.features.rows(); ++i) {
        const double v = out.features(i, 0);
        CHECK(((v >= 0.0 && v <= 1.0) || (v >= 100.0 && v <= 101.0)));
    }
}

TEST_CASE("synthetic generator") {
    const auto profiles = separated_profiles(5, 79, 8.0);
    const auto t = gen_synthetic(30, profiles, 5);
    CHECK(t.rows() == 150);
    CHECK(t.class_counts() == std::vector<std::size_t>{30, 30, 30, 30, 30});
    CHECK(t.feature_names == FlowSchema::medsec().model_features());
    CHECK(t.class_names[1] == "Reconnaissance");
    for (std::size_t i = 0; i < t.rows(); ++i) CHECK(t.features(i, 12) == 0.0);
    CHECK(gen_synthetic(30, profiles, 5).features == t.features);
    CHECK_FALSE(gen_synthetic(30, profiles, 6).features == t.features);
    auto bad = profiles;
    bad[0].stddev[0] = -1.0;
    CHECK_THROWS_AS(gen_synthetic(3, bad, 1), ConfigError);
    CHECK_THROWS_AS(gen_synthetic(3, {profiles[0]}, 1), ConfigError);
    CHECK_THROWS_AS(separated_profiles(1, 79, 1.0), ConfigError);
}

}  // TEST_SUITE
