#include "tmids/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "tmids/csv.hpp"
#include "tmids/error.hpp"
#include "tmids/rng.hpp"

namespace tmids {

const std::array<std::string_view, 84> kFlowColumns = {
    "Flow ID",          "Src IP",           "Src Port",         "Dst IP",           "Dst Port",
    "Protocol",         "Timestamp",        "Flow Duration",    "Tot Fwd Pkts",     "Tot Bwd Pkts",
    "TotLen Fwd Pkts",  "TotLen Bwd Pkts",  "Fwd Pkt Len Max",  "Fwd Pkt Len Min",  "Fwd Pkt Len Mean",
    "Fwd Pkt Len Std",  "Bwd Pkt Len Max",  "Bwd Pkt Len Min",  "Bwd Pkt Len Mean", "Bwd Pkt Len Std",
    "Flow Byts/s",      "Flow Pkts/s",      "Flow IAT Mean",    "Flow IAT Std",     "Flow IAT Max",
    "Flow IAT Min",     "Fwd IAT Tot",      "Fwd IAT Mean",     "Fwd IAT Std",      "Fwd IAT Max",
    "Fwd IAT Min",      "Bwd IAT Tot",      "Bwd IAT Mean",     "Bwd IAT Std",      "Bwd IAT Max",
    "Bwd IAT Min",      "Fwd PSH Flags",    "Bwd PSH Flags",    "Fwd URG Flags",    "Bwd URG Flags",
    "Fwd Header Len",   "Bwd Header Len",   "Fwd Pkts/s",       "Bwd Pkts/s",       "Pkt Len Min",
    "Pkt Len Max",      "Pkt Len Mean",     "Pkt Len Std",      "Pkt Len Var",      "FIN Flag Cnt",
    "SYN Flag Cnt",     "RST Flag Cnt",     "PSH Flag Cnt",     "ACK Flag Cnt",     "URG Flag Cnt",
    "CWE Flag Count",   "ECE Flag Cnt",     "Down/Up Ratio",    "Pkt Size Avg",     "Fwd Seg Size Avg",
    "Bwd Seg Size Avg", "Fwd Byts/b Avg",   "Fwd Pkts/b Avg",   "Fwd Blk Rate Avg", "Bwd Byts/b Avg",
    "Bwd Pkts/b Avg",   "Bwd Blk Rate Avg", "Subflow Fwd Pkts", "Subflow Fwd Byts", "Subflow Bwd Pkts",
    "Subflow Bwd Byts", "Init Fwd Win Byts", "Init Bwd Win Byts", "Fwd Act Data Pkts", "Fwd Seg Size Min",
    "Active Mean",      "Active Std",       "Active Max",       "Active Min",       "Idle Mean",
    "Idle Std",         "Idle Max",         "Idle Min",         "Label",
};

const std::array<std::string_view, 4> kIdentifierColumns = {"Flow ID", "Src IP", "Dst IP", "Timestamp"};

const std::array<std::string_view, 5> kPhaseNames = {"Benign", "Reconnaissance", "Initial access",
                                                     "Lateral movement", "Exfiltration"};

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

std::string class_name_for(int c) {
    if (c >= 0 && c < static_cast<int>(kPhaseNames.size())) return std::string(kPhaseNames[static_cast<std::size_t>(c)]);
    return "Class " + std::to_string(c);
}

}  // namespace

FlowSchema FlowSchema::medsec() {
    FlowSchema s;
    s.columns.assign(kFlowColumns.begin(), kFlowColumns.end());
    s.identifier_columns.assign(kIdentifierColumns.begin(), kIdentifierColumns.end());
    s.label_column = "Label";
    s.class_names.assign(kPhaseNames.begin(), kPhaseNames.end());
    return s;
}

std::vector<std::string> FlowSchema::model_features() const {
    std::vector<std::string> out;
    for (const auto& c : columns) {
        if (c == label_column) continue;
        if (std::find(identifier_columns.begin(), identifier_columns.end(), c) != identifier_columns.end()) continue;
        out.push_back(c);
    }
    return out;
}

std::optional<int> FlowSchema::parse_label(std::string_view text) const {
    text = csv::trim(text);
    if (text.empty()) return std::nullopt;
    int id = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), id);
    if (res.ec == std::errc{} && res.ptr == text.data() + text.size()) {
        if (id >= 0 && id < num_classes()) return id;
        return std::nullopt;
    }
    const auto key = lower(text);
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        if (lower(class_names[c]) == key) return static_cast<int>(c);
    }
    return std::nullopt;
}

FlowTable FlowTable::subset(std::span<const std::size_t> indices) const {
    FlowTable out;
    out.feature_names = feature_names;
    out.identifier_names = identifier_names;
    out.class_names = class_names;
    out.features = features.select_rows(indices);
    out.labels.reserve(indices.size());
    out.identifiers.reserve(indices.size());
    out.source_row.reserve(indices.size());
    for (auto i : indices) {
        out.labels.push_back(labels[i]);
        out.identifiers.push_back(identifiers[i]);
        out.source_row.push_back(source_row[i]);
    }
    return out;
}

std::vector<std::size_t> FlowTable::class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (auto y : labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

FlowCsvReader::FlowCsvReader(std::istream& in, const FlowSchema& schema, std::vector<std::string> model_features,
                             bool require_label, bool require_identifiers)
    : in_(in), schema_(schema) {
    std::unordered_map<std::string, std::size_t> header;
    if (std::getline(in_, line_)) {
        if (line_.size() >= 3 && line_.compare(0, 3, "\xEF\xBB\xBF") == 0) line_.erase(0, 3);
        const auto cols = csv::split_line(line_);
        header_width_ = cols.size();
        for (std::size_t i = 0; i < cols.size(); ++i) header.emplace(std::string(csv::trim(cols[i])), i);
    }
    std::vector<std::string> missing;
    auto find = [&](const std::string& name) -> std::optional<std::size_t> {
        const auto it = header.find(name);
        if (it == header.end()) return std::nullopt;
        return it->second;
    };
    for (const auto& name : model_features) {
        if (auto col = find(name))
            feature_cols_.push_back(*col);
        else
            missing.push_back(name);
    }
    for (const auto& name : schema_.identifier_columns) {
        auto col = find(name);
        if (!col && require_identifiers) missing.push_back(name);
        id_cols_.push_back(col ? *col : static_cast<std::size_t>(-1));
    }
    label_col_ = find(schema_.label_column);
    if (require_label && !label_col_) missing.push_back(schema_.label_column);
    if (!missing.empty()) {
        std::string msg = "CSV header is missing required column(s):";
        for (const auto& m : missing) msg += " '" + m + "'";
        throw SchemaError(msg);
    }
}

bool FlowCsvReader::next(Row& row) {
    while (std::getline(in_, line_)) {
        if (csv::trim(line_).empty()) continue;
        ++data_row_;
        const auto fields = csv::split_line(line_);
        if (fields.size() < header_width_) {
            ++quarantined_;
            continue;
        }
        row.source_row = data_row_;
        row.features.resize(feature_cols_.size());
        bool ok = true;
        for (std::size_t f = 0; f < feature_cols_.size() && ok; ++f) ok = csv::parse_number(fields[feature_cols_[f]], row.features[f]);
        row.label.reset();
        if (ok && label_col_) {
            row.label = schema_.parse_label(fields[*label_col_]);
            ok = row.label.has_value();
        }
        if (!ok) {
            ++quarantined_;
            continue;
        }
        row.identifiers.resize(id_cols_.size());
        for (std::size_t i = 0; i < id_cols_.size(); ++i)
            row.identifiers[i] = id_cols_[i] < fields.size() ? std::string(csv::trim(fields[id_cols_[i]])) : std::string();
        return true;
    }
    return false;
}

FlowTable read_csv(std::istream& in, const FlowSchema& schema) {
    const auto features = schema.model_features();
    FlowTable table;
    table.feature_names = features;
    table.identifier_names = schema.identifier_columns;
    table.class_names = schema.class_names;
    table.features = Matrix(0, features.size());

    FlowCsvReader reader(in, schema, features, true, true);
    FlowCsvReader::Row row;
    while (reader.next(row)) {
        table.features.append_row(row.features);
        table.labels.push_back(*row.label);
        table.identifiers.push_back(row.identifiers);
        table.source_row.push_back(row.source_row);
    }
    table.quarantined = reader.quarantined();
    return table;
}

FlowTable load_csv(const std::string& path, const FlowSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_csv(in, schema);
}

void write_csv(const FlowTable& table, const FlowSchema& schema, std::ostream& out) {
    struct Source {
        enum Kind { Feature, Identifier, Label, Blank } kind;
        std::size_t index;
    };
    std::vector<Source> sources;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        const auto& name = schema.columns[c];
        out << (c ? "," : "") << csv::escape(name);
        if (name == schema.label_column) {
            sources.push_back({Source::Label, 0});
        } else if (auto it = std::find(table.identifier_names.begin(), table.identifier_names.end(), name);
                   it != table.identifier_names.end()) {
            sources.push_back({Source::Identifier, static_cast<std::size_t>(it - table.identifier_names.begin())});
        } else if (auto ft = std::find(table.feature_names.begin(), table.feature_names.end(), name);
                   ft != table.feature_names.end()) {
            sources.push_back({Source::Feature, static_cast<std::size_t>(ft - table.feature_names.begin())});
        } else {
            sources.push_back({Source::Blank, 0});
        }
    }
    out << '\n';
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t c = 0; c < sources.size(); ++c) {
            if (c) out << ',';
            const auto& s = sources[c];
            switch (s.kind) {
                case Source::Feature: out << csv::format_double(table.features(i, s.index)); break;
                case Source::Identifier:
                    if (s.index < table.identifiers[i].size()) out << csv::escape(table.identifiers[i][s.index]);
                    break;
                case Source::Label: out << csv::escape(table.class_names[static_cast<std::size_t>(table.labels[i])]); break;
                case Source::Blank: break;
            }
        }
        out << '\n';
    }
}

namespace {

struct RowKey {
    const FlowTable* table;
    std::size_t row;
};

std::uint64_t canonical_bits(double v) { return std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v); }

struct RowHash {
    std::size_t operator()(const RowKey& k) const noexcept {
        std::uint64_t h = 1469598103934665603ull ^ static_cast<std::uint64_t>(k.table->labels[k.row]);
        for (double v : k.table->features.row(k.row)) {
            h ^= canonical_bits(v);
            h *= 1099511628211ull;
            h ^= h >> 29;
        }
        return static_cast<std::size_t>(h);
    }
};

struct RowEq {
    bool operator()(const RowKey& a, const RowKey& b) const noexcept {
        if (a.table->labels[a.row] != b.table->labels[b.row]) return false;
        const auto ra = a.table->features.row(a.row);
        const auto rb = b.table->features.row(b.row);
        return std::equal(ra.begin(), ra.end(), rb.begin());
    }
};

}  // namespace

std::pair<FlowTable, CleanReport> clean(const FlowTable& table) {
    CleanReport report;
    report.input_rows = table.rows();
    report.quarantined = table.quarantined;
    std::vector<std::size_t> keep;
    keep.reserve(table.rows());
    std::unordered_set<RowKey, RowHash, RowEq> seen;
    seen.reserve(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const auto r = table.features.row(i);
        if (!std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); })) {
            ++report.missing;
            continue;
        }
        if (!seen.insert(RowKey{&table, i}).second) {
            ++report.duplicates;
            continue;
        }
        keep.push_back(i);
    }
    auto out = table.subset(keep);
    out.quarantined = table.quarantined;
    report.output_rows = out.rows();
    return {std::move(out), report};
}

SplitIndices split_indices(std::span<const int> labels, int num_classes, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ConfigError("train_fraction must lie strictly between 0 and 1");
    Rng rng(spec.seed);
    SplitIndices out;
    const auto n = labels.size();
    if (!spec.stratified) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order.begin(), order.end());
        const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
        out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    } else {
        std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] < 0 || labels[i] >= num_classes) throw InputError("split: label out of range");
            by_class[static_cast<std::size_t>(labels[i])].push_back(i);
        }
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            if (by_class[c].size() == 1)
                throw SplitError("split: class " + std::to_string(c) + " has a single row; stratification needs >= 2");
        }
        // largest-remainder allocation of the overall train count
        const auto total_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
        std::vector<std::size_t> quota(by_class.size());
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            const double ideal = spec.train_fraction * static_cast<double>(by_class[c].size());
            quota[c] = static_cast<std::size_t>(std::floor(ideal));
            assigned += quota[c];
            remainders.emplace_back(ideal - std::floor(ideal), c);
        }
        std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; i < remainders.size() && assigned < total_train; ++i) {
            if (remainders[i].first <= 0.0) break;
            ++quota[remainders[i].second];
            ++assigned;
        }
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            auto& idx = by_class[c];
            if (idx.empty()) continue;
            quota[c] = std::clamp<std::size_t>(quota[c], 1, idx.size() - 1);
            rng.shuffle(idx.begin(), idx.end());
            out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]));
            out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]), idx.end());
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::pair<FlowTable, FlowTable> split(const FlowTable& table, const SplitSpec& spec) {
    const auto idx = split_indices(table.labels, table.num_classes(), spec);
    return {table.subset(idx.train), table.subset(idx.test)};
}

BalancedSet smote(const Matrix& features, std::span<const int> labels, int num_classes, int k_neighbors,
                  std::uint64_t seed) {
    if (k_neighbors < 1) throw ConfigError("smote: k_neighbors must be >= 1");
    if (labels.size() != features.rows()) throw InputError("smote: label count differs from row count");
    BalancedSet out;
    out.features = features;
    out.labels.assign(labels.begin(), labels.end());
    out.original_rows = features.rows();
    auto& report = out.report;
    report.k_neighbors = k_neighbors;

    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) throw InputError("smote: label out of range");
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (const auto& m : members) report.pre_counts.push_back(m.size());
    const auto majority = report.pre_counts.empty() ? 0 : *std::max_element(report.pre_counts.begin(), report.pre_counts.end());

    Rng rng(seed);
    const auto dims = features.cols();
    std::vector<double> synthetic(dims);
    for (std::size_t c = 0; c < members.size(); ++c) {
        const auto& idx = members[c];
        if (idx.size() == majority) continue;
        if (idx.empty()) {
            report.warnings.push_back("class " + std::to_string(c) + " has no training rows; left unbalanced");
            continue;
        }
        const auto needed = majority - idx.size();
        if (idx.size() == 1) {
            report.warnings.push_back("class " + std::to_string(c) +
                                      " has a single training row; duplicated instead of interpolated");
            for (std::size_t s = 0; s < needed; ++s) {
                out.features.append_row(features.row(idx[0]));
                out.labels.push_back(static_cast<int>(c));
            }
            report.synthetic += needed;
            continue;
        }
        auto k = static_cast<std::size_t>(k_neighbors);
        if (k > idx.size() - 1) {
            k = idx.size() - 1;
            report.warnings.push_back("class " + std::to_string(c) + ": k_neighbors reduced to " + std::to_string(k));
        }
        // neighbour lists are computed lazily, only for drawn base samples
        std::vector<std::vector<std::size_t>> neighbours(idx.size());
        std::vector<std::pair<double, std::size_t>> dist;
        auto neighbours_of = [&](std::size_t local) -> const std::vector<std::size_t>& {
            auto& nb = neighbours[local];
            if (!nb.empty()) return nb;
            dist.clear();
            const auto base = features.row(idx[local]);
            for (std::size_t o = 0; o < idx.size(); ++o) {
                if (o == local) continue;
                const auto other = features.row(idx[o]);
                double d = 0.0;
                for (std::size_t f = 0; f < dims; ++f) {
                    const double diff = base[f] - other[f];
                    d += diff * diff;
                }
                dist.emplace_back(d, o);
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
            for (std::size_t i = 0; i < k; ++i) nb.push_back(dist[i].second);
            return nb;
        };
        for (std::size_t s = 0; s < needed; ++s) {
            const auto local = static_cast<std::size_t>(rng.below(idx.size()));
            const auto& nb = neighbours_of(local);
            const auto pick = nb[static_cast<std::size_t>(rng.below(nb.size()))];
            const double u = rng.uniform();
            const auto x = features.row(idx[local]);
            const auto y = features.row(idx[pick]);
            for (std::size_t f = 0; f < dims; ++f) synthetic[f] = x[f] + u * (y[f] - x[f]);
            out.features.append_row(synthetic);
            out.labels.push_back(static_cast<int>(c));
        }
        report.synthetic += needed;
    }
    report.post_counts.assign(members.size(), 0);
    for (auto y : out.labels) ++report.post_counts[static_cast<std::size_t>(y)];
    return out;
}

std::vector<ClassProfile> separated_profiles(int num_classes, std::size_t feature_count, double separation) {
    if (num_classes < 2) throw ConfigError("separated_profiles: need >= 2 classes");
    std::vector<ClassProfile> profiles(static_cast<std::size_t>(num_classes));
    for (std::size_t c = 0; c < profiles.size(); ++c) {
        auto& p = profiles[c];
        p.mean.resize(feature_count);
        p.stddev.resize(feature_count);
        for (std::size_t f = 0; f < feature_count; ++f) {
            // flow statistics span many magnitudes; vary the scale per feature
            const double scale = std::pow(10.0, static_cast<double>(f % 5));
            if (f % 13 == 12) {
                // flag-like column that never varies
                p.mean[f] = 0.0;
                p.stddev[f] = 0.0;
                continue;
            }
            const auto slot = (c * 3 + f) % static_cast<std::size_t>(num_classes);
            p.mean[f] = scale * (10.0 + separation * static_cast<double>(slot));
            p.stddev[f] = scale;
        }
    }
    return profiles;
}

FlowTable gen_synthetic(std::size_t n_per_class, const std::vector<ClassProfile>& profiles, std::uint64_t seed) {
    const auto schema = FlowSchema::medsec();
    const auto names = schema.model_features();
    if (profiles.size() < 2) throw ConfigError("gen_synthetic: need >= 2 class profiles");
    for (std::size_t c = 0; c < profiles.size(); ++c) {
        const auto& p = profiles[c];
        if (p.mean.size() != names.size() || p.stddev.size() != names.size())
            throw ConfigError("gen_synthetic: profile " + std::to_string(c) + " must cover " +
                              std::to_string(names.size()) + " features");
        for (std::size_t f = 0; f < names.size(); ++f) {
            if (!std::isfinite(p.mean[f]) || !std::isfinite(p.stddev[f]) || p.stddev[f] < 0.0)
                throw ConfigError("gen_synthetic: degenerate profile " + std::to_string(c));
        }
    }
    FlowTable t;
    t.feature_names = names;
    t.identifier_names = schema.identifier_columns;
    for (std::size_t c = 0; c < profiles.size(); ++c) t.class_names.push_back(class_name_for(static_cast<int>(c)));
    t.features = Matrix(0, names.size());
    Rng rng(seed);
    std::vector<double> row(names.size());
    std::size_t serial = 0;
    for (std::size_t c = 0; c < profiles.size(); ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            for (std::size_t f = 0; f < names.size(); ++f) row[f] = profiles[c].mean[f] + profiles[c].stddev[f] * rng.normal();
            t.features.append_row(row);
            t.labels.push_back(static_cast<int>(c));
            const auto host = std::to_string(c) + "." + std::to_string(i % 250 + 1);
            t.identifiers.push_back({"syn-" + std::to_string(serial), "10.0." + host, "192.168.0.10",
                                     "2025-01-01 00:00:" + std::to_string(serial % 60)});
            t.source_row.push_back(0);
            ++serial;
        }
    }
    return t;
}

}  // namespace tmids
