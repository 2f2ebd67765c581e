#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tmids/matrix.hpp"

namespace tmids {

/// The 84 CICFlowMeter columns of the MedSec-25 export, in file order.
extern const std::array<std::string_view, 84> kFlowColumns;
/// Columns kept for provenance but never fed to the model.
extern const std::array<std::string_view, 4> kIdentifierColumns;
/// Attack-phase label names indexed by label id.
extern const std::array<std::string_view, 5> kPhaseNames;

struct FlowSchema {
    std::vector<std::string> columns;             // required header columns (order-insensitive)
    std::vector<std::string> identifier_columns;  // required but non-model
    std::string label_column = "Label";
    std::vector<std::string> class_names;         // label id -> name

    /// MedSec-25 layout: 84 columns, 4 identifiers, Label, five phases.
    static FlowSchema medsec();

    /// columns minus identifiers minus label, in column order.
    std::vector<std::string> model_features() const;
    /// Accepts a class name (case-insensitive) or an integer id. nullopt if unknown.
    std::optional<int> parse_label(std::string_view text) const;
    int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
};

/// Parsed flow records. `source_row` keeps the 1-based CSV data-row number of
/// every record (0 for synthetic rows).
struct FlowTable {
    std::vector<std::string> feature_names;
    std::vector<std::string> identifier_names;
    std::vector<std::string> class_names;
    Matrix features;
    std::vector<int> labels;
    std::vector<std::vector<std::string>> identifiers;
    std::vector<std::size_t> source_row;
    std::size_t quarantined = 0;  // rows rejected while loading

    std::size_t rows() const noexcept { return labels.size(); }
    int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
    FlowTable subset(std::span<const std::size_t> indices) const;
    std::vector<std::size_t> class_counts() const;
};

/// Streams records from a flow CSV one at a time. Rows with unparseable
/// numbers or unknown labels are skipped and counted.
class FlowCsvReader {
public:
    struct Row {
        std::size_t source_row = 0;
        std::vector<double> features;
        std::optional<int> label;
        std::vector<std::string> identifiers;
    };

    /// Reads the header; throws SchemaError if a model feature is missing, or
    /// the label / identifier columns when they are required.
    FlowCsvReader(std::istream& in, const FlowSchema& schema, std::vector<std::string> model_features,
                  bool require_label, bool require_identifiers = false);

    bool next(Row& row);
    bool has_label() const noexcept { return label_col_.has_value(); }
    std::size_t quarantined() const noexcept { return quarantined_; }

private:
    std::istream& in_;
    FlowSchema schema_;
    std::vector<std::size_t> feature_cols_;
    std::vector<std::size_t> id_cols_;
    std::optional<std::size_t> label_col_;
    std::size_t header_width_ = 0;
    std::size_t data_row_ = 0;
    std::size_t quarantined_ = 0;
    std::string line_;
};

FlowTable load_csv(const std::string& path, const FlowSchema& schema);
FlowTable read_csv(std::istream& in, const FlowSchema& schema);
/// Writes the table with the schema's column order.
void write_csv(const FlowTable& table, const FlowSchema& schema, std::ostream& out);

struct CleanReport {
    std::size_t input_rows = 0;
    std::size_t missing = 0;     // rows with a missing or non-finite model feature
    std::size_t duplicates = 0;  // exact repeats over model features + label
    std::size_t output_rows = 0;
    std::size_t quarantined = 0; // carried over from loading
};

/// Drops rows with missing/non-finite values, then exact duplicates (first kept).
std::pair<FlowTable, CleanReport> clean(const FlowTable& table);

struct SplitSpec {
    double train_fraction = 0.8;
    bool stratified = true;
    std::uint64_t seed = 42;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded split; indices come back sorted. Stratified mode allots each class
/// its share by largest remainder and keeps at least one row of every class on
/// both sides. Throws SplitError for classes with fewer than two rows.
SplitIndices split_indices(std::span<const int> labels, int num_classes, const SplitSpec& spec);
std::pair<FlowTable, FlowTable> split(const FlowTable& table, const SplitSpec& spec);

struct BalanceReport {
    std::string method = "smote";
    int k_neighbors = 5;
    std::vector<std::size_t> pre_counts;
    std::vector<std::size_t> post_counts;
    std::size_t synthetic = 0;
    std::vector<std::string> warnings;
};

struct BalancedSet {
    Matrix features;          // originals first, then synthetic rows
    std::vector<int> labels;
    std::size_t original_rows = 0;
    BalanceReport report;
};

/// SMOTE: raises every present class to the majority count with samples
/// x + u * (nn - x), nn drawn from the k nearest same-class neighbours.
BalancedSet smote(const Matrix& features, std::span<const int> labels, int num_classes, int k_neighbors,
                  std::uint64_t seed);

struct ClassProfile {
    std::vector<double> mean;
    std::vector<double> stddev;  // 0 gives a constant feature
};

/// Per-class Gaussian profiles over `feature_count` features whose class
/// means sit `separation` standard deviations apart on every informative feature.
std::vector<ClassProfile> separated_profiles(int num_classes, std::size_t feature_count, double separation);

/// Reproducible labelled flow table using the MedSec-25 model feature names.
/// Throws ConfigError on degenerate profiles.
FlowTable gen_synthetic(std::size_t n_per_class, const std::vector<ClassProfile>& profiles, std::uint64_t seed);

}  // namespace tmids
