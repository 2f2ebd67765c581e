#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmids/binarize.hpp"
#include "tmids/dataset.hpp"
#include "tmids/machine.hpp"
#include "tmids/metrics.hpp"
#include "tmids/model_io.hpp"

namespace tmids {

struct PipelineConfig {
    MachineConfig machine = MachineConfig::standard_preset();
    int n_bins = 40;
    double train_fraction = 0.8;
    bool balance = true;
    int k_neighbors = 5;
    std::uint64_t seed = 42;  // split, SMOTE and machine seeds derive from this

    static PipelineConfig standard_preset();
    /// Sparse machine row: 1500 clauses, T 30, s 20, 25 bins, cap 16, 50 epochs.
    static PipelineConfig sparse_preset();
    void validate() const;
};

/// Seeds for the three stochastic stages, derived from one user seed.
std::uint64_t split_seed(std::uint64_t seed);
std::uint64_t smote_seed(std::uint64_t seed);
std::uint64_t machine_seed(std::uint64_t seed);

/// Fits standardizer and binner on the (pre-balancing) training rows.
Preprocessor fit_preprocessor(const FlowTable& train, int n_bins);

struct PreparedData {
    Preprocessor preprocessor;
    LabeledLiterals train;  // balanced when enabled
    LabeledLiterals test;
    BalanceReport balance;
};

/// standardize (train-fit) -> SMOTE in standardized space -> binarize. The
/// test rows only ever pass through the fitted transforms.
PreparedData prepare(const FlowTable& train, const FlowTable& test, const PipelineConfig& config);

LabeledLiterals to_literals(const Preprocessor& pre, const FlowTable& table);

struct PipelineResult {
    CleanReport clean;
    BalanceReport balance;
    TrainReport train;
    MetricsReport metrics;  // on the held-out split
    ModelBundle model;
};

/// clean -> split -> prepare -> fit -> evaluate on the held-out split.
PipelineResult run_pipeline(const FlowTable& raw, const PipelineConfig& config, const EpochCallback& on_epoch = {});

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population convention
};

struct CVReport {
    int k = 0;
    std::vector<std::size_t> fold_sizes;
    std::vector<MetricsReport> folds;
    MeanStd weighted_precision, weighted_recall, weighted_f1;
    MeanStd macro_precision, macro_recall, macro_f1;
    MeanStd accuracy;
};

MeanStd mean_std(const std::vector<double>& values);

/// Stratified fold assignment: each class is shuffled and dealt round-robin,
/// continuing the deal across classes so fold sizes differ by at most one.
/// Throws SplitError when a present class has fewer than k rows.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int num_classes, int k,
                                                       std::uint64_t seed);

/// k-fold cross-validation on a cleaned table. The whole preparation chain is
/// refit inside every training fold.
CVReport kfold(const FlowTable& table, int k, const PipelineConfig& config, std::uint64_t seed);

}  // namespace tmids
