#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tmids {

/// Row = true class, column = predicted class.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes = 0);

    int num_classes() const noexcept { return k_; }
    std::uint64_t at(int truth, int predicted) const { return counts_[index(truth, predicted)]; }
    void add(int truth, int predicted, std::uint64_t n = 1) { counts_[index(truth, predicted)] += n; }
    std::uint64_t row_sum(int truth) const;
    std::uint64_t col_sum(int predicted) const;
    std::uint64_t total() const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::size_t index(int truth, int predicted) const;

    int k_;
    std::vector<std::uint64_t> counts_;
};

/// Throws InputError on unequal lengths or labels outside [0, num_classes).
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int num_classes);

struct ClassMetrics {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::uint64_t support = 0;  // tp + fn
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct AveragedMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    AveragedMetrics macro;
    AveragedMetrics weighted;  // support-weighted
    double accuracy = 0.0;
    std::uint64_t total = 0;
    ConfusionMatrix matrix;
};

/// One-vs-rest counts per class. Any ratio with a zero denominator is 0.
MetricsReport metrics(const ConfusionMatrix& cm);

}  // namespace tmids
