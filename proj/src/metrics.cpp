#include "tmids/metrics.hpp"

#include <string>

#include "tmids/error.hpp"

namespace tmids {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : k_(num_classes), counts_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {
    if (num_classes < 0) throw InputError("confusion matrix: negative class count");
}

std::size_t ConfusionMatrix::index(int truth, int predicted) const {
    if (truth < 0 || truth >= k_ || predicted < 0 || predicted >= k_)
        throw InputError("confusion matrix: label out of range");
    return static_cast<std::size_t>(truth) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(predicted);
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
    std::uint64_t s = 0;
    for (int p = 0; p < k_; ++p) s += at(truth, p);
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(int predicted) const {
    std::uint64_t s = 0;
    for (int t = 0; t < k_; ++t) s += at(t, predicted);
    return s;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int num_classes) {
    if (y_true.size() != y_pred.size())
        throw InputError("confusion: " + std::to_string(y_true.size()) + " true labels vs " +
                         std::to_string(y_pred.size()) + " predictions");
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) cm.add(y_true[i], y_pred[i]);
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    MetricsReport r;
    r.matrix = cm;
    r.total = cm.total();
    const int k = cm.num_classes();
    std::uint64_t correct = 0;
    for (int c = 0; c < k; ++c) {
        ClassMetrics m;
        m.tp = cm.at(c, c);
        m.fn = cm.row_sum(c) - m.tp;
        m.fp = cm.col_sum(c) - m.tp;
        m.tn = r.total - m.tp - m.fn - m.fp;
        m.support = m.tp + m.fn;
        m.precision = ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fp));
        m.recall = ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fn));
        m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
        correct += m.tp;
        r.per_class.push_back(m);
    }
    if (k > 0) {
        for (const auto& m : r.per_class) {
            r.macro.precision += m.precision / k;
            r.macro.recall += m.recall / k;
            r.macro.f1 += m.f1 / k;
            const double w = ratio(static_cast<double>(m.support), static_cast<double>(r.total));
            r.weighted.precision += w * m.precision;
            r.weighted.recall += w * m.recall;
            r.weighted.f1 += w * m.f1;
        }
    }
    r.accuracy = ratio(static_cast<double>(correct), static_cast<double>(r.total));
    return r;
}

}  // namespace tmids
