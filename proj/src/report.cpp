#include "tmids/report.hpp"

#include <ostream>

#include "tmids/csv.hpp"

namespace tmids {

namespace {

std::string name_of(std::span<const std::string> names, std::size_t c) {
    return c < names.size() ? names[c] : std::to_string(c);
}

nlohmann::json averaged(const AveragedMetrics& a) {
    return {{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

nlohmann::json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

}  // namespace

nlohmann::json to_json(const CleanReport& r) {
    return {{"input_rows", r.input_rows},   {"quarantined", r.quarantined}, {"missing", r.missing},
            {"duplicates", r.duplicates}, {"output_rows", r.output_rows}};
}

nlohmann::json to_json(const BalanceReport& r, std::span<const std::string> class_names) {
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t c = 0; c < r.pre_counts.size(); ++c)
        classes.push_back({{"class", name_of(class_names, c)},
                           {"before", r.pre_counts[c]},
                           {"after", c < r.post_counts.size() ? r.post_counts[c] : 0}});
    return {{"method", r.method},
            {"k_neighbors", r.k_neighbors},
            {"synthetic", r.synthetic},
            {"classes", classes},
            {"warnings", r.warnings}};
}

nlohmann::json to_json(const TrainReport& r) {
    nlohmann::json epochs = nlohmann::json::array();
    for (std::size_t e = 0; e < r.train_accuracy.size(); ++e) {
        nlohmann::json row = {{"epoch", e + 1}, {"train_accuracy", r.train_accuracy[e]}};
        if (e < r.test_accuracy.size()) row["test_accuracy"] = r.test_accuracy[e];
        epochs.push_back(std::move(row));
    }
    return {{"epochs", epochs}};
}

nlohmann::json to_json(const MetricsReport& r, std::span<const std::string> class_names) {
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& m = r.per_class[c];
        per_class.push_back({{"class", name_of(class_names, c)},
                             {"tp", m.tp},
                             {"fp", m.fp},
                             {"fn", m.fn},
                             {"tn", m.tn},
                             {"support", m.support},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1}});
    }
    nlohmann::json matrix = nlohmann::json::array();
    for (int t = 0; t < r.matrix.num_classes(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < r.matrix.num_classes(); ++p) row.push_back(r.matrix.at(t, p));
        matrix.push_back(std::move(row));
    }
    return {{"per_class", per_class},         {"macro", averaged(r.macro)}, {"weighted", averaged(r.weighted)},
            {"accuracy", r.accuracy},         {"total", r.total},           {"confusion_matrix", matrix}};
}

nlohmann::json to_json(const CVReport& r) {
    nlohmann::json folds = nlohmann::json::array();
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
        const auto& m = r.folds[f];
        folds.push_back({{"fold", f + 1},
                         {"test_rows", r.fold_sizes[f]},
                         {"accuracy", m.accuracy},
                         {"weighted", averaged(m.weighted)},
                         {"macro", averaged(m.macro)}});
    }
    return {{"k", r.k},
            {"std_convention", "population"},
            {"folds", folds},
            {"weighted",
             {{"precision", mean_std_json(r.weighted_precision)},
              {"recall", mean_std_json(r.weighted_recall)},
              {"f1", mean_std_json(r.weighted_f1)}}},
            {"macro",
             {{"precision", mean_std_json(r.macro_precision)},
              {"recall", mean_std_json(r.macro_recall)},
              {"f1", mean_std_json(r.macro_f1)}}},
            {"accuracy", mean_std_json(r.accuracy)}};
}

nlohmann::json to_json(const BenchReport& r) {
    nlohmann::json j = {{"samples_measured", r.samples_measured},
                        {"inference_time_us", r.mean_us},
                        {"inference_time_std_us", r.std_us},
                        {"inference_time_min_us", r.min_us},
                        {"inference_time_max_us", r.max_us},
                        {"memory_kb", r.peak_memory_kb},
                        {"model_size_kb", r.model_size_kb}};
    j["cpu_percent"] = r.cpu_percent >= 0.0 ? nlohmann::json(r.cpu_percent) : nlohmann::json(nullptr);
    if (r.includes_binarization) {
        j["inference_time_with_binarization_us"] = r.mean_us_with_binarization;
        j["inference_time_with_binarization_std_us"] = r.std_us_with_binarization;
    }
    return j;
}

void write_metrics_csv(const MetricsReport& r, std::span<const std::string> class_names, std::ostream& out) {
    out << "class,support,tp,fp,fn,tn,precision,recall,f1\n";
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& m = r.per_class[c];
        out << csv::escape(name_of(class_names, c)) << ',' << m.support << ',' << m.tp << ',' << m.fp << ',' << m.fn
            << ',' << m.tn << ',' << csv::format_double(m.precision) << ',' << csv::format_double(m.recall) << ','
            << csv::format_double(m.f1) << '\n';
    }
    const auto avg_row = [&](const char* name, const AveragedMetrics& a) {
        out << name << ',' << r.total << ",,,,," << csv::format_double(a.precision) << ','
            << csv::format_double(a.recall) << ',' << csv::format_double(a.f1) << '\n';
    };
    avg_row("macro", r.macro);
    avg_row("weighted", r.weighted);
}

void write_bench_csv(const BenchReport& r, std::ostream& out) {
    out << "inference_time_us,inference_time_std_us,memory_kb,cpu_percent,model_size_kb,samples_measured";
    if (r.includes_binarization) out << ",inference_time_with_binarization_us,inference_time_with_binarization_std_us";
    out << '\n'
        << csv::format_double(r.mean_us) << ',' << csv::format_double(r.std_us) << ',' << r.peak_memory_kb << ','
        << (r.cpu_percent >= 0.0 ? csv::format_double(r.cpu_percent) : std::string()) << ','
        << csv::format_double(r.model_size_kb) << ',' << r.samples_measured;
    if (r.includes_binarization)
        out << ',' << csv::format_double(r.mean_us_with_binarization) << ','
            << csv::format_double(r.std_us_with_binarization);
    out << '\n';
}

}  // namespace tmids
