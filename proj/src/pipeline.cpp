#include "tmids/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tmids/error.hpp"
#include "tmids/rng.hpp"

namespace tmids {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::vector<int> predict_all(const TsetlinMachine& model, const LabeledLiterals& data) {
    std::vector<int> out;
    out.reserve(data.size());
    for (const auto& s : data.samples) out.push_back(model.predict(s).predicted);
    return out;
}

}  // namespace

std::uint64_t split_seed(std::uint64_t seed) { return seed; }
std::uint64_t smote_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x5307E5307Eull); }
std::uint64_t machine_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x7537E1170Bull); }

PipelineConfig PipelineConfig::standard_preset() { return PipelineConfig{}; }

PipelineConfig PipelineConfig::sparse_preset() {
    PipelineConfig c;
    c.machine = MachineConfig::sparse_preset();
    c.n_bins = 25;
    return c;
}

void PipelineConfig::validate() const {
    machine.validate();
    if (n_bins < 2) throw ConfigError("n_bins must be >= 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
    if (k_neighbors < 1) throw ConfigError("k_neighbors must be >= 1");
}

Preprocessor fit_preprocessor(const FlowTable& train, int n_bins) {
    auto standardizer = fit_standardizer(train.features);
    auto binner = fit_bins(standardizer.transform(train.features), n_bins);
    return Preprocessor(train.feature_names, std::move(standardizer), std::move(binner));
}

LabeledLiterals to_literals(const Preprocessor& pre, const FlowTable& table) {
    LabeledLiterals out;
    out.samples.reserve(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) out.samples.push_back(pre.literals(table.features.row(i)));
    out.labels = table.labels;
    return out;
}

PreparedData prepare(const FlowTable& train, const FlowTable& test, const PipelineConfig& config) {
    config.validate();
    if (train.rows() == 0) throw InputError("training split is empty");
    PreparedData out;
    auto standardizer = fit_standardizer(train.features);
    const Matrix standardized = standardizer.transform(train.features);
    auto binner = fit_bins(standardized, config.n_bins);
    out.preprocessor = Preprocessor(train.feature_names, std::move(standardizer), std::move(binner));

    if (config.balance) {
        auto balanced = smote(standardized, train.labels, train.num_classes(), config.k_neighbors, smote_seed(config.seed));
        out.balance = balanced.report;
        out.train.samples.reserve(balanced.features.rows());
        for (std::size_t i = 0; i < balanced.features.rows(); ++i)
            out.train.samples.push_back(out.preprocessor.literals_from_standardized(balanced.features.row(i)));
        out.train.labels = std::move(balanced.labels);
    } else {
        out.balance.method = "none";
        out.balance.pre_counts = train.class_counts();
        out.balance.post_counts = out.balance.pre_counts;
        for (std::size_t i = 0; i < standardized.rows(); ++i)
            out.train.samples.push_back(out.preprocessor.literals_from_standardized(standardized.row(i)));
        out.train.labels = train.labels;
    }
    out.test = to_literals(out.preprocessor, test);
    return out;
}

PipelineResult run_pipeline(const FlowTable& raw, const PipelineConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (raw.num_classes() != config.machine.num_classes)
        throw ConfigError("data has " + std::to_string(raw.num_classes()) + " classes, machine is configured for " +
                          std::to_string(config.machine.num_classes));
    auto [cleaned, clean_report] = clean(raw);
    if (cleaned.rows() == 0) throw InputError("no rows left after cleaning");
    SplitSpec spec;
    spec.train_fraction = config.train_fraction;
    spec.seed = split_seed(config.seed);
    auto [train, test] = split(cleaned, spec);
    auto prepared = prepare(train, test, config);

    MachineConfig mc = config.machine;
    mc.rng_seed = machine_seed(config.seed);
    TsetlinMachine machine(mc, prepared.preprocessor.bit_width());
    auto train_report = fit(machine, prepared.train, &prepared.test, on_epoch);
    const auto predicted = predict_all(machine, prepared.test);
    auto report = metrics(confusion(prepared.test.labels, predicted, mc.num_classes));
    return PipelineResult{clean_report, prepared.balance, std::move(train_report), std::move(report),
                          ModelBundle{std::move(machine), std::move(prepared.preprocessor), cleaned.class_names}};
}

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd r;
    if (values.empty()) return r;
    const double n = static_cast<double>(values.size());
    r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / n);
    return r;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int num_classes, int k,
                                                       std::uint64_t seed) {
    if (k < 2) throw ConfigError("k-fold needs k >= 2");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) throw InputError("k-fold: label out of range");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (!by_class[c].empty() && by_class[c].size() < static_cast<std::size_t>(k))
            throw SplitError("k-fold: class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                             " rows, fewer than k=" + std::to_string(k));
    }
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t deal = 0;
    for (auto& idx : by_class) {
        rng.shuffle(idx.begin(), idx.end());
        for (auto i : idx) folds[deal++ % folds.size()].push_back(i);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

CVReport kfold(const FlowTable& table, int k, const PipelineConfig& config, std::uint64_t seed) {
    config.validate();
    const auto folds = stratified_folds(table.labels, table.num_classes(), k, seed);
    CVReport report;
    report.k = k;
    std::vector<double> wp, wr, wf, mp, mr, mf, acc;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_idx;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(train_idx.begin(), train_idx.end());
        auto fold_cfg = config;
        fold_cfg.seed = seed + f;
        auto prepared = prepare(table.subset(train_idx), table.subset(folds[f]), fold_cfg);
        MachineConfig mc = config.machine;
        mc.rng_seed = machine_seed(fold_cfg.seed);
        TsetlinMachine machine(mc, prepared.preprocessor.bit_width());
        fit(machine, prepared.train);
        auto m = metrics(confusion(prepared.test.labels, predict_all(machine, prepared.test), mc.num_classes));
        wp.push_back(m.weighted.precision);
        wr.push_back(m.weighted.recall);
        wf.push_back(m.weighted.f1);
        mp.push_back(m.macro.precision);
        mr.push_back(m.macro.recall);
        mf.push_back(m.macro.f1);
        acc.push_back(m.accuracy);
        report.fold_sizes.push_back(folds[f].size());
        report.folds.push_back(std::move(m));
    }
    report.weighted_precision = mean_std(wp);
    report.weighted_recall = mean_std(wr);
    report.weighted_f1 = mean_std(wf);
    report.macro_precision = mean_std(mp);
    report.macro_recall = mean_std(mr);
    report.macro_f1 = mean_std(mf);
    report.accuracy = mean_std(acc);
    return report;
}

}  // namespace tmids
