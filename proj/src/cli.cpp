#include "tmids/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "tmids/bench.hpp"
#include "tmids/csv.hpp"
#include "tmids/dataset.hpp"
#include "tmids/error.hpp"
#include "tmids/fsutil.hpp"
#include "tmids/interpret.hpp"
#include "tmids/model_io.hpp"
#include "tmids/pipeline.hpp"
#include "tmids/report.hpp"

namespace tmids {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return kExitConfig;
        case ErrorKind::Input:
        case ErrorKind::Split:
        case ErrorKind::Io: return kExitData;
        case ErrorKind::Structural:
        case ErrorKind::Schema: return kExitModel;
    }
    return kExitModel;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

// Every option a subcommand may use; unused members keep their defaults.
struct Options {
    std::string data;
    std::string model;
    std::string out;
    bool stm = false;
    int clauses = 0;
    int threshold = 0;
    double specificity = 0.0;
    int state_depth = 0;
    int max_literals = 0;
    int bins = 0;
    int epochs = 0;
    std::uint64_t seed = 42;
    double train_fraction = 0.8;
    int k_neighbors = 5;
    bool no_smote = false;
    bool export_json = false;
    bool quiet = false;
    int folds = 5;
    std::size_t warmup = 10;
    std::size_t iters = 100;
    bool include_binarization = false;
    std::vector<std::size_t> rows;
    std::size_t top_rules = 0;
    std::size_t rows_per_class = 200;
    int classes = 5;
    double separation = 8.0;
};

// Handles to the tuning options so presets can be overridden only where the
// user (or the environment) supplied a value.
struct PipelineFlags {
    CLI::Option* clauses = nullptr;
    CLI::Option* threshold = nullptr;
    CLI::Option* specificity = nullptr;
    CLI::Option* state_depth = nullptr;
    CLI::Option* max_literals = nullptr;
    CLI::Option* bins = nullptr;
    CLI::Option* epochs = nullptr;
};

CLI::Option* env(CLI::Option* opt, const std::string& name) { return opt->envname("TMIDS_" + name); }

PipelineFlags add_pipeline_options(CLI::App* app, Options& o) {
    PipelineFlags f;
    env(app->add_option("--data", o.data, "Labelled flow CSV")->required(), "DATA");
    env(app->add_option("--seed", o.seed, "Seed for split, balancing and training"), "SEED");
    env(app->add_flag("--stm", o.stm, "Sparse preset: 1500 clauses, s 20, 25 bins, cap 16, 50 epochs"), "STM");
    f.clauses = env(app->add_option("--clauses", o.clauses, "Clauses per class (even)"), "CLAUSES");
    f.threshold = env(app->add_option("--threshold", o.threshold, "Vote threshold T"), "THRESHOLD");
    f.specificity = env(app->add_option("--specificity", o.specificity, "Specificity s"), "SPECIFICITY");
    f.state_depth = env(app->add_option("--state-depth", o.state_depth, "States per action N (1..128)"), "STATE_DEPTH");
    f.max_literals =
        env(app->add_option("--max-literals", o.max_literals, "Literal cap per clause; implies the sparse machine"),
            "MAX_LITERALS");
    f.bins = env(app->add_option("--bins", o.bins, "Quantile bins per feature"), "BINS");
    f.epochs = env(app->add_option("--epochs", o.epochs, "Training epochs"), "EPOCHS");
    env(app->add_option("--train-fraction", o.train_fraction, "Training share of the split"), "TRAIN_FRACTION");
    env(app->add_option("--k-neighbors", o.k_neighbors, "SMOTE neighbours"), "K_NEIGHBORS");
    env(app->add_flag("--no-smote", o.no_smote, "Train on the unbalanced split"), "NO_SMOTE");
    env(app->add_flag("--quiet", o.quiet, "Suppress the epoch trace"), "QUIET");
    return f;
}

PipelineConfig pipeline_config(const Options& o, const PipelineFlags& f) {
    auto cfg = o.stm ? PipelineConfig::sparse_preset() : PipelineConfig::standard_preset();
    if (*f.clauses) cfg.machine.clauses_per_class = o.clauses;
    if (*f.threshold) cfg.machine.threshold = o.threshold;
    if (*f.specificity) cfg.machine.specificity = o.specificity;
    if (*f.state_depth) cfg.machine.state_depth = o.state_depth;
    if (*f.max_literals) {
        cfg.machine.sparse = true;
        cfg.machine.max_included_literals = o.max_literals;
    }
    if (*f.bins) cfg.n_bins = o.bins;
    if (*f.epochs) cfg.machine.epochs = o.epochs;
    cfg.train_fraction = o.train_fraction;
    cfg.k_neighbors = o.k_neighbors;
    cfg.balance = !o.no_smote;
    cfg.seed = o.seed;
    cfg.validate();
    return cfg;
}

fs::path output_dir(const std::string& dir) {
    fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create output directory '" + p.string() + "': " + ec.message());
    return p;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path.string(), j.dump(2) + "\n"); }

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

FlowSchema schema_for(const ModelBundle& model) {
    auto schema = FlowSchema::medsec();
    schema.class_names = model.class_names;
    return schema;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

bool at_eof(std::istream& in) { return in.peek() == std::char_traits<char>::eof(); }

int cmd_gen(const Options& o, std::ostream& out) {
    if (o.classes < 2 || o.classes > static_cast<int>(kPhaseNames.size()))
        throw ConfigError("--classes must lie in [2, " + std::to_string(kPhaseNames.size()) + "]");
    if (o.rows_per_class < 2) throw ConfigError("--rows must be >= 2");
    if (o.out.empty()) throw ConfigError("gen requires --out");
    const auto schema = FlowSchema::medsec();
    const auto table = gen_synthetic(o.rows_per_class, separated_profiles(o.classes, schema.model_features().size(), o.separation),
                                     o.seed);
    write_file_atomic(o.out, [&](std::ostream& f) { write_csv(table, schema, f); });
    out << json{{"rows", table.rows()}, {"classes", o.classes}, {"out", o.out}}.dump() << '\n';
    return kExitOk;
}

int cmd_train(const Options& o, const PipelineFlags& flags, std::ostream& out) {
    auto cfg = pipeline_config(o, flags);
    const auto raw = load_csv(o.data, FlowSchema::medsec());
    cfg.machine.num_classes = raw.num_classes();
    const int epochs = cfg.machine.epochs;
    auto result = run_pipeline(raw, cfg, [&](int epoch, double train_acc, double test_acc) {
        if (!o.quiet)
            out << "epoch " << epoch << '/' << epochs << " train_accuracy " << fmt(train_acc) << " test_accuracy "
                << fmt(test_acc) << '\n'
                << std::flush;
    });
    const auto dir = output_dir(o.out);
    const auto& names = result.model.class_names;
    save_model(result.model, (dir / "model.tmm").string());
    if (o.export_json) write_json(dir / "model.json", model_to_json(result.model));
    write_json(dir / "clean_report.json", to_json(result.clean));
    write_json(dir / "balance_report.json", to_json(result.balance, names));
    write_json(dir / "train_report.json", to_json(result.train));
    write_json(dir / "metrics.json", to_json(result.metrics, names));
    write_file_atomic((dir / "metrics.csv").string(),
                      [&](std::ostream& f) { write_metrics_csv(result.metrics, names, f); });
    out << json{{"model", (dir / "model.tmm").string()},
                {"accuracy", result.metrics.accuracy},
                {"weighted_f1", result.metrics.weighted.f1},
                {"macro_f1", result.metrics.macro.f1}}
               .dump()
        << '\n';
    return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
    const auto model = load_model(o.model);
    const auto schema = schema_for(model);
    auto in = open_input(o.data);
    const auto& names = model.class_names;
    std::size_t written = 0, quarantined = 0;
    auto stream = [&](std::ostream& dst) {
        dst << "row,source_row,predicted,predicted_name";
        for (const auto& n : names) dst << ',' << csv::escape("votes_" + n);
        dst << '\n';
        if (at_eof(in)) return;
        FlowCsvReader reader(in, schema, model.preprocessor.feature_names(), false);
        FlowCsvReader::Row row;
        while (reader.next(row)) {
            const auto scores = model.machine.predict(model.preprocessor.literals(row.features));
            dst << written << ',' << row.source_row << ',' << scores.predicted << ','
                << csv::escape(names[static_cast<std::size_t>(scores.predicted)]);
            for (int v : scores.scores) dst << ',' << v;
            dst << '\n';
            ++written;
        }
        quarantined = reader.quarantined();
    };
    if (o.out.empty()) {
        stream(out);
    } else {
        write_file_atomic(o.out, stream);
        out << json{{"rows", written}, {"quarantined", quarantined}, {"out", o.out}}.dump() << '\n';
    }
    return kExitOk;
}

int cmd_explain(const Options& o, std::ostream& out) {
    if (o.rows.empty()) throw ConfigError("explain requires --rows");
    const auto model = load_model(o.model);
    const auto schema = schema_for(model);
    auto in = open_input(o.data);
    const auto layout = model.preprocessor.layout();

    // Collect the requested rows (indices count accepted rows, as in predict).
    std::vector<std::size_t> wanted = o.rows;
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
    std::map<std::size_t, FlowCsvReader::Row> picked;
    std::vector<LiteralVector> reference;
    std::size_t seen = 0;
    if (!at_eof(in)) {
        FlowCsvReader reader(in, schema, model.preprocessor.feature_names(), false);
        FlowCsvReader::Row row;
        while (reader.next(row)) {
            if (std::binary_search(wanted.begin(), wanted.end(), seen)) picked.emplace(seen, row);
            if (o.top_rules > 0) reference.push_back(model.preprocessor.literals(row.features));
            ++seen;
        }
    }
    for (auto idx : wanted) {
        if (!picked.count(idx))
            throw InputError("row index " + std::to_string(idx) + " out of range (input has " + std::to_string(seen) +
                             " rows)");
    }

    const auto dir = output_dir(o.out);
    json files = json::array();
    for (auto idx : wanted) {
        const auto& row = picked.at(idx);
        const auto e = explain(model.machine, model.preprocessor.literals(row.features), layout, model.class_names,
                               row.identifiers.empty() || row.identifiers[0].empty() ? std::to_string(idx)
                                                                                     : row.identifiers[0]);
        const auto stem = "row" + std::to_string(idx);
        const auto votes = (dir / (stem + "_votes.csv")).string();
        const auto acts = (dir / (stem + "_activations.csv")).string();
        const auto contrib = (dir / (stem + "_contributions.csv")).string();
        export_explanation(e, ExportFormat::Csv, votes, ExplanationArtifact::Votes);
        export_explanation(e, ExportFormat::Csv, acts, ExplanationArtifact::Activations);
        export_explanation(e, ExportFormat::Csv, contrib, ExplanationArtifact::Contributions);
        json entry = {{"row", idx},
                      {"predicted", e.predicted},
                      {"predicted_name", model.class_names[static_cast<std::size_t>(e.predicted)]},
                      {"votes", e.class_votes},
                      {"files", {votes, acts, contrib}}};
        if (o.export_json) {
            const auto path = (dir / (stem + "_explanation.json")).string();
            export_explanation(e, ExportFormat::Json, path);
            entry["files"].push_back(path);
        }
        files.push_back(std::move(entry));
    }
    if (o.top_rules > 0) {
        const auto rules = render_rules(model.machine, layout, model.class_names, o.top_rules, reference);
        write_file_atomic((dir / "rules.txt").string(), [&](std::ostream& f) {
            for (const auto& r : rules) f << r.firing_count << '\t' << r.text << '\n';
        });
    }
    out << json{{"explained", files}}.dump() << '\n';
    return kExitOk;
}

int cmd_cv(const Options& o, const PipelineFlags& flags, std::ostream& out) {
    auto cfg = pipeline_config(o, flags);
    const auto raw = load_csv(o.data, FlowSchema::medsec());
    cfg.machine.num_classes = raw.num_classes();
    auto [cleaned, clean_report] = clean(raw);
    const auto report = kfold(cleaned, o.folds, cfg, o.seed);
    auto j = to_json(report);
    j["clean"] = to_json(clean_report);
    if (!o.out.empty()) write_json(output_dir(o.out) / "cv_report.json", j);
    if (!o.quiet) {
        for (std::size_t f = 0; f < report.folds.size(); ++f)
            out << "fold " << f + 1 << '/' << report.k << " weighted_f1 " << fmt(report.folds[f].weighted.f1) << '\n';
    }
    out << json{{"weighted_precision", {report.weighted_precision.mean, report.weighted_precision.std}},
                {"weighted_recall", {report.weighted_recall.mean, report.weighted_recall.std}},
                {"weighted_f1", {report.weighted_f1.mean, report.weighted_f1.std}}}
               .dump()
        << '\n';
    return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
    const auto model = load_model(o.model);
    auto in = open_input(o.data);
    Matrix samples(0, model.preprocessor.feature_names().size());
    if (!at_eof(in)) {
        FlowCsvReader reader(in, schema_for(model), model.preprocessor.feature_names(), false);
        FlowCsvReader::Row row;
        while (reader.next(row)) samples.append_row(row.features);
    }
    BenchOptions opts;
    opts.warmup = o.warmup;
    opts.iters = o.iters;
    opts.include_binarization = o.include_binarization;
    const auto report = bench(model, samples, opts);
    const auto j = to_json(report);
    if (!o.out.empty()) {
        const auto dir = output_dir(o.out);
        write_json(dir / "bench_report.json", j);
        write_file_atomic((dir / "bench_report.csv").string(), [&](std::ostream& f) { write_bench_csv(report, f); });
    }
    out << j.dump() << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tsetlin Machine intrusion detection for IoMT flow records", "tmids"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("gen", "Generate a synthetic labelled flow CSV");
    env(gen->add_option("--out", o.out, "Output CSV path")->required(), "OUT");
    env(gen->add_option("--rows", o.rows_per_class, "Rows per class"), "ROWS");
    env(gen->add_option("--classes", o.classes, "Number of classes"), "CLASSES");
    env(gen->add_option("--separation", o.separation, "Class mean separation in standard deviations"), "SEPARATION");
    env(gen->add_option("--seed", o.seed, "Generator seed"), "SEED");

    auto* train = app.add_subcommand("train", "Clean, split, balance, binarize, train and evaluate");
    const auto train_flags = add_pipeline_options(train, o);
    env(train->add_option("--out", o.out, "Output directory"), "OUT");
    env(train->add_flag("--export-json", o.export_json, "Also write the model as JSON"), "EXPORT_JSON");

    auto* predict = app.add_subcommand("predict", "Classify flow records with a trained model");
    env(predict->add_option("--model", o.model, "Model file")->required(), "MODEL");
    env(predict->add_option("--data", o.data, "Flow CSV")->required(), "DATA");
    env(predict->add_option("--out", o.out, "Predictions CSV (stdout when omitted)"), "OUT");

    auto* explain_cmd = app.add_subcommand("explain", "Export votes, clause activations and feature contributions");
    env(explain_cmd->add_option("--model", o.model, "Model file")->required(), "MODEL");
    env(explain_cmd->add_option("--data", o.data, "Flow CSV")->required(), "DATA");
    explain_cmd->add_option("--rows", o.rows, "Row indices to explain (0-based, as in predict output)")
        ->required()
        ->delimiter(',');
    env(explain_cmd->add_option("--out", o.out, "Output directory"), "OUT");
    explain_cmd->add_option("--top-rules", o.top_rules, "Also write the N most frequently firing rules per class");
    explain_cmd->add_flag("--export-json", o.export_json, "Also write each explanation as JSON");

    auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
    const auto cv_flags = add_pipeline_options(cv, o);
    env(cv->add_option("--folds", o.folds, "Number of folds"), "FOLDS");
    env(cv->add_option("--out", o.out, "Output directory for cv_report.json"), "OUT");

    auto* bench_cmd = app.add_subcommand("bench", "Measure single-sample inference latency");
    env(bench_cmd->add_option("--model", o.model, "Model file")->required(), "MODEL");
    env(bench_cmd->add_option("--data", o.data, "Flow CSV with sample rows")->required(), "DATA");
    env(bench_cmd->add_option("--warmup", o.warmup, "Untimed warmup predictions"), "WARMUP");
    env(bench_cmd->add_option("--iters", o.iters, "Timed predictions"), "ITERS");
    env(bench_cmd->add_flag("--include-binarization", o.include_binarization, "Also time the feature transform"),
        "INCLUDE_BINARIZATION");
    env(bench_cmd->add_option("--out", o.out, "Output directory for bench_report.json/csv"), "OUT");

    std::vector<const char*> argv{"tmids"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report_error(err, "config", e.what(), kExitConfig);
        return kExitConfig;
    }

    try {
        if (*gen) return cmd_gen(o, out);
        if (*train) return cmd_train(o, train_flags, out);
        if (*predict) return cmd_predict(o, out);
        if (*explain_cmd) return cmd_explain(o, out);
        if (*cv) return cmd_cv(o, cv_flags, out);
        if (*bench_cmd) return cmd_bench(o, out);
    } catch (const Error& e) {
        const int code = exit_code_for(e.kind());
        report_error(err, to_string(e.kind()), e.what(), code);
        return code;
    } catch (const json::exception& e) {
        report_error(err, "schema", e.what(), kExitModel);
        return kExitModel;
    } catch (const std::bad_alloc&) {
        report_error(err, "resource", "out of memory", kExitModel);
        return kExitModel;
    }
    return kExitConfig;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace tmids
