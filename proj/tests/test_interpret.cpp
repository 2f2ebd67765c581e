#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tmids/error.hpp"
#include "tmids/interpret.hpp"
#include "tmids/model_io.hpp"
#include "tmids/pipeline.hpp"
#include "test_util.hpp"

using namespace tmids;

namespace {

struct Trained {
    ModelBundle model;
    std::vector<LiteralVector> samples;
};

// Small but genuinely trained model on synthetic flows.
const Trained& trained() {
    static const Trained t = [] {
        const auto raw = gen_synthetic(40, separated_profiles(5, 79, 6.0), 12);
        PipelineConfig cfg;
        cfg.n_bins = 8;
        cfg.machine.clauses_per_class = 40;
        cfg.machine.threshold = 15;
        cfg.machine.specificity = 5.0;
        cfg.machine.epochs = 4;
        auto result = run_pipeline(raw, cfg);
        Trained out{std::move(result.model), {}};
        for (std::size_t i = 0; i < raw.rows(); ++i) out.samples.push_back(out.model.preprocessor.literals(raw.features.row(i)));
        return out;
    }();
    return t;
}

TsetlinMachine mirrored(const TsetlinMachine& tm) {
    TsetlinMachine out = tm;
    const int half = tm.clauses_per_class() / 2;
    for (int c = 0; c < tm.num_classes(); ++c) {
        for (int j = 0; j < half; ++j) {
            for (std::size_t k = 0; k < tm.literal_count(); ++k) {
                out.set_state(c, j, k, tm.state(c, j + half, k));
                out.set_state(c, j + half, k, tm.state(c, j, k));
            }
        }
    }
    return out;
}

MachineConfig tiny_config() {
    MachineConfig cfg;
    cfg.num_classes = 2;
    cfg.clauses_per_class = 4;
    cfg.threshold = 2;
    cfg.state_depth = 4;
    return cfg;
}

}  // namespace

TEST_SUITE("interpret") {

TEST_CASE("single firing positive clause splits its vote over two features") {
    const FeatureLayout layout({"A", "B", "C"}, 2);  // 6 bits
    TsetlinMachine tm(tiny_config(), 6);
    tm.set_state(0, 0, 0, 5);  // A bin 0
    tm.set_state(0, 0, 3, 5);  // B bin 1
    const std::vector<std::uint8_t> bits{1, 0, 0, 1, 1, 0};
    const auto lits = binarized(bits);
    const auto contrib = contribution_vector(tm, lits, 0, layout);
    CHECK(contrib == std::vector<double>{0.5, 0.5, 0.0});
    const auto e = explain(tm, lits, layout, {"x", "y"}, "s1");
    CHECK(e.class_votes == std::vector<int>{1, 0});
    CHECK(e.predicted == 0);
    CHECK(e.feature_contributions == contrib);
    CHECK(e.clause_activations[0] == std::vector<std::uint8_t>{1, 0, 0, 0});
}

TEST_CASE("negated literals credit their feature") {
    const FeatureLayout layout({"A", "B"}, 2);
    TsetlinMachine tm(tiny_config(), 4);
    tm.set_state(1, 2, 4 + 2, 5);  // NOT B bin 0, negative clause of class 1
    const std::vector<std::uint8_t> bits{1, 0, 0, 1};
    const auto contrib = contribution_vector(tm, binarized(bits), 1, layout);
    CHECK(contrib == std::vector<double>{0.0, -1.0});
}

TEST_CASE("untrained model explains to zeros") {
    const FeatureLayout layout({"A", "B"}, 2);
    TsetlinMachine tm(tiny_config(), 4);
    const std::vector<std::uint8_t> bits{1, 0, 0, 1};
    const auto e = explain(tm, binarized(bits), layout);
    CHECK(e.class_votes == std::vector<int>{0, 0});
    for (const auto& row : e.clause_activations) CHECK(std::count(row.begin(), row.end(), 1) == 0);
    CHECK(e.feature_contributions == std::vector<double>{0.0, 0.0});
    CHECK(render_rules(tm, layout, {}, 5).empty());
}

TEST_CASE("layout mismatch is structural") {
    const FeatureLayout layout({"A"}, 2);
    TsetlinMachine tm(tiny_config(), 4);
    const std::vector<std::uint8_t> bits{1, 0, 0, 1};
    CHECK_THROWS_AS(explain(tm, binarized(bits), layout), StructuralError);
    CHECK_THROWS_AS(contribution_vector(tm, binarized(bits), 0, FeatureLayout({"A", "B", "C"}, 2)), StructuralError);
    CHECK_THROWS_AS(contribution_vector(tm, binarized(bits), 2, FeatureLayout({"A", "B"}, 2)), InputError);
}

TEST_CASE("votes and activations agree with the machine on a trained model") {
    const auto& t = trained();
    const auto& tm = t.model.machine;
    const auto layout = t.model.preprocessor.layout();
    const int T = tm.config().threshold;
    for (const auto& lits : t.samples) {
        const auto e = explain(tm, lits, layout, t.model.class_names);
        const auto p = tm.predict(lits);
        CHECK(e.class_votes == p.scores);
        CHECK(e.predicted == p.predicted);
        REQUIRE(e.clause_activations.size() == static_cast<std::size_t>(tm.num_classes()));
        for (int c = 0; c < tm.num_classes(); ++c) {
            const auto& row = e.clause_activations[static_cast<std::size_t>(c)];
            REQUIRE(row.size() == static_cast<std::size_t>(tm.clauses_per_class()));
            int raw = 0;
            for (std::size_t j = 0; j < row.size(); ++j) raw += e.clause_polarity[j] * row[j];
            CHECK(raw == tm.raw_class_sum(c, lits, EvalMode::Infer));
            CHECK(std::clamp(raw, -T, T) == e.class_votes[static_cast<std::size_t>(c)]);
        }
        const double total = std::accumulate(e.feature_contributions.begin(), e.feature_contributions.end(), 0.0);
        CHECK(total == doctest::Approx(tm.raw_class_sum(e.predicted, lits, EvalMode::Infer)));
    }
}

TEST_CASE("mirrored model negates contributions") {
    const auto& t = trained();
    const auto flipped = mirrored(t.model.machine);
    const auto layout = t.model.preprocessor.layout();
    for (std::size_t i = 0; i < t.samples.size(); i += 7) {
        for (int c = 0; c < flipped.num_classes(); ++c) {
            const auto a = contribution_vector(t.model.machine, t.samples[i], c, layout);
            const auto b = contribution_vector(flipped, t.samples[i], c, layout);
            for (std::size_t f = 0; f < a.size(); ++f) CHECK(b[f] == doctest::Approx(-a[f]));
        }
    }
}

TEST_CASE("features only in firing negative clauses contribute negatively") {
    const auto& t = trained();
    const auto& tm = t.model.machine;
    const auto layout = t.model.preprocessor.layout();
    std::size_t checked = 0;
    for (std::size_t i = 0; i < t.samples.size(); i += 3) {
        for (int c = 0; c < tm.num_classes(); ++c) {
            std::vector<int> in_pos(layout.feature_count(), 0), in_neg(layout.feature_count(), 0);
            for (int j = 0; j < tm.clauses_per_class(); ++j) {
                if (!tm.clause_output(c, j, t.samples[i], EvalMode::Infer)) continue;
                for (auto k : tm.clause(c, j).included) {
                    const auto f = layout.feature_of_bit(layout.bit_of_literal(k));
                    (tm.polarity(j) > 0 ? in_pos : in_neg)[f] = 1;
                }
            }
            const auto contrib = contribution_vector(tm, t.samples[i], c, layout);
            for (std::size_t f = 0; f < contrib.size(); ++f) {
                if (in_neg[f] && !in_pos[f]) {
                    CHECK(contrib[f] < 0.0);
                    ++checked;
                }
                if (!in_neg[f] && !in_pos[f]) CHECK(contrib[f] == 0.0);
            }
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("rule text") {
    const FeatureLayout layout({"Flow Duration", "SYN Flag Cnt"}, 2);
    TsetlinMachine tm(tiny_config(), 4);
    tm.set_state(0, 0, 0, 5);      // Flow Duration bin 0
    tm.set_state(0, 0, 4 + 2, 5);  // NOT SYN Flag Cnt bin 0
    const std::vector<std::string> names{"Benign", "Reconnaissance"};
    const auto text = rule_text(tm.clause(0, 0), layout, names);
    CHECK(text == "IF Flow Duration ∈ bin[0,1) AND NOT SYN Flag Cnt ∈ bin[0,1) THEN vote +1 for Benign");
    tm.set_state(1, 3, 1, 5);
    CHECK(rule_text(tm.clause(1, 3), layout, names) == "IF Flow Duration ∈ bin[1,2) THEN vote -1 for Reconnaissance");
}

TEST_CASE("rendered rules are ordered by firing frequency and list every literal") {
    const auto& t = trained();
    const auto layout = t.model.preprocessor.layout();
    const auto rules = render_rules(t.model.machine, layout, t.model.class_names, 3, t.samples);
    CHECK(rules.size() <= 15);
    CHECK_FALSE(rules.empty());
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& r = rules[i];
        CHECK(r.literal_count == t.model.machine.included_count(r.class_id, r.clause));
        std::size_t conjuncts = 1, pos = 0;
        while ((pos = r.text.find(" AND ", pos)) != std::string::npos) {
            ++conjuncts;
            pos += 5;
        }
        CHECK(conjuncts == r.literal_count);
        CHECK(r.text.rfind("IF ", 0) == 0);
        if (i > 0 && rules[i - 1].class_id == r.class_id) CHECK(rules[i - 1].firing_count >= r.firing_count);
    }
}

TEST_CASE("csv export row counts and JSON round trip") {
    const auto& t = trained();
    const auto e = explain(t.model.machine, t.samples[0], t.model.preprocessor.layout(), t.model.class_names, "row0");
    auto count_rows = [&](ExplanationArtifact a) {
        std::ostringstream out;
        write_explanation_csv(e, a, out);
        const auto s = out.str();
        return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) - 1;
    };
    CHECK(count_rows(ExplanationArtifact::Votes) == 5);
    CHECK(count_rows(ExplanationArtifact::Activations) == 5 * 40);
    CHECK(count_rows(ExplanationArtifact::Contributions) == 79);
    CHECK(count_rows(ExplanationArtifact::All) == 5 + 200 + 79);
    CHECK(explanation_from_json(nlohmann::json::parse(explanation_to_json(e).dump())) == e);

    test::TempDir dir("explain");
    export_explanation(e, ExportFormat::Json, dir.file("e.json"));
    std::ifstream in(dir.file("e.json"));
    CHECK(explanation_from_json(nlohmann::json::parse(in)) == e);
    CHECK_THROWS_AS(export_explanation(e, ExportFormat::Csv, dir.file("missing/e.csv")), IoError);
}

TEST_CASE("model file round trip") {
    const auto& t = trained();
    test::TempDir dir("model");
    const auto path = dir.file("m.tmm");
    save_model(t.model, path);
    const auto back = load_model(path);
    CHECK(back.machine == t.model.machine);
    CHECK(back.preprocessor == t.model.preprocessor);
    CHECK(back.class_names == t.model.class_names);
    CHECK(serialize_model(back) == serialize_model(t.model));

    const auto j = model_to_json(t.model);
    const auto from_json = model_from_json(nlohmann::json::parse(j.dump()));
    CHECK(from_json.machine == t.model.machine);
    CHECK(from_json.preprocessor == t.model.preprocessor);
}

TEST_CASE("corrupt model files are rejected") {
    const auto bytes = serialize_model(trained().model);
    auto load = [](const std::string& b) {
        std::istringstream in(b);
        return read_model(in);
    };
    CHECK_THROWS_AS(load(bytes.substr(0, bytes.size() / 2)), StructuralError);
    CHECK_THROWS_AS(load(bytes.substr(0, bytes.size() - 1)), StructuralError);
    CHECK_THROWS_AS(load("not a model at all"), StructuralError);
    auto wrong_version = bytes;
    wrong_version[8] = 9;
    CHECK_THROWS_AS(load(wrong_version), StructuralError);
    CHECK_THROWS_AS(load_model("/nonexistent/m.tmm"), IoError);

    auto bundle = trained().model;
    bundle.class_names.pop_back();
    CHECK_THROWS_AS(bundle.validate(), StructuralError);
}

}  // TEST_SUITE
