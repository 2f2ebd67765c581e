#include "tmids/interpret.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "tmids/csv.hpp"
#include "tmids/error.hpp"
#include "tmids/fsutil.hpp"

namespace tmids {

namespace {

void check_layout(const TsetlinMachine& model, const FeatureLayout& layout) {
    if (layout.bit_count() != model.feature_count())
        throw StructuralError("layout describes " + std::to_string(layout.bit_count()) + " bits, model has " +
                              std::to_string(model.feature_count()));
}

std::string class_label(std::span<const std::string> names, int c) {
    if (c >= 0 && static_cast<std::size_t>(c) < names.size()) return names[static_cast<std::size_t>(c)];
    return "class " + std::to_string(c);
}

}  // namespace

std::vector<double> contribution_vector(const TsetlinMachine& model, const LiteralVector& lits, int target_class,
                                        const FeatureLayout& layout) {
    check_layout(model, layout);
    if (target_class < 0 || target_class >= model.num_classes()) throw InputError("contribution: class out of range");
    std::vector<double> contrib(layout.feature_count(), 0.0);
    std::vector<std::uint8_t> fired(static_cast<std::size_t>(model.clauses_per_class()));
    model.clause_outputs(target_class, lits, EvalMode::Infer, fired);
    for (int j = 0; j < model.clauses_per_class(); ++j) {
        if (!fired[static_cast<std::size_t>(j)]) continue;
        const auto clause = model.clause(target_class, j);
        const double share = static_cast<double>(clause.polarity) / static_cast<double>(clause.included.size());
        for (auto k : clause.included) contrib[layout.feature_of_bit(layout.bit_of_literal(k))] += share;
    }
    return contrib;
}

Explanation explain(const TsetlinMachine& model, const LiteralVector& lits, const FeatureLayout& layout,
                    std::vector<std::string> class_names, std::string sample_id) {
    check_layout(model, layout);
    Explanation e;
    e.sample_id = std::move(sample_id);
    e.class_names = std::move(class_names);
    e.feature_names.assign(layout.names().begin(), layout.names().end());
    const auto m = static_cast<std::size_t>(model.clauses_per_class());
    const int T = model.config().threshold;
    for (int c = 0; c < model.num_classes(); ++c) {
        std::vector<std::uint8_t> row(m);
        const int raw = model.clause_outputs(c, lits, EvalMode::Infer, row);
        e.class_votes.push_back(std::clamp(raw, -T, T));
        e.clause_activations.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < m; ++j) e.clause_polarity.push_back(model.polarity(static_cast<int>(j)));
    e.predicted = tie_broken_argmax(e.class_votes);
    e.contribution_class = e.predicted;
    e.feature_contributions = contribution_vector(model, lits, e.predicted, layout);
    return e;
}

std::string rule_text(const Clause& clause, const FeatureLayout& layout, std::span<const std::string> class_names) {
    std::string text = "IF ";
    for (std::size_t i = 0; i < clause.included.size(); ++i) {
        const auto k = clause.included[i];
        const auto bit = layout.bit_of_literal(k);
        const int bin = layout.bin_of_bit(bit);
        if (i) text += " AND ";
        if (layout.is_negated(k)) text += "NOT ";
        text += layout.name(layout.feature_of_bit(bit)) + " ∈ bin[" + std::to_string(bin) + "," +
                std::to_string(bin + 1) + ")";
    }
    text += std::string(" THEN vote ") + (clause.polarity > 0 ? "+1" : "-1") + " for " +
            class_label(class_names, clause.class_id);
    return text;
}

std::vector<Rule> render_rules(const TsetlinMachine& model, const FeatureLayout& layout,
                               std::span<const std::string> class_names, std::size_t top_k,
                               std::span<const LiteralVector> reference) {
    check_layout(model, layout);
    std::vector<Rule> rules;
    const auto m = static_cast<std::size_t>(model.clauses_per_class());
    std::vector<std::uint8_t> fired(m);
    for (int c = 0; c < model.num_classes(); ++c) {
        std::vector<std::size_t> freq(m, 0);
        for (const auto& lits : reference) {
            model.clause_outputs(c, lits, EvalMode::Infer, fired);
            for (std::size_t j = 0; j < m; ++j) freq[j] += fired[j];
        }
        std::vector<std::size_t> order;
        for (std::size_t j = 0; j < m; ++j) {
            if (model.included_count(c, static_cast<int>(j)) > 0) order.push_back(j);
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return freq[a] > freq[b]; });
        if (order.size() > top_k) order.resize(top_k);
        for (auto j : order) {
            const auto clause = model.clause(c, static_cast<int>(j));
            Rule r;
            r.class_id = c;
            r.clause = static_cast<int>(j);
            r.polarity = clause.polarity;
            r.firing_count = freq[j];
            r.literal_count = clause.included.size();
            r.text = rule_text(clause, layout, class_names);
            rules.push_back(std::move(r));
        }
    }
    return rules;
}

void write_explanation_csv(const Explanation& e, ExplanationArtifact artifact, std::ostream& out) {
    out << "artifact,class,item,name,value\n";
    const bool all = artifact == ExplanationArtifact::All;
    if (all || artifact == ExplanationArtifact::Votes) {
        for (std::size_t c = 0; c < e.class_votes.size(); ++c)
            out << "vote," << c << ',' << c << ',' << csv::escape(class_label(e.class_names, static_cast<int>(c))) << ','
                << e.class_votes[c] << '\n';
    }
    if (all || artifact == ExplanationArtifact::Activations) {
        for (std::size_t c = 0; c < e.clause_activations.size(); ++c) {
            for (std::size_t j = 0; j < e.clause_activations[c].size(); ++j)
                out << "activation," << c << ',' << j << ',' << (e.clause_polarity[j] > 0 ? "+" : "-") << ','
                    << static_cast<int>(e.clause_activations[c][j]) << '\n';
        }
    }
    if (all || artifact == ExplanationArtifact::Contributions) {
        for (std::size_t f = 0; f < e.feature_contributions.size(); ++f) {
            const std::string name = f < e.feature_names.size() ? e.feature_names[f] : std::to_string(f);
            out << "contribution," << e.contribution_class << ',' << f << ',' << csv::escape(name) << ','
                << csv::format_double(e.feature_contributions[f]) << '\n';
        }
    }
}

nlohmann::json explanation_to_json(const Explanation& e) {
    return {{"sample_id", e.sample_id},
            {"predicted", e.predicted},
            {"class_names", e.class_names},
            {"class_votes", e.class_votes},
            {"clause_polarity", e.clause_polarity},
            {"clause_activations", e.clause_activations},
            {"contribution_class", e.contribution_class},
            {"feature_names", e.feature_names},
            {"feature_contributions", e.feature_contributions}};
}

Explanation explanation_from_json(const nlohmann::json& j) {
    Explanation e;
    e.sample_id = j.at("sample_id").get<std::string>();
    e.predicted = j.at("predicted").get<int>();
    e.class_names = j.at("class_names").get<std::vector<std::string>>();
    e.class_votes = j.at("class_votes").get<std::vector<int>>();
    e.clause_polarity = j.at("clause_polarity").get<std::vector<int>>();
    e.clause_activations = j.at("clause_activations").get<std::vector<std::vector<std::uint8_t>>>();
    e.contribution_class = j.at("contribution_class").get<int>();
    e.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    e.feature_contributions = j.at("feature_contributions").get<std::vector<double>>();
    return e;
}

void export_explanation(const Explanation& e, ExportFormat format, const std::string& path,
                        ExplanationArtifact artifact) {
    write_file_atomic(path, [&](std::ostream& out) {
        if (format == ExportFormat::Csv)
            write_explanation_csv(e, artifact, out);
        else
            out << explanation_to_json(e).dump(2) << '\n';
    });
}

}  // namespace tmids
