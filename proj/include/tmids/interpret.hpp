#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "tmids/binarize.hpp"
#include "tmids/machine.hpp"

namespace tmids {

/// Per-sample decision record: class votes, the class x clause activation
/// matrix (clauses in heatmap order: positive polarity first, then negative),
/// and signed per-feature contributions toward the predicted class.
struct Explanation {
    std::string sample_id;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;
    std::vector<int> class_votes;
    std::vector<std::vector<std::uint8_t>> clause_activations;
    std::vector<int> clause_polarity;  // polarity per heatmap column
    int predicted = 0;
    int contribution_class = 0;
    std::vector<double> feature_contributions;

    bool operator==(const Explanation&) const = default;
};

/// Throws StructuralError if the layout width does not match the model.
Explanation explain(const TsetlinMachine& model, const LiteralVector& lits, const FeatureLayout& layout,
                    std::vector<std::string> class_names = {}, std::string sample_id = {});

/// Every firing clause of `target_class` splits its vote (+1 or -1) equally
/// across its included literals; each share is credited to the model feature
/// the literal's bit belongs to.
std::vector<double> contribution_vector(const TsetlinMachine& model, const LiteralVector& lits, int target_class,
                                        const FeatureLayout& layout);

struct Rule {
    int class_id = 0;
    int clause = 0;
    int polarity = 1;
    std::size_t firing_count = 0;
    std::size_t literal_count = 0;
    std::string text;
};

/// Text form of one clause, e.g.
/// "IF Flow Duration ∈ bin[12,13) AND NOT SYN Flag Cnt ∈ bin[0,1) THEN vote +1 for Reconnaissance".
std::string rule_text(const Clause& clause, const FeatureLayout& layout, std::span<const std::string> class_names);

/// Up to top_k non-empty clauses per class, ordered by how often they fire on
/// `reference` (ties by clause index).
std::vector<Rule> render_rules(const TsetlinMachine& model, const FeatureLayout& layout,
                               std::span<const std::string> class_names, std::size_t top_k,
                               std::span<const LiteralVector> reference = {});

enum class ExplanationArtifact { Votes, Activations, Contributions, All };
enum class ExportFormat { Csv, Json };

/// Long-form CSV: artifact,class,item,name,value.
void write_explanation_csv(const Explanation& e, ExplanationArtifact artifact, std::ostream& out);
nlohmann::json explanation_to_json(const Explanation& e);
Explanation explanation_from_json(const nlohmann::json& j);

/// Atomic export to a file. Throws IoError when the path is not writable.
void export_explanation(const Explanation& e, ExportFormat format, const std::string& path,
                        ExplanationArtifact artifact = ExplanationArtifact::All);

}  // namespace tmids
