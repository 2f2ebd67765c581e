#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "tmids/literals.hpp"
#include "tmids/rng.hpp"

namespace tmids {

/// Training mode lets empty clauses fire so they can receive feedback; during
/// inference an empty clause outputs 0 and never votes.
enum class EvalMode { Train, Infer };

struct MachineConfig {
    int num_classes = 5;
    int clauses_per_class = 2000;  // split evenly: first half +1, second half -1
    int threshold = 30;            // T
    double specificity = 15.0;     // s
    int state_depth = 128;         // N; automaton states run 1..2N, include iff > N
    bool sparse = false;
    int max_included_literals = 16;  // only enforced when sparse
    int epochs = 45;
    std::uint64_t rng_seed = 42;

    /// Throws ConfigError on any violated constraint.
    void validate() const;

    /// Standard machine settings used for the flow classifier.
    static MachineConfig standard_preset();
    /// Sparse machine settings (1500 clauses, s=20, cap 16, 50 epochs).
    static MachineConfig sparse_preset();

    bool operator==(const MachineConfig&) const = default;
};

/// Largest supported automaton depth; states are stored one byte each.
inline constexpr int kMaxStateDepth = 128;

/// A clause as a literal index set. Literal k < n is feature bit k; literal
/// n + k is its negation.
struct Clause {
    std::vector<std::uint32_t> included;
    int polarity = 1;
    int class_id = 0;
};

/// Evaluates a clause given as an index set. Throws StructuralError if an
/// index is outside the literal vector.
bool eval_clause(const Clause& clause, const LiteralVector& lits, EvalMode mode);

struct ClassScores {
    std::vector<int> scores;  // clamped to [-T, T]
    int predicted = 0;
};

/// Index of the maximum score; ties resolve to the lowest index.
int tie_broken_argmax(std::span<const int> scores);

struct LabeledLiterals {
    std::vector<LiteralVector> samples;
    std::vector<int> labels;

    std::size_t size() const noexcept { return samples.size(); }
};

struct TrainReport {
    std::vector<double> train_accuracy;  // one entry per epoch
    std::vector<double> test_accuracy;   // empty when no evaluation set was given
};

class TsetlinMachine {
public:
    TsetlinMachine(MachineConfig config, std::size_t feature_count);

    const MachineConfig& config() const noexcept { return config_; }
    std::size_t feature_count() const noexcept { return n_; }
    std::size_t literal_count() const noexcept { return 2 * n_; }
    int num_classes() const noexcept { return config_.num_classes; }
    int clauses_per_class() const noexcept { return config_.clauses_per_class; }

    int polarity(int clause) const noexcept { return clause < config_.clauses_per_class / 2 ? 1 : -1; }

    /// Automaton state in [1, 2N].
    int state(int class_id, int clause, std::size_t literal) const;
    /// Overwrites one automaton; keeps the include mask consistent. Does not
    /// enforce the sparse cap (see validate_sparsity).
    void set_state(int class_id, int clause, std::size_t literal, int state);

    bool included(int class_id, int clause, std::size_t literal) const;
    std::size_t included_count(int class_id, int clause) const;
    Clause clause(int class_id, int clause) const;

    bool clause_output(int class_id, int clause, const LiteralVector& lits, EvalMode mode) const;
    /// Writes one 0/1 output per clause of the class; returns the unclamped vote sum.
    int clause_outputs(int class_id, const LiteralVector& lits, EvalMode mode, std::span<std::uint8_t> out) const;
    int raw_class_sum(int class_id, const LiteralVector& lits, EvalMode mode) const;
    int class_sum(int class_id, const LiteralVector& lits, EvalMode mode) const;
    ClassScores predict(const LiteralVector& lits) const;

    /// One learning step: Type I feedback to the true class, Type II style
    /// feedback to one uniformly drawn other class.
    void fit_sample(const LiteralVector& lits, int true_class, Rng& rng);

    /// Single-step automaton moves. reinforce_include saturates at 2N and, in
    /// sparse mode, refuses an include transition once the clause is at the cap.
    void reinforce_include(int class_id, int clause, std::size_t literal);
    void reinforce_exclude(int class_id, int clause, std::size_t literal);

    /// Throws StructuralError if any clause holds more than `cap` literals.
    void validate_sparsity(int cap) const;
    /// Validates the cap, then switches the model to sparse mode under it.
    void enable_sparse(int max_included_literals);
    /// Throws StructuralError if states leave [1, 2N] or masks drift from states.
    void check_invariants() const;

    void serialize(std::ostream& out) const;
    static TsetlinMachine deserialize(std::istream& in);

    bool operator==(const TsetlinMachine& other) const;

private:
    std::size_t automaton_index(int class_id, int clause, std::size_t literal) const;
    std::size_t clause_index(int class_id, int clause) const;
    void check_literals(const LiteralVector& lits) const;
    void check_class(int class_id) const;
    bool fires(std::size_t clause_idx, std::span<const std::uint64_t> lits, EvalMode mode) const;

    void increment(std::size_t clause_idx, std::size_t literal);
    void decrement(std::size_t clause_idx, std::size_t literal);
    void type_i_feedback(std::size_t clause_idx, bool output, Rng& rng);
    void type_ii_feedback(std::size_t clause_idx, bool output, const LiteralVector& lits);

    MachineConfig config_;
    std::size_t n_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint8_t> states_;       // state - 1, [class][clause][literal]
    std::vector<std::uint64_t> include_;     // [class][clause][word]
    std::vector<std::uint32_t> include_count_;  // [class][clause]

    // training scratch, single writer
    std::vector<std::uint32_t> one_literals_;
    std::vector<std::uint32_t> zero_literals_;
    std::vector<std::uint8_t> outputs_;
};

/// Validates the literal cap on an existing model and returns a copy that
/// enforces it during further training. Throws StructuralError on violation.
TsetlinMachine prune_to_sparse(TsetlinMachine model, int max_included_literals);

using EpochCallback = std::function<void(int epoch, double train_accuracy, double test_accuracy)>;

/// Runs config().epochs seeded passes with per-epoch shuffling. When `test` is
/// non-null, its accuracy is recorded after every epoch as well.
TrainReport fit(TsetlinMachine& model, const LabeledLiterals& train, const LabeledLiterals* test = nullptr,
                const EpochCallback& on_epoch = {});

double accuracy(const TsetlinMachine& model, const LabeledLiterals& data);

}  // namespace tmids
