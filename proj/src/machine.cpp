#include "tmids/machine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "tmids/binary_io.hpp"
#include "tmids/error.hpp"

namespace tmids {

namespace {

constexpr char kMachineMagic[8] = {'T', 'M', 'I', 'D', 'S', 'T', 'M', '1'};

std::uint64_t tail_mask(std::size_t literal_count) {
    const auto rem = literal_count & 63;
    return rem == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << rem) - 1;
}

// Next hit after `pos`; saturates at `end` so a huge skip cannot wrap around.
std::size_t next_hit(std::size_t pos, std::size_t end, const GeometricSkip& skip, Rng& rng) {
    const auto gap = skip.draw(rng);
    return gap >= end - pos ? end : pos + 1 + static_cast<std::size_t>(gap);
}

std::size_t first_hit(std::size_t end, const GeometricSkip& skip, Rng& rng) {
    const auto gap = skip.draw(rng);
    return gap >= end ? end : static_cast<std::size_t>(gap);
}

}  // namespace

void MachineConfig::validate() const {
    if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
    if (clauses_per_class < 2 || clauses_per_class % 2 != 0)
        throw ConfigError("clauses_per_class must be a positive even number");
    if (threshold < 1) throw ConfigError("threshold T must be >= 1");
    if (!(specificity > 1.0) || !std::isfinite(specificity)) throw ConfigError("specificity s must be > 1");
    if (state_depth < 1 || state_depth > kMaxStateDepth)
        throw ConfigError("state_depth N must be in [1, " + std::to_string(kMaxStateDepth) + "]");
    if (sparse && max_included_literals < 1) throw ConfigError("max_included_literals must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
}

MachineConfig MachineConfig::standard_preset() { return MachineConfig{}; }

MachineConfig MachineConfig::sparse_preset() {
    MachineConfig c;
    c.clauses_per_class = 1500;
    c.threshold = 30;
    c.specificity = 20.0;
    c.sparse = true;
    c.max_included_literals = 16;
    c.epochs = 50;
    return c;
}

bool eval_clause(const Clause& clause, const LiteralVector& lits, EvalMode mode) {
    for (auto k : clause.included) {
        if (k >= lits.size())
            throw StructuralError("clause literal index " + std::to_string(k) + " out of range for " +
                                  std::to_string(lits.size()) + " literals");
    }
    if (clause.included.empty()) return mode == EvalMode::Train;
    return std::all_of(clause.included.begin(), clause.included.end(), [&](std::uint32_t k) { return lits[k]; });
}

int tie_broken_argmax(std::span<const int> scores) {
    if (scores.empty()) throw InputError("argmax of empty score vector");
    int best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

TsetlinMachine::TsetlinMachine(MachineConfig config, std::size_t feature_count)
    : config_(config), n_(feature_count), words_(literal_words(2 * feature_count)) {
    config_.validate();
    if (feature_count == 0) throw ConfigError("feature_count must be >= 1");
    const auto clauses = static_cast<std::size_t>(config_.num_classes) * static_cast<std::size_t>(config_.clauses_per_class);
    // every automaton starts at N: the last exclude state
    states_.assign(clauses * literal_count(), static_cast<std::uint8_t>(config_.state_depth - 1));
    include_.assign(clauses * words_, 0);
    include_count_.assign(clauses, 0);
}

std::size_t TsetlinMachine::clause_index(int class_id, int clause) const {
    return static_cast<std::size_t>(class_id) * static_cast<std::size_t>(config_.clauses_per_class) +
           static_cast<std::size_t>(clause);
}

std::size_t TsetlinMachine::automaton_index(int class_id, int clause, std::size_t literal) const {
    if (class_id < 0 || class_id >= config_.num_classes || clause < 0 || clause >= config_.clauses_per_class ||
        literal >= literal_count())
        throw StructuralError("automaton index out of range");
    return clause_index(class_id, clause) * literal_count() + literal;
}

void TsetlinMachine::check_literals(const LiteralVector& lits) const {
    if (lits.size() != literal_count())
        throw StructuralError("literal vector has " + std::to_string(lits.size()) + " literals, model expects " +
                              std::to_string(literal_count()));
}

void TsetlinMachine::check_class(int class_id) const {
    if (class_id < 0 || class_id >= config_.num_classes)
        throw StructuralError("class id " + std::to_string(class_id) + " out of range");
}

int TsetlinMachine::state(int class_id, int clause, std::size_t literal) const {
    return states_[automaton_index(class_id, clause, literal)] + 1;
}

void TsetlinMachine::set_state(int class_id, int clause, std::size_t literal, int state) {
    if (state < 1 || state > 2 * config_.state_depth) throw StructuralError("automaton state out of [1, 2N]");
    const auto idx = automaton_index(class_id, clause, literal);
    const auto ci = clause_index(class_id, clause);
    const bool was = states_[idx] >= config_.state_depth;
    const bool now = state > config_.state_depth;
    states_[idx] = static_cast<std::uint8_t>(state - 1);
    if (was == now) return;
    auto& word = include_[ci * words_ + (literal >> 6)];
    const auto bit = std::uint64_t{1} << (literal & 63);
    if (now) {
        word |= bit;
        ++include_count_[ci];
    } else {
        word &= ~bit;
        --include_count_[ci];
    }
}

bool TsetlinMachine::included(int class_id, int clause, std::size_t literal) const {
    return states_[automaton_index(class_id, clause, literal)] >= config_.state_depth;
}

std::size_t TsetlinMachine::included_count(int class_id, int clause) const {
    check_class(class_id);
    if (clause < 0 || clause >= config_.clauses_per_class) throw StructuralError("clause index out of range");
    return include_count_[clause_index(class_id, clause)];
}

Clause TsetlinMachine::clause(int class_id, int clause) const {
    Clause c;
    c.class_id = class_id;
    c.polarity = polarity(clause);
    c.included.reserve(included_count(class_id, clause));
    const auto* mask = &include_[clause_index(class_id, clause) * words_];
    for (std::size_t w = 0; w < words_; ++w) {
        for (auto bits = mask[w]; bits != 0; bits &= bits - 1)
            c.included.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
    }
    return c;
}

bool TsetlinMachine::clause_output(int class_id, int clause, const LiteralVector& lits, EvalMode mode) const {
    check_literals(lits);
    check_class(class_id);
    if (clause < 0 || clause >= config_.clauses_per_class) throw StructuralError("clause index out of range");
    return fires(clause_index(class_id, clause), lits.words(), mode);
}

bool TsetlinMachine::fires(std::size_t ci, std::span<const std::uint64_t> lw, EvalMode mode) const {
    if (include_count_[ci] == 0) return mode == EvalMode::Train;
    const auto* mask = &include_[ci * words_];
    for (std::size_t w = 0; w < words_; ++w) {
        if ((lw[w] & mask[w]) != mask[w]) return false;
    }
    return true;
}

int TsetlinMachine::clause_outputs(int class_id, const LiteralVector& lits, EvalMode mode,
                                   std::span<std::uint8_t> out) const {
    check_literals(lits);
    check_class(class_id);
    if (out.size() != static_cast<std::size_t>(config_.clauses_per_class))
        throw StructuralError("clause output buffer has wrong size");
    const auto lw = lits.words();
    const auto half = config_.clauses_per_class / 2;
    int sum = 0;
    for (int j = 0; j < config_.clauses_per_class; ++j) {
        const auto ci = clause_index(class_id, j);
        const bool fired = fires(ci, lw, mode);
        out[static_cast<std::size_t>(j)] = fired ? 1 : 0;
        if (fired) sum += j < half ? 1 : -1;
    }
    return sum;
}

int TsetlinMachine::raw_class_sum(int class_id, const LiteralVector& lits, EvalMode mode) const {
    check_literals(lits);
    check_class(class_id);
    const auto lw = lits.words();
    const auto half = config_.clauses_per_class / 2;
    int sum = 0;
    for (int j = 0; j < config_.clauses_per_class; ++j) {
        const auto ci = clause_index(class_id, j);
        const bool fired = fires(ci, lw, mode);
        if (fired) sum += j < half ? 1 : -1;
    }
    return sum;
}

int TsetlinMachine::class_sum(int class_id, const LiteralVector& lits, EvalMode mode) const {
    return std::clamp(raw_class_sum(class_id, lits, mode), -config_.threshold, config_.threshold);
}

ClassScores TsetlinMachine::predict(const LiteralVector& lits) const {
    check_literals(lits);
    ClassScores result;
    result.scores.resize(static_cast<std::size_t>(config_.num_classes));
    for (int c = 0; c < config_.num_classes; ++c)
        result.scores[static_cast<std::size_t>(c)] = class_sum(c, lits, EvalMode::Infer);
    result.predicted = tie_broken_argmax(result.scores);
    return result;
}

void TsetlinMachine::increment(std::size_t ci, std::size_t literal) {
    auto& s = states_[ci * literal_count() + literal];
    const int depth = config_.state_depth;
    if (s >= 2 * depth - 1) return;
    if (s == depth - 1) {
        if (config_.sparse && include_count_[ci] >= static_cast<std::uint32_t>(config_.max_included_literals)) return;
        include_[ci * words_ + (literal >> 6)] |= std::uint64_t{1} << (literal & 63);
        ++include_count_[ci];
    }
    ++s;
}

void TsetlinMachine::decrement(std::size_t ci, std::size_t literal) {
    auto& s = states_[ci * literal_count() + literal];
    if (s == 0) return;
    if (s == config_.state_depth) {
        include_[ci * words_ + (literal >> 6)] &= ~(std::uint64_t{1} << (literal & 63));
        --include_count_[ci];
    }
    --s;
}

void TsetlinMachine::reinforce_include(int class_id, int clause, std::size_t literal) {
    automaton_index(class_id, clause, literal);
    increment(clause_index(class_id, clause), literal);
}

void TsetlinMachine::reinforce_exclude(int class_id, int clause, std::size_t literal) {
    automaton_index(class_id, clause, literal);
    decrement(clause_index(class_id, clause), literal);
}

// Per-literal Bernoulli draws are replaced by geometric jumps between hits,
// which is distributionally identical and touches ~L/s literals instead of L.
void TsetlinMachine::type_i_feedback(std::size_t ci, bool output, Rng& rng) {
    const GeometricSkip low(1.0 / config_.specificity);
    if (!output) {
        const auto total = literal_count();
        for (auto pos = first_hit(total, low, rng); pos < total; pos = next_hit(pos, total, low, rng)) decrement(ci, pos);
        return;
    }
    // Ia: literals that are 1 move toward include with probability (s-1)/s,
    // i.e. every literal except a 1/s-thinned set.
    const auto ones = one_literals_.size();
    auto skip_at = first_hit(ones, low, rng);
    for (std::size_t i = 0; i < ones; ++i) {
        if (i == skip_at) {
            skip_at = next_hit(i, ones, low, rng);
            continue;
        }
        increment(ci, one_literals_[i]);
    }
    // Ib: literals that are 0 move toward exclude with probability 1/s.
    const auto zeros = zero_literals_.size();
    for (auto pos = first_hit(zeros, low, rng); pos < zeros; pos = next_hit(pos, zeros, low, rng))
        decrement(ci, zero_literals_[pos]);
}

void TsetlinMachine::type_ii_feedback(std::size_t ci, bool output, const LiteralVector& lits) {
    if (!output) return;
    const auto lw = lits.words();
    const auto* mask = &include_[ci * words_];
    const auto last = tail_mask(literal_count());
    for (std::size_t w = 0; w < words_; ++w) {
        auto candidates = ~lw[w] & ~mask[w];
        if (w + 1 == words_) candidates &= last;
        for (; candidates != 0; candidates &= candidates - 1)
            increment(ci, w * 64 + static_cast<std::size_t>(std::countr_zero(candidates)));
    }
}

void TsetlinMachine::fit_sample(const LiteralVector& lits, int true_class, Rng& rng) {
    check_literals(lits);
    if (true_class < 0 || true_class >= config_.num_classes)
        throw InputError("class label " + std::to_string(true_class) + " out of range");

    one_literals_.clear();
    zero_literals_.clear();
    for (std::size_t k = 0; k < literal_count(); ++k) (lits[k] ? one_literals_ : zero_literals_).push_back(static_cast<std::uint32_t>(k));

    const auto m = static_cast<std::size_t>(config_.clauses_per_class);
    const int T = config_.threshold;
    outputs_.resize(m);

    const auto other_draw = static_cast<int>(rng.below(static_cast<std::uint64_t>(config_.num_classes - 1)));
    const int negative_class = other_draw >= true_class ? other_draw + 1 : other_draw;

    auto apply = [&](int class_id, bool target) {
        const int sum = std::clamp(clause_outputs(class_id, lits, EvalMode::Train, outputs_), -T, T);
        const double p = target ? static_cast<double>(T - sum) / (2.0 * T) : static_cast<double>(T + sum) / (2.0 * T);
        for (std::size_t j = 0; j < m; ++j) {
            if (!(rng.uniform() < p)) continue;
            const auto ci = clause_index(class_id, static_cast<int>(j));
            const bool positive = polarity(static_cast<int>(j)) > 0;
            if (positive == target)
                type_i_feedback(ci, outputs_[j] != 0, rng);
            else
                type_ii_feedback(ci, outputs_[j] != 0, lits);
        }
    };
    apply(true_class, true);
    apply(negative_class, false);
}

void TsetlinMachine::validate_sparsity(int cap) const {
    if (cap < 1) throw ConfigError("literal cap must be >= 1");
    for (std::size_t ci = 0; ci < include_count_.size(); ++ci) {
        if (include_count_[ci] > static_cast<std::uint32_t>(cap)) {
            const auto m = static_cast<std::size_t>(config_.clauses_per_class);
            throw StructuralError("class " + std::to_string(ci / m) + " clause " + std::to_string(ci % m) + " includes " +
                                  std::to_string(include_count_[ci]) + " literals, cap is " + std::to_string(cap));
        }
    }
}

void TsetlinMachine::check_invariants() const {
    const auto L = literal_count();
    const int depth = config_.state_depth;
    for (std::size_t ci = 0; ci < include_count_.size(); ++ci) {
        std::uint32_t count = 0;
        for (std::size_t k = 0; k < L; ++k) {
            const auto s = states_[ci * L + k];
            if (s > 2 * depth - 1) throw StructuralError("automaton state outside [1, 2N]");
            const bool inc = s >= depth;
            const bool bit = (include_[ci * words_ + (k >> 6)] >> (k & 63)) & 1u;
            if (inc != bit) throw StructuralError("include mask disagrees with automaton state");
            count += inc ? 1 : 0;
        }
        if (count != include_count_[ci]) throw StructuralError("include count disagrees with automaton states");
        if (words_ > 0 && (include_[ci * words_ + words_ - 1] & ~tail_mask(L)) != 0)
            throw StructuralError("include mask has bits past the literal range");
    }
    if (config_.sparse) validate_sparsity(config_.max_included_literals);
}

void TsetlinMachine::serialize(std::ostream& out) const {
    BinaryWriter w(out);
    w.raw(kMachineMagic, sizeof kMachineMagic);
    w.u32(static_cast<std::uint32_t>(config_.num_classes));
    w.u32(static_cast<std::uint32_t>(config_.clauses_per_class));
    w.i32(config_.threshold);
    w.f64(config_.specificity);
    w.u32(static_cast<std::uint32_t>(config_.state_depth));
    w.u8(config_.sparse ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(config_.max_included_literals));
    w.u32(static_cast<std::uint32_t>(config_.epochs));
    w.u64(config_.rng_seed);
    w.u64(n_);
    w.bytes(states_);
}

TsetlinMachine TsetlinMachine::deserialize(std::istream& in) {
    BinaryReader r(in);
    char magic[sizeof kMachineMagic];
    r.read(magic, sizeof magic);
    if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMachineMagic)))
        throw StructuralError("not a machine section (bad magic)");
    MachineConfig c;
    c.num_classes = static_cast<int>(r.u32());
    c.clauses_per_class = static_cast<int>(r.u32());
    c.threshold = r.i32();
    c.specificity = r.f64();
    c.state_depth = static_cast<int>(r.u32());
    c.sparse = r.u8() != 0;
    c.max_included_literals = static_cast<int>(r.u32());
    c.epochs = static_cast<int>(r.u32());
    c.rng_seed = r.u64();
    const auto n = r.u64();
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw StructuralError(std::string("model file carries invalid config: ") + e.what());
    }
    if (n == 0 || n > (std::uint64_t{1} << 24)) throw StructuralError("model file: feature count out of range");
    TsetlinMachine machine(c, static_cast<std::size_t>(n));
    r.bytes(machine.states_);
    const int depth = c.state_depth;
    const auto L = machine.literal_count();
    std::fill(machine.include_.begin(), machine.include_.end(), 0);
    std::fill(machine.include_count_.begin(), machine.include_count_.end(), 0);
    for (std::size_t ci = 0; ci < machine.include_count_.size(); ++ci) {
        for (std::size_t k = 0; k < L; ++k) {
            const auto s = machine.states_[ci * L + k];
            if (s > 2 * depth - 1) throw StructuralError("model file: automaton state outside [1, 2N]");
            if (s >= depth) {
                machine.include_[ci * machine.words_ + (k >> 6)] |= std::uint64_t{1} << (k & 63);
                ++machine.include_count_[ci];
            }
        }
    }
    if (c.sparse) machine.validate_sparsity(c.max_included_literals);
    return machine;
}

bool TsetlinMachine::operator==(const TsetlinMachine& other) const {
    return config_ == other.config_ && n_ == other.n_ && states_ == other.states_;
}

void TsetlinMachine::enable_sparse(int max_included_literals) {
    validate_sparsity(max_included_literals);
    config_.sparse = true;
    config_.max_included_literals = max_included_literals;
}

TsetlinMachine prune_to_sparse(TsetlinMachine model, int max_included_literals) {
    model.enable_sparse(max_included_literals);
    return model;
}

double accuracy(const TsetlinMachine& model, const LabeledLiterals& data) {
    if (data.size() == 0) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) correct += model.predict(data.samples[i]).predicted == data.labels[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainReport fit(TsetlinMachine& model, const LabeledLiterals& train, const LabeledLiterals* test,
                const EpochCallback& on_epoch) {
    if (train.size() == 0) throw InputError("fit: empty training set");
    if (train.labels.size() != train.samples.size()) throw InputError("fit: label count differs from sample count");
    for (auto y : train.labels) {
        if (y < 0 || y >= model.num_classes()) throw InputError("fit: label " + std::to_string(y) + " out of range");
    }
    Rng rng(model.config().rng_seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    TrainReport report;
    for (int epoch = 0; epoch < model.config().epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        for (auto i : order) model.fit_sample(train.samples[i], train.labels[i], rng);
        report.train_accuracy.push_back(accuracy(model, train));
        double test_acc = 0.0;
        if (test != nullptr) {
            test_acc = accuracy(model, *test);
            report.test_accuracy.push_back(test_acc);
        }
        if (on_epoch) on_epoch(epoch + 1, report.train_accuracy.back(), test_acc);
    }
    return report;
}

}  // namespace tmids
