#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tmfs/bitmatrix.hpp"
#include "tmfs/rng.hpp"

namespace tmfs {

struct BinaryDataset;

struct HyperParams {
    int num_clauses = 500;        // M, split evenly per (class, polarity)
    int threshold = 600;          // T
    double specificity = 3.0;     // s >= 1
    int num_classes = 2;          // C
    int ta_states_per_action = 128;  // N; automaton states live in [1, 2N]
    int epochs = 30;
    std::uint64_t seed = 0;

    // Throws std::invalid_argument on violated invariants
    // (M divisible by 2C, s >= 1, C >= 2, positive counts).
    void validate() const;
};

enum class EvalMode { kTrain, kInfer };

// A conjunctive clause over 2d literals: positions [0, d) are the positive
// literals, [d, 2d) the negated ones. Literal j is included iff
// ta_state[j] > N. The packed include masks mirror ta_state and are what
// the evaluation hot path reads.
struct Clause {
    std::vector<std::int16_t> ta_state;  // 2d entries in [1, 2N]
    std::int32_t class_id = 0;
    std::int8_t polarity = +1;           // +1 or -1
    std::int32_t weight = 1;             // non-negative

    std::vector<std::uint64_t> include_pos;  // packed d bits
    std::vector<std::uint64_t> include_neg;
    int include_count = 0;

    // Re-derives the packed masks from ta_state.
    void rebuild_includes(int num_features, int n_states);
};

// 1 iff every included literal is satisfied by x. A clause with no included
// literals evaluates to 1 in train mode and 0 in infer mode.
// x must span num_features bits packed as in BitMatrix rows.
int evaluate_clause(const Clause& clause, std::span<const std::uint64_t> x,
                    int num_features, EvalMode mode);

// Convenience overload for an unpacked sample.
int evaluate_clause(const Clause& clause, const std::vector<bool>& x, EvalMode mode);

// Type I feedback. Firing clause (train mode): satisfied literals step
// toward include with probability (s-1)/s, unsatisfied ones toward exclude
// with probability 1/s, and the weight increments. Non-firing clause: every
// literal steps toward exclude with probability 1/s.
void type_i_feedback(Clause& clause, std::span<const std::uint64_t> x,
                     int num_features, double specificity, int n_states, Rng& rng);

// Type II feedback. Only acts on a firing clause: every excluded literal
// unsatisfied by x steps one state toward include and the weight decrements
// (floored at zero).
void type_ii_feedback(Clause& clause, std::span<const std::uint64_t> x,
                      int num_features, int n_states);

class TMClassifier {
public:
    TMClassifier() = default;

    // Fresh model: M/(2C) clauses per (class, polarity), all automata at
    // state N (exclude, one step from the boundary), weights 1.
    TMClassifier(HyperParams params, int num_features);

    // Builds a model from an explicit clause list (fixtures, deserialization).
    static TMClassifier from_clauses(HyperParams params, int num_features,
                                     std::vector<Clause> clauses);

    int num_features() const { return num_features_; }
    const HyperParams& params() const { return params_; }
    const std::vector<Clause>& clauses() const { return clauses_; }
    const std::vector<std::vector<std::int32_t>>& weight_history() const {
        return weight_history_;
    }

    // Weighted, polarity-signed vote totals; clauses evaluated in infer mode.
    std::vector<std::int64_t> class_sums(std::span<const std::uint64_t> x) const;
    std::vector<std::int64_t> class_sums(const std::vector<bool>& x) const;

    // Argmax of class_sums; ties resolve to the lowest class index.
    int predict(std::span<const std::uint64_t> x) const;
    int predict(const std::vector<bool>& x) const;

    // One pass over the dataset in shuffled order with the standard
    // multiclass feedback schedule; appends a weight snapshot.
    void fit_epoch(const BinaryDataset& train, Rng& rng);

    // Runs `epochs` epochs with an RNG seeded from params().seed.
    void fit(const BinaryDataset& train, int epochs);
    void fit(const BinaryDataset& train) { fit(train, params_.epochs); }

    double accuracy(const BinaryDataset& data) const;
    double macro_f1(const BinaryDataset& data) const;

    // Flat versioned text dump; round-trips bit-exactly.
    void save(std::ostream& out) const;
    static TMClassifier load(std::istream& in);
    void save_file(const std::string& path) const;
    static TMClassifier load_file(const std::string& path);

private:
    HyperParams params_;
    int num_features_ = 0;
    std::vector<Clause> clauses_;
    std::vector<std::vector<std::int32_t>> weight_history_;
};

}  // namespace tmfs
