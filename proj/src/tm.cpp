#include "tmfs/tm.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tmfs/dataset.hpp"

namespace tmfs {

namespace {

std::vector<std::uint64_t> pack_bits(const std::vector<bool>& x) {
    std::vector<std::uint64_t> words((x.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i]) words[i / 64] |= 1ULL << (i % 64);
    return words;
}

bool literal_value(std::span<const std::uint64_t> x, int num_features, int literal) {
    int col = literal < num_features ? literal : literal - num_features;
    bool bit = (x[col / 64] >> (col % 64)) & 1ULL;
    return literal < num_features ? bit : !bit;
}

}  // namespace

void HyperParams::validate() const {
    if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
    if (num_clauses <= 0 || num_clauses % (2 * num_classes) != 0)
        throw std::invalid_argument("num_clauses must be a positive multiple of 2*num_classes");
    if (threshold <= 0) throw std::invalid_argument("threshold must be positive");
    if (specificity < 1.0) throw std::invalid_argument("specificity must be >= 1");
    if (ta_states_per_action <= 0)
        throw std::invalid_argument("ta_states_per_action must be positive");
    if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
}

void Clause::rebuild_includes(int num_features, int n_states) {
    std::size_t words = (static_cast<std::size_t>(num_features) + 63) / 64;
    include_pos.assign(words, 0);
    include_neg.assign(words, 0);
    include_count = 0;
    for (int j = 0; j < 2 * num_features; ++j) {
        if (ta_state[j] > n_states) {
            int col = j < num_features ? j : j - num_features;
            auto& mask = j < num_features ? include_pos : include_neg;
            mask[col / 64] |= 1ULL << (col % 64);
            ++include_count;
        }
    }
}

int evaluate_clause(const Clause& clause, std::span<const std::uint64_t> x,
                    int num_features, EvalMode mode) {
    if (static_cast<int>(clause.ta_state.size()) != 2 * num_features)
        throw std::invalid_argument("evaluate_clause: clause/input dimension mismatch");
    if (clause.include_count == 0) return mode == EvalMode::kTrain ? 1 : 0;
    for (std::size_t w = 0; w < clause.include_pos.size(); ++w) {
        if (clause.include_pos[w] & ~x[w]) return 0;
        if (clause.include_neg[w] & x[w]) return 0;
    }
    return 1;
}

int evaluate_clause(const Clause& clause, const std::vector<bool>& x, EvalMode mode) {
    auto words = pack_bits(x);
    return evaluate_clause(clause, words, static_cast<int>(x.size()), mode);
}

namespace {

// State moves toward the include side (up) or exclude side (down), clamped
// to [1, 2N]. Boundary crossings keep the packed masks in sync.
inline void step_toward_include(Clause& c, int j, int num_features, int n_states) {
    std::int16_t& st = c.ta_state[j];
    if (st >= 2 * n_states) return;
    ++st;
    if (st == n_states + 1) {
        int col = j < num_features ? j : j - num_features;
        auto& mask = j < num_features ? c.include_pos : c.include_neg;
        mask[col / 64] |= 1ULL << (col % 64);
        ++c.include_count;
    }
}

inline void step_toward_exclude(Clause& c, int j, int num_features, int n_states) {
    std::int16_t& st = c.ta_state[j];
    if (st <= 1) return;
    --st;
    if (st == n_states) {
        int col = j < num_features ? j : j - num_features;
        auto& mask = j < num_features ? c.include_pos : c.include_neg;
        mask[col / 64] &= ~(1ULL << (col % 64));
        --c.include_count;
    }
}

#ifndef NDEBUG
void check_clause_invariants(const Clause& c, int n_states) {
    assert(c.weight >= 0);
    for (auto st : c.ta_state) assert(st >= 1 && st <= 2 * n_states);
}
#endif

}  // namespace

void type_i_feedback(Clause& clause, std::span<const std::uint64_t> x,
                     int num_features, double specificity, int n_states, Rng& rng) {
    const double p_exclude = 1.0 / specificity;
    const double p_include = (specificity - 1.0) / specificity;
    if (evaluate_clause(clause, x, num_features, EvalMode::kTrain)) {
        ++clause.weight;
        for (int j = 0; j < 2 * num_features; ++j) {
            if (literal_value(x, num_features, j)) {
                if (rng.bernoulli(p_include)) step_toward_include(clause, j, num_features, n_states);
            } else {
                if (rng.bernoulli(p_exclude)) step_toward_exclude(clause, j, num_features, n_states);
            }
        }
    } else {
        for (int j = 0; j < 2 * num_features; ++j)
            if (rng.bernoulli(p_exclude)) step_toward_exclude(clause, j, num_features, n_states);
    }
#ifndef NDEBUG
    check_clause_invariants(clause, n_states);
#endif
}

void type_ii_feedback(Clause& clause, std::span<const std::uint64_t> x,
                      int num_features, int n_states) {
    if (!evaluate_clause(clause, x, num_features, EvalMode::kTrain)) return;
    if (clause.weight > 0) --clause.weight;
    for (int j = 0; j < 2 * num_features; ++j) {
        if (clause.ta_state[j] <= n_states && !literal_value(x, num_features, j))
            step_toward_include(clause, j, num_features, n_states);
    }
#ifndef NDEBUG
    check_clause_invariants(clause, n_states);
#endif
}

TMClassifier::TMClassifier(HyperParams params, int num_features)
    : params_(params), num_features_(num_features) {
    params_.validate();
    if (num_features < 0) throw std::invalid_argument("num_features must be >= 0");
    const int per_pair = params_.num_clauses / (2 * params_.num_classes);
    clauses_.reserve(params_.num_clauses);
    for (int c = 0; c < params_.num_classes; ++c) {
        for (int pol = 0; pol < 2; ++pol) {
            for (int i = 0; i < per_pair; ++i) {
                Clause cl;
                cl.ta_state.assign(2 * num_features,
                                   static_cast<std::int16_t>(params_.ta_states_per_action));
                cl.class_id = c;
                cl.polarity = pol == 0 ? +1 : -1;
                cl.weight = 1;
                cl.rebuild_includes(num_features_, params_.ta_states_per_action);
                clauses_.push_back(std::move(cl));
            }
        }
    }
}

TMClassifier TMClassifier::from_clauses(HyperParams params, int num_features,
                                        std::vector<Clause> clauses) {
    TMClassifier model;
    model.params_ = params;
    model.num_features_ = num_features;
    model.clauses_ = std::move(clauses);
    for (auto& cl : model.clauses_) {
        if (static_cast<int>(cl.ta_state.size()) != 2 * num_features)
            throw std::invalid_argument("from_clauses: ta_state length != 2*num_features");
        if (cl.class_id < 0 || cl.class_id >= params.num_classes)
            throw std::invalid_argument("from_clauses: clause class out of range");
        if (cl.weight < 0) throw std::invalid_argument("from_clauses: negative clause weight");
        cl.rebuild_includes(num_features, params.ta_states_per_action);
    }
    return model;
}

std::vector<std::int64_t> TMClassifier::class_sums(std::span<const std::uint64_t> x) const {
    if (x.size() < (static_cast<std::size_t>(num_features_) + 63) / 64)
        throw std::invalid_argument("class_sums: input dimension mismatch");
    std::vector<std::int64_t> sums(params_.num_classes, 0);
    for (const Clause& cl : clauses_) {
        if (cl.include_count == 0) continue;  // infer mode: empty clause is silent
        bool fires = true;
        for (std::size_t w = 0; w < cl.include_pos.size(); ++w) {
            if ((cl.include_pos[w] & ~x[w]) || (cl.include_neg[w] & x[w])) {
                fires = false;
                break;
            }
        }
        if (fires) sums[cl.class_id] += static_cast<std::int64_t>(cl.polarity) * cl.weight;
    }
    return sums;
}

std::vector<std::int64_t> TMClassifier::class_sums(const std::vector<bool>& x) const {
    if (static_cast<int>(x.size()) != num_features_)
        throw std::invalid_argument("class_sums: input dimension mismatch");
    auto words = pack_bits(x);
    return class_sums(words);
}

int TMClassifier::predict(std::span<const std::uint64_t> x) const {
    auto sums = class_sums(x);
    int best = 0;
    for (int c = 1; c < params_.num_classes; ++c)
        if (sums[c] > sums[best]) best = c;
    return best;
}

int TMClassifier::predict(const std::vector<bool>& x) const {
    auto words = pack_bits(x);
    return predict(words);
}

void TMClassifier::fit_epoch(const BinaryDataset& train, Rng& rng) {
    if (train.n_samples() == 0) throw std::invalid_argument("fit_epoch: empty dataset");
    if (train.num_columns() != num_features_)
        throw std::invalid_argument("fit_epoch: dataset/model dimension mismatch");

    const int T = params_.threshold;
    const int per_class = params_.num_clauses / params_.num_classes;
    std::vector<std::size_t> order(train.n_samples());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    for (std::size_t idx : order) {
        auto x = train.bits.row(idx);
        const int y = train.labels[idx];
        auto sums = class_sums(x);

        const std::int64_t s_y = std::clamp<std::int64_t>(sums[y], -T, T);
        const double p_target = static_cast<double>(T - s_y) / (2.0 * T);
        for (int i = y * per_class; i < (y + 1) * per_class; ++i) {
            if (!rng.bernoulli(p_target)) continue;
            Clause& cl = clauses_[i];
            if (cl.polarity > 0)
                type_i_feedback(cl, x, num_features_, params_.specificity,
                                params_.ta_states_per_action, rng);
            else
                type_ii_feedback(cl, x, num_features_, params_.ta_states_per_action);
        }

        // One uniformly drawn non-target class per sample.
        std::uint64_t r = rng.uniform_below(params_.num_classes - 1);
        const int neg = static_cast<int>(r) < y ? static_cast<int>(r) : static_cast<int>(r) + 1;
        const std::int64_t s_n = std::clamp<std::int64_t>(sums[neg], -T, T);
        const double p_negative = static_cast<double>(T + s_n) / (2.0 * T);
        for (int i = neg * per_class; i < (neg + 1) * per_class; ++i) {
            if (!rng.bernoulli(p_negative)) continue;
            Clause& cl = clauses_[i];
            if (cl.polarity > 0)
                type_ii_feedback(cl, x, num_features_, params_.ta_states_per_action);
            else
                type_i_feedback(cl, x, num_features_, params_.specificity,
                                params_.ta_states_per_action, rng);
        }
    }

    std::vector<std::int32_t> snapshot(clauses_.size());
    for (std::size_t i = 0; i < clauses_.size(); ++i) snapshot[i] = clauses_[i].weight;
    weight_history_.push_back(std::move(snapshot));
}

void TMClassifier::fit(const BinaryDataset& train, int epochs) {
    Rng rng(params_.seed);
    for (int e = 0; e < epochs; ++e) fit_epoch(train, rng);
}

double TMClassifier::accuracy(const BinaryDataset& data) const {
    if (data.n_samples() == 0) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.n_samples(); ++i)
        if (predict(data.bits.row(i)) == data.labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.n_samples());
}

double TMClassifier::macro_f1(const BinaryDataset& data) const {
    const int C = params_.num_classes;
    std::vector<std::int64_t> tp(C, 0), fp(C, 0), fn(C, 0);
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        int pred = predict(data.bits.row(i));
        int truth = data.labels[i];
        if (pred == truth)
            ++tp[pred];
        else {
            ++fp[pred];
            ++fn[truth];
        }
    }
    double f1_sum = 0.0;
    for (int c = 0; c < C; ++c) {
        double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        f1_sum += denom > 0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    }
    return f1_sum / C;
}

namespace {
constexpr char kModelMagic[] = "tmfs-model";
constexpr int kModelVersion = 1;
}  // namespace

void TMClassifier::save(std::ostream& out) const {
    out << kModelMagic << " v" << kModelVersion << "\n";
    char sbuf[64];
    std::snprintf(sbuf, sizeof sbuf, "%.17g", params_.specificity);
    out << "params " << params_.num_clauses << ' ' << params_.threshold << ' ' << sbuf << ' '
        << params_.num_classes << ' ' << params_.ta_states_per_action << ' ' << params_.epochs
        << ' ' << params_.seed << "\n";
    out << "features " << num_features_ << "\n";
    out << "clauses " << clauses_.size() << "\n";
    for (const Clause& cl : clauses_) {
        out << static_cast<int>(cl.class_id) << ' ' << static_cast<int>(cl.polarity) << ' '
            << cl.weight;
        for (auto st : cl.ta_state) out << ' ' << st;
        out << "\n";
    }
    out << "history " << weight_history_.size() << "\n";
    for (const auto& snap : weight_history_) {
        for (std::size_t i = 0; i < snap.size(); ++i) out << (i ? " " : "") << snap[i];
        out << "\n";
    }
    out << "end\n";
}

TMClassifier TMClassifier::load(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != kModelMagic || version != "v1")
        throw std::invalid_argument("model load: unrecognized header");

    std::string tag;
    HyperParams p;
    in >> tag;
    if (tag != "params") throw std::invalid_argument("model load: expected params");
    in >> p.num_clauses >> p.threshold >> p.specificity >> p.num_classes >>
        p.ta_states_per_action >> p.epochs >> p.seed;

    int num_features = 0;
    in >> tag >> num_features;
    if (tag != "features") throw std::invalid_argument("model load: expected features");

    std::size_t n_clauses = 0;
    in >> tag >> n_clauses;
    if (tag != "clauses") throw std::invalid_argument("model load: expected clauses");
    std::vector<Clause> clauses(n_clauses);
    for (Clause& cl : clauses) {
        int class_id, polarity;
        in >> class_id >> polarity >> cl.weight;
        cl.class_id = class_id;
        cl.polarity = static_cast<std::int8_t>(polarity);
        cl.ta_state.resize(2 * num_features);
        for (auto& st : cl.ta_state) in >> st;
    }

    std::size_t n_epochs = 0;
    in >> tag >> n_epochs;
    if (tag != "history") throw std::invalid_argument("model load: expected history");
    std::vector<std::vector<std::int32_t>> history(n_epochs);
    for (auto& snap : history) {
        snap.resize(n_clauses);
        for (auto& w : snap) in >> w;
    }
    in >> tag;
    if (!in || tag != "end") throw std::invalid_argument("model load: truncated file");

    TMClassifier model = from_clauses(p, num_features, std::move(clauses));
    model.weight_history_ = std::move(history);
    return model;
}

void TMClassifier::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    save(out);
}

TMClassifier TMClassifier::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    return load(in);
}

}  // namespace tmfs
