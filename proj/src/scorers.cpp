#include "tmfs/scorers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tmfs/rng.hpp"
#include "tmfs/tm.hpp"

namespace tmfs {

std::string_view variant_name(WeightVariant v) {
    return v == WeightVariant::kNet ? "net" : "posneg";
}

std::string_view category_name(MethodCategory c) {
    switch (c) {
        case MethodCategory::kFilter: return "filter";
        case MethodCategory::kEmbedded: return "embedded";
        case MethodCategory::kWrapper: return "wrapper";
        case MethodCategory::kAttribution: return "attribution";
    }
    return "?";
}

void ScorerConfig::validate() const {
    if (n_masks < 1 || n_noise < 1 || n_permutations < 1 || n_shapley_perms < 1 ||
        lime_perturbations < 1)
        throw std::invalid_argument("scorer config: counts must be >= 1");
    if (!(noise_rate > 0.0 && noise_rate < 0.5))
        throw std::invalid_argument("scorer config: noise_rate must lie in (0, 0.5)");
}

std::vector<int> make_ranking(const std::vector<double>& scores) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    return order;
}

std::vector<double> class_frequencies(const BinaryDataset& train) {
    if (train.n_samples() == 0)
        throw std::invalid_argument("class_frequencies: empty dataset");
    std::vector<double> alpha(train.num_classes, 0.0);
    for (int y : train.labels) alpha[y] += 1.0;
    for (double& a : alpha) a /= static_cast<double>(train.n_samples());
    return alpha;
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
FeatureScore timed_score(std::string id, std::string variant, Fn&& fn) {
    auto t0 = Clock::now();
    std::vector<double> scores = fn();
    double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    FeatureScore out;
    out.method_id = std::move(id);
    out.variant = std::move(variant);
    out.scores = std::move(scores);
    out.ranking = make_ranking(out.scores);
    out.rank_time_seconds = std::max(dt, 1e-9);
    return out;
}

const Matrix& select_view(const WeightViews& views, WeightVariant variant) {
    return variant == WeightVariant::kNet ? views.abs_w : views.abs_sum_w;
}

void require_model_data(const TMClassifier& model, const BinaryDataset& data,
                        const char* who) {
    if (data.num_columns() != model.num_features())
        throw std::invalid_argument(std::string(who) + ": dataset/model dimension mismatch");
}

// Word mask covering the columns of the selected original features.
std::vector<std::uint64_t> columns_mask(const FeatureMap& map, int num_columns,
                                        std::span<const int> features) {
    std::vector<std::uint64_t> mask((static_cast<std::size_t>(num_columns) + 63) / 64, 0);
    for (int f : features)
        for (int col : map.features[f].columns) mask[col / 64] |= 1ULL << (col % 64);
    return mask;
}

std::vector<std::uint64_t> full_mask(int num_columns) {
    std::size_t words = (static_cast<std::size_t>(num_columns) + 63) / 64;
    std::vector<std::uint64_t> mask(words, ~0ULL);
    if (num_columns % 64 != 0 && words > 0)
        mask.back() = (1ULL << (num_columns % 64)) - 1;
    return mask;
}

// True-class sum of a row under a column mask.
std::int64_t masked_true_sum(const TMClassifier& model, std::span<const std::uint64_t> row,
                             std::span<const std::uint64_t> mask, int y,
                             std::vector<std::uint64_t>& scratch) {
    scratch.assign(row.begin(), row.end());
    for (std::size_t w = 0; w < scratch.size(); ++w) scratch[w] &= mask[w];
    return model.class_sums(scratch)[y];
}

double masked_accuracy(const TMClassifier& model, const BinaryDataset& data,
                       std::span<const std::uint64_t> mask) {
    if (data.n_samples() == 0) return 0.0;
    std::vector<std::uint64_t> scratch;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        auto row = data.bits.row(i);
        scratch.assign(row.begin(), row.end());
        for (std::size_t w = 0; w < scratch.size(); ++w) scratch[w] &= mask[w];
        if (model.predict(scratch) == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.n_samples());
}

// Per-column mean |change of the true-class sum| under a single-bit flip.
// Clause-wise: a firing clause turns off when any included literal's column
// flips; a clause with exactly one unsatisfied literal turns on when that
// column flips, unless the column carries both of the clause's literals (the
// flip then just swaps which one is violated).
std::vector<double> taylor_columns(const TMClassifier& model, const BitMatrix& bits,
                                   std::span<const int> labels) {
    const int d = model.num_features();
    if (static_cast<int>(bits.cols()) != d)
        throw std::invalid_argument("taylor_crit: dataset/model dimension mismatch");
    if (bits.rows() == 0) throw std::invalid_argument("taylor_crit: empty validation set");

    std::vector<double> acc(d, 0.0);
    std::vector<double> delta(d, 0.0);
    const auto& clauses = model.clauses();
    for (std::size_t i = 0; i < bits.rows(); ++i) {
        auto x = bits.row(i);
        const int y = labels[i];
        std::fill(delta.begin(), delta.end(), 0.0);
        for (const Clause& cl : clauses) {
            if (cl.class_id != y || cl.include_count == 0) continue;
            const double vote = static_cast<double>(cl.polarity) * cl.weight;
            int unsat_count = 0;
            int unsat_col = -1;
            for (std::size_t w = 0; w < cl.include_pos.size() && unsat_count <= 1; ++w) {
                std::uint64_t u = (cl.include_pos[w] & ~x[w]) | (cl.include_neg[w] & x[w]);
                while (u) {
                    ++unsat_count;
                    if (unsat_count > 1) break;
                    unsat_col = static_cast<int>(w) * 64 + std::countr_zero(u);
                    u &= u - 1;
                }
            }
            if (unsat_count == 0) {
                for (std::size_t w = 0; w < cl.include_pos.size(); ++w) {
                    std::uint64_t m = cl.include_pos[w] | cl.include_neg[w];
                    while (m) {
                        delta[static_cast<int>(w) * 64 + std::countr_zero(m)] -= vote;
                        m &= m - 1;
                    }
                }
            } else if (unsat_count == 1) {
                bool both = ((cl.include_pos[unsat_col / 64] >> (unsat_col % 64)) & 1ULL) &&
                            ((cl.include_neg[unsat_col / 64] >> (unsat_col % 64)) & 1ULL);
                if (!both) delta[unsat_col] += vote;
            }
        }
        for (int f = 0; f < d; ++f) acc[f] += std::abs(delta[f]);
    }
    for (double& v : acc) v /= static_cast<double>(bits.rows());
    return acc;
}

// Contingency counts of one binary column against the labels.
struct Contingency {
    std::vector<double> n_bc;  // 2 x C, row-major
    std::array<double, 2> n_b{};
    std::vector<double> n_c;
    double n = 0;
};

Contingency column_contingency(const BinaryDataset& data, int col) {
    const int C = data.num_classes;
    Contingency t;
    t.n_bc.assign(2 * C, 0.0);
    t.n_c.assign(C, 0.0);
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        int b = data.bits.get(i, col) ? 1 : 0;
        int c = data.labels[i];
        t.n_bc[b * C + c] += 1.0;
        t.n_b[b] += 1.0;
        t.n_c[c] += 1.0;
        t.n += 1.0;
    }
    return t;
}

}  // namespace

// ------------------------------------------------------------------ filters

FeatureScore score_mutual_info(const BinaryDataset& train) {
    return timed_score("mutual_info", "-", [&] {
        if (train.n_samples() == 0) throw std::invalid_argument("mutual_info: empty dataset");
        const int C = train.num_classes;
        std::vector<double> per_col(train.num_columns(), 0.0);
        for (int col = 0; col < train.num_columns(); ++col) {
            auto t = column_contingency(train, col);
            double mi = 0.0;
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < C; ++c) {
                    double joint = t.n_bc[b * C + c];
                    if (joint <= 0.0) continue;
                    mi += joint / t.n * std::log(joint * t.n / (t.n_b[b] * t.n_c[c]));
                }
            per_col[col] = mi;
        }
        return aggregate_to_features(per_col, train.feature_map);
    });
}

FeatureScore score_chi2(const BinaryDataset& train) {
    return timed_score("chi2", "-", [&] {
        if (train.n_samples() == 0) throw std::invalid_argument("chi2: empty dataset");
        const int C = train.num_classes;
        std::vector<double> per_col(train.num_columns(), 0.0);
        for (int col = 0; col < train.num_columns(); ++col) {
            auto t = column_contingency(train, col);
            double stat = 0.0;
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < C; ++c) {
                    double expected = t.n_b[b] * t.n_c[c] / t.n;
                    if (expected <= 0.0) continue;  // zero expected count contributes 0
                    double diff = t.n_bc[b * C + c] - expected;
                    stat += diff * diff / expected;
                }
            per_col[col] = stat;
        }
        return aggregate_to_features(per_col, train.feature_map);
    });
}

FeatureScore score_variance(const BinaryDataset& train) {
    return timed_score("variance", "-", [&] {
        if (train.n_samples() == 0) throw std::invalid_argument("variance: empty dataset");
        std::vector<double> per_col(train.num_columns(), 0.0);
        for (int col = 0; col < train.num_columns(); ++col) {
            double p = 0.0;
            for (std::size_t i = 0; i < train.n_samples(); ++i)
                p += train.bits.get(i, col) ? 1.0 : 0.0;
            p /= static_cast<double>(train.n_samples());
            per_col[col] = p * (1.0 - p);
        }
        return aggregate_to_features(per_col, train.feature_map);
    });
}

FeatureScore score_random(const BinaryDataset& data, std::uint64_t seed) {
    return timed_score("random", "-", [&] {
        Rng rng(seed);
        std::vector<double> scores(data.num_features());
        for (double& s : scores) s = rng.uniform01();
        return scores;
    });
}

// ----------------------------------------------------------------- embedded

FeatureScore score_relevance(const TMClassifier& model, std::span<const double> alpha,
                             const FeatureMap& map) {
    return timed_score("relevance", "-", [&] {
        if (static_cast<int>(alpha.size()) != model.params().num_classes)
            throw std::invalid_argument("relevance: alpha/class mismatch");
        const int d = model.num_features();
        const int C = model.params().num_classes;
        const int n_states = model.params().ta_states_per_action;
        Matrix counts(C, d);
        for (const Clause& cl : model.clauses())
            for (int f = 0; f < d; ++f)
                if (cl.ta_state[f] > n_states || cl.ta_state[d + f] > n_states)
                    counts.at(cl.class_id, f) += 1.0;
        std::vector<double> per_col(d, 0.0);
        for (int f = 0; f < d; ++f)
            for (int c = 0; c < C; ++c) per_col[f] += alpha[c] * counts.at(c, f);
        return aggregate_to_features(per_col, map);
    });
}

FeatureScore score_tm_weight(const TMClassifier& model, const FeatureMap& map) {
    return timed_score("tm_weight", "-", [&] {
        const int d = model.num_features();
        const int n_states = model.params().ta_states_per_action;
        std::vector<double> per_col(d, 0.0);
        for (const Clause& cl : model.clauses()) {
            double w = std::abs(static_cast<double>(cl.weight));
            for (int f = 0; f < d; ++f)
                if (cl.ta_state[f] > n_states || cl.ta_state[d + f] > n_states)
                    per_col[f] = std::max(per_col[f], w);
        }
        return aggregate_to_features(per_col, map);
    });
}

FeatureScore score_cw_sum(const WeightViews& views, std::span<const double> alpha,
                          WeightVariant variant, const FeatureMap& map) {
    return timed_score("cw_sum", std::string(variant_name(variant)), [&] {
        const Matrix& W = select_view(views, variant);
        if (alpha.size() != W.rows) throw std::invalid_argument("cw_sum: alpha/class mismatch");
        std::vector<double> per_col(W.cols, 0.0);
        for (std::size_t f = 0; f < W.cols; ++f)
            for (std::size_t c = 0; c < W.rows; ++c) per_col[f] += alpha[c] * W.at(c, f);
        return aggregate_to_features(per_col, map);
    });
}

FeatureScore score_support_cw_sum(const WeightViews& views, std::span<const double> alpha,
                                  WeightVariant variant, const FeatureMap& map) {
    return timed_score("support_cw_sum", std::string(variant_name(variant)), [&] {
        const Matrix& W = select_view(views, variant);
        if (alpha.size() != W.rows)
            throw std::invalid_argument("support_cw_sum: alpha/class mismatch");
        std::vector<double> per_col(W.cols, 0.0);
        for (std::size_t f = 0; f < W.cols; ++f)
            for (std::size_t c = 0; c < W.rows; ++c)
                per_col[f] += (1.0 - alpha[c]) * W.at(c, f);
        return aggregate_to_features(per_col, map);
    });
}

FeatureScore score_cw_feat(const WeightViews& views, WeightVariant variant,
                           const FeatureMap& map) {
    return timed_score("cw_feat", std::string(variant_name(variant)), [&] {
        const Matrix& W = select_view(views, variant);
        std::vector<double> per_col(W.cols, 0.0);
        for (std::size_t f = 0; f < W.cols; ++f) {
            double total = 0.0;
            for (std::size_t c = 0; c < W.rows; ++c) total += W.at(c, f);
            if (total == 0.0) continue;
            double s = 0.0;
            for (std::size_t c = 0; c < W.rows; ++c) s += W.at(c, f) * W.at(c, f) / total;
            per_col[f] = s;
        }
        return aggregate_to_features(per_col, map);
    });
}

FeatureScore score_margin(const WeightViews& views, WeightVariant variant,
                          const FeatureMap& map) {
    return timed_score("margin", std::string(variant_name(variant)), [&] {
        const Matrix& W = select_view(views, variant);
        std::vector<double> per_col(W.cols, 0.0);
        std::vector<double> column(W.rows);
        for (std::size_t f = 0; f < W.cols; ++f) {
            for (std::size_t c = 0; c < W.rows; ++c) column[c] = W.at(c, f);
            std::sort(column.begin(), column.end(), std::greater<>());
            double second = column.size() > 1 ? column[1] : 0.0;
            per_col[f] = column[0] - second;
        }
        return aggregate_to_features(per_col, map);
    });
}

FeatureScore score_entropy(const WeightViews& views, WeightVariant variant,
                           const FeatureMap& map) {
    return timed_score("entropy", std::string(variant_name(variant)), [&] {
        const Matrix& W = select_view(views, variant);
        const double log_c = std::log(static_cast<double>(W.rows));
        std::vector<double> per_col(W.cols, 0.0);
        for (std::size_t f = 0; f < W.cols; ++f) {
            double total = 0.0;
            for (std::size_t c = 0; c < W.rows; ++c) total += W.at(c, f);
            if (total == 0.0) continue;
            double h = 0.0;
            for (std::size_t c = 0; c < W.rows; ++c) {
                double p = W.at(c, f) / total;
                if (p > 0.0) h -= p * std::log(p);
            }
            per_col[f] = log_c - h;  // inverted: concentration scores high
        }
        return aggregate_to_features(per_col, map);
    });
}

FeatureScore score_gini(const WeightViews& views, WeightVariant variant,
                        const FeatureMap& map) {
    return timed_score("gini", std::string(variant_name(variant)), [&] {
        const Matrix& W = select_view(views, variant);
        std::vector<double> per_col(W.cols, 0.0);
        for (std::size_t f = 0; f < W.cols; ++f) {
            double total = 0.0;
            for (std::size_t c = 0; c < W.rows; ++c) total += W.at(c, f);
            if (total == 0.0) continue;
            double g = 0.0;
            for (std::size_t c = 0; c < W.rows; ++c) {
                double p = W.at(c, f) / total;
                g += p * p;
            }
            per_col[f] = g;
        }
        return aggregate_to_features(per_col, map);
    });
}

FeatureScore score_stability(const WeightViews& views, std::span<const double> alpha,
                             WeightVariant variant, const FeatureMap& map) {
    return timed_score("stability", std::string(variant_name(variant)), [&] {
        constexpr double kEps = 1e-6;
        const auto& history = variant == WeightVariant::kNet ? views.per_epoch_abs_w
                                                             : views.per_epoch_abs_sum_w;
        const Matrix& shape = select_view(views, variant);
        std::vector<double> per_col(shape.cols, 0.0);
        if (history.empty()) return aggregate_to_features(per_col, map);
        if (alpha.size() != shape.rows)
            throw std::invalid_argument("stability: alpha/class mismatch");
        const double epochs = static_cast<double>(history.size());
        for (std::size_t f = 0; f < shape.cols; ++f) {
            double s = 0.0;
            for (std::size_t c = 0; c < shape.rows; ++c) {
                double mean = 0.0;
                for (const Matrix& snap : history) mean += snap.at(c, f);
                mean /= epochs;
                double var = 0.0;
                for (const Matrix& snap : history) {
                    double dev = snap.at(c, f) - mean;
                    var += dev * dev;
                }
                var /= epochs;
                s += alpha[c] * (mean / (std::sqrt(var) + kEps));
            }
            per_col[f] = s;
        }
        return aggregate_to_features(per_col, map);
    });
}

FeatureScore score_taylor_crit(const TMClassifier& model, const BinaryDataset& val) {
    return timed_score("taylor_crit", "-", [&] {
        require_model_data(model, val, "taylor_crit");
        auto per_col = taylor_columns(model, val.bits, val.labels);
        return aggregate_to_features(per_col, val.feature_map);
    });
}

FeatureScore score_var_dropout(const TMClassifier& model, const BinaryDataset& val,
                               int n_masks, std::uint64_t seed) {
    return timed_score("var_dropout", "-", [&] {
        require_model_data(model, val, "var_dropout");
        if (n_masks < 1) throw std::invalid_argument("var_dropout: n_masks must be >= 1");
        if (val.n_samples() == 0)
            throw std::invalid_argument("var_dropout: empty validation set");
        const int F = val.num_features();
        const std::size_t n = val.n_samples();
        Rng rng(seed);

        std::vector<double> kept_sum(n * F, 0.0), drop_sum(n * F, 0.0);
        std::vector<std::int32_t> kept_cnt(n * F, 0), drop_cnt(n * F, 0);
        std::vector<std::uint64_t> scratch;
        std::vector<int> kept_features;
        std::vector<char> keep(F);
        for (int m = 0; m < n_masks; ++m) {
            kept_features.clear();
            for (int f = 0; f < F; ++f) {
                keep[f] = rng.bernoulli(0.5) ? 1 : 0;
                if (keep[f]) kept_features.push_back(f);
            }
            auto mask = columns_mask(val.feature_map, val.num_columns(), kept_features);
            for (std::size_t i = 0; i < n; ++i) {
                double v = static_cast<double>(
                    masked_true_sum(model, val.bits.row(i), mask, val.labels[i], scratch));
                for (int f = 0; f < F; ++f) {
                    if (keep[f]) {
                        kept_sum[i * F + f] += v;
                        ++kept_cnt[i * F + f];
                    } else {
                        drop_sum[i * F + f] += v;
                        ++drop_cnt[i * F + f];
                    }
                }
            }
        }
        std::vector<double> scores(F, 0.0);
        for (int f = 0; f < F; ++f) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                auto k = kept_cnt[i * F + f];
                auto d = drop_cnt[i * F + f];
                if (k == 0 || d == 0) continue;  // no contrast observed
                acc += std::abs(kept_sum[i * F + f] / k - drop_sum[i * F + f] / d);
            }
            scores[f] = acc / static_cast<double>(n);
        }
        return scores;
    });
}

namespace {

std::vector<double> ablation_scores(const TMClassifier& model, const BinaryDataset& val,
                                    const char* who) {
    require_model_data(model, val, who);
    if (val.n_samples() == 0)
        throw std::invalid_argument(std::string(who) + ": empty validation set");
    const int F = val.num_features();
    auto all = full_mask(val.num_columns());
    const double base = masked_accuracy(model, val, all);
    std::vector<double> scores(F, 0.0);
    for (int f = 0; f < F; ++f) {
        auto mask = all;
        for (int col : val.feature_map.features[f].columns)
            mask[col / 64] &= ~(1ULL << (col % 64));
        scores[f] = base - masked_accuracy(model, val, mask);
    }
    return scores;
}

}  // namespace

FeatureScore score_ablation_impact(const TMClassifier& model, const BinaryDataset& val) {
    return timed_score("ablation_impact", "-",
                       [&] { return ablation_scores(model, val, "ablation_impact"); });
}

FeatureScore score_smooth_stabil(const TMClassifier& model, const BinaryDataset& val,
                                 int n_noise, double noise_rate, std::uint64_t seed) {
    return timed_score("smooth_stabil", "-", [&] {
        require_model_data(model, val, "smooth_stabil");
        if (n_noise < 1) throw std::invalid_argument("smooth_stabil: n_noise must be >= 1");
        if (noise_rate < 0.0 || noise_rate >= 0.5)
            throw std::invalid_argument("smooth_stabil: noise_rate must lie in [0, 0.5)");
        if (noise_rate == 0.0) {
            // Identity perturbation: equals the flip criterion exactly.
            auto per_col = taylor_columns(model, val.bits, val.labels);
            return aggregate_to_features(per_col, val.feature_map);
        }
        Rng rng(seed);
        const int d = val.num_columns();
        std::vector<double> mean(val.num_features(), 0.0);
        for (int t = 0; t < n_noise; ++t) {
            BitMatrix noisy = val.bits;
            for (std::size_t i = 0; i < noisy.rows(); ++i)
                for (int c = 0; c < d; ++c)
                    if (rng.bernoulli(noise_rate)) noisy.set(i, c, !noisy.get(i, c));
            auto per_col = taylor_columns(model, noisy, val.labels);
            auto per_feature = aggregate_to_features(per_col, val.feature_map);
            for (std::size_t f = 0; f < mean.size(); ++f) mean[f] += per_feature[f];
        }
        for (double& v : mean) v /= static_cast<double>(n_noise);
        return mean;
    });
}

// ----------------------------------------------------------------- wrappers

FeatureScore score_dropout_loo(const TMClassifier& model, const BinaryDataset& val) {
    // Same mechanics as ablation_impact, kept as its own method id.
    return timed_score("dropout_loo", "-",
                       [&] { return ablation_scores(model, val, "dropout_loo"); });
}

FeatureScore score_perm_importance(const TMClassifier& model, const BinaryDataset& val,
                                   int n_permutations, std::uint64_t seed) {
    return timed_score("perm_importance", "-", [&] {
        require_model_data(model, val, "perm_importance");
        if (n_permutations < 1)
            throw std::invalid_argument("perm_importance: n_permutations must be >= 1");
        if (val.n_samples() == 0)
            throw std::invalid_argument("perm_importance: empty validation set");
        const int F = val.num_features();
        const std::size_t n = val.n_samples();
        const double base = masked_accuracy(model, val, full_mask(val.num_columns()));

        Rng rng(seed);
        std::vector<double> scores(F, 0.0);
        std::vector<std::size_t> perm(n);
        std::vector<std::uint64_t> scratch;
        for (int f = 0; f < F; ++f) {
            std::array<int, 1> one{f};
            auto fmask = columns_mask(val.feature_map, val.num_columns(), one);
            double drop = 0.0;
            for (int p = 0; p < n_permutations; ++p) {
                std::iota(perm.begin(), perm.end(), std::size_t{0});
                rng.shuffle(perm);
                std::size_t correct = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    auto row = val.bits.row(i);
                    auto donor = val.bits.row(perm[i]);
                    scratch.assign(row.begin(), row.end());
                    for (std::size_t w = 0; w < scratch.size(); ++w)
                        scratch[w] = (scratch[w] & ~fmask[w]) | (donor[w] & fmask[w]);
                    if (model.predict(scratch) == val.labels[i]) ++correct;
                }
                drop += base - static_cast<double>(correct) / static_cast<double>(n);
            }
            scores[f] = drop / n_permutations;
        }
        return scores;
    });
}

// -------------------------------------------------------------- attribution

FeatureScore score_shapley_mc(const TMClassifier& model, const BinaryDataset& val,
                              int n_shapley_perms, std::uint64_t seed) {
    return timed_score("shapley", "-", [&] {
        require_model_data(model, val, "shapley");
        if (n_shapley_perms < 1)
            throw std::invalid_argument("shapley: n_shapley_perms must be >= 1");
        if (val.n_samples() == 0)
            throw std::invalid_argument("shapley: empty validation set");
        const int F = val.num_features();
        const std::size_t n = val.n_samples();

        std::vector<std::vector<std::uint64_t>> fmask(F);
        for (int f = 0; f < F; ++f) {
            std::array<int, 1> one{f};
            fmask[f] = columns_mask(val.feature_map, val.num_columns(), one);
        }

        Rng rng(seed);
        std::vector<double> scores(F, 0.0);
        std::vector<double> phi(F, 0.0);
        std::vector<int> order(F);
        std::vector<std::uint64_t> mask((static_cast<std::size_t>(val.num_columns()) + 63) / 64);
        std::vector<std::uint64_t> scratch;
        for (std::size_t i = 0; i < n; ++i) {
            auto row = val.bits.row(i);
            const int y = val.labels[i];
            std::fill(phi.begin(), phi.end(), 0.0);
            for (int p = 0; p < n_shapley_perms; ++p) {
                std::iota(order.begin(), order.end(), 0);
                rng.shuffle(order);
                std::fill(mask.begin(), mask.end(), 0ULL);
                double prev =
                    static_cast<double>(masked_true_sum(model, row, mask, y, scratch));
                for (int f : order) {
                    for (std::size_t w = 0; w < mask.size(); ++w) mask[w] |= fmask[f][w];
                    double cur =
                        static_cast<double>(masked_true_sum(model, row, mask, y, scratch));
                    phi[f] += cur - prev;
                    prev = cur;
                }
            }
            for (int f = 0; f < F; ++f) scores[f] += std::abs(phi[f] / n_shapley_perms);
        }
        for (double& s : scores) s /= static_cast<double>(n);
        return scores;
    });
}

FeatureScore score_lime(const TMClassifier& model, const BinaryDataset& val, int n_perturb,
                        double kernel_width, std::uint64_t seed) {
    return timed_score("lime", "-", [&] {
        require_model_data(model, val, "lime");
        if (n_perturb < 1) throw std::invalid_argument("lime: n_perturb must be >= 1");
        if (val.n_samples() == 0) throw std::invalid_argument("lime: empty validation set");
        const int F = val.num_features();
        const std::size_t n_explained = std::min<std::size_t>(val.n_samples(), 50);
        const double width =
            kernel_width > 0.0 ? kernel_width : 0.75 * std::sqrt(static_cast<double>(F));
        constexpr double kRidge = 1e-3;

        std::vector<std::vector<std::uint64_t>> fmask(F);
        for (int f = 0; f < F; ++f) {
            std::array<int, 1> one{f};
            fmask[f] = columns_mask(val.feature_map, val.num_columns(), one);
        }

        Rng rng(seed);
        std::vector<double> scores(F, 0.0);
        Eigen::MatrixXd design(n_perturb, F + 1);
        Eigen::VectorXd target(n_perturb), weights(n_perturb);
        std::vector<std::uint64_t> mask((static_cast<std::size_t>(val.num_columns()) + 63) / 64);
        std::vector<std::uint64_t> scratch;
        for (std::size_t i = 0; i < n_explained; ++i) {
            auto row = val.bits.row(i);
            const int y = val.labels[i];
            for (int p = 0; p < n_perturb; ++p) {
                int dropped = 0;
                std::fill(mask.begin(), mask.end(), 0ULL);
                design(p, 0) = 1.0;
                for (int f = 0; f < F; ++f) {
                    bool keep = rng.bernoulli(0.5);
                    design(p, f + 1) = keep ? 1.0 : 0.0;
                    if (keep)
                        for (std::size_t w = 0; w < mask.size(); ++w) mask[w] |= fmask[f][w];
                    else
                        ++dropped;
                }
                target(p) =
                    static_cast<double>(masked_true_sum(model, row, mask, y, scratch));
                double ham = static_cast<double>(dropped);
                weights(p) = std::exp(-(ham * ham) / (width * width));
            }
            Eigen::MatrixXd weighted = weights.asDiagonal() * design;
            Eigen::MatrixXd normal = design.transpose() * weighted;
            for (int f = 1; f <= F; ++f) normal(f, f) += kRidge;  // intercept unpenalized
            Eigen::VectorXd rhs = design.transpose() * (weights.asDiagonal() * target);
            Eigen::VectorXd beta = normal.ldlt().solve(rhs);
            for (int f = 0; f < F; ++f) scores[f] += std::abs(beta(f + 1));
        }
        for (double& s : scores) s /= static_cast<double>(n_explained);
        return scores;
    });
}

// ------------------------------------------------------------------ registry

const std::vector<MethodInfo>& all_methods() {
    static const std::vector<MethodInfo> methods{
        {"mutual_info", "MutualInfo", MethodCategory::kFilter, false},
        {"chi2", "Chi2", MethodCategory::kFilter, false},
        {"variance", "Variance", MethodCategory::kFilter, false},
        {"random", "Random", MethodCategory::kFilter, false},
        {"relevance", "Relevance", MethodCategory::kEmbedded, false},
        {"tm_weight", "TM-Weight", MethodCategory::kEmbedded, false},
        {"cw_sum", "CW-Sum", MethodCategory::kEmbedded, true},
        {"support_cw_sum", "Support-CW-Sum", MethodCategory::kEmbedded, true},
        {"cw_feat", "CW-Feat", MethodCategory::kEmbedded, true},
        {"margin", "Margin", MethodCategory::kEmbedded, true},
        {"entropy", "Entropy", MethodCategory::kEmbedded, true},
        {"gini", "Gini", MethodCategory::kEmbedded, true},
        {"stability", "Stability", MethodCategory::kEmbedded, true},
        {"taylor_crit", "TaylorCrit", MethodCategory::kEmbedded, false},
        {"var_dropout", "VarDropout", MethodCategory::kEmbedded, false},
        {"ablation_impact", "AblationImpact", MethodCategory::kEmbedded, false},
        {"smooth_stabil", "SmoothStabil", MethodCategory::kEmbedded, false},
        {"dropout_loo", "Dropout", MethodCategory::kWrapper, false},
        {"perm_importance", "PermImportance", MethodCategory::kWrapper, false},
        {"shapley", "SHAP", MethodCategory::kAttribution, false},
        {"lime", "LIME", MethodCategory::kAttribution, false},
    };
    return methods;
}

const MethodInfo* find_method(std::string_view id) {
    for (const auto& m : all_methods())
        if (m.id == id) return &m;
    return nullptr;
}

FeatureScore run_scorer(std::string_view method_id, WeightVariant variant,
                        const ScorerContext& ctx) {
    const MethodInfo* info = find_method(method_id);
    if (!info) {
        std::string valid;
        for (const auto& m : all_methods()) {
            if (!valid.empty()) valid += ", ";
            valid += m.id;
        }
        throw std::invalid_argument("unknown method '" + std::string(method_id) +
                                    "'; valid methods: " + valid);
    }
    auto need = [&](const void* p, const char* what) {
        if (!p)
            throw std::invalid_argument(info->id + ": scorer context missing " +
                                        std::string(what));
    };
    const auto& cfg = ctx.config;
    const std::string& id = info->id;
    FeatureScore out;
    if (id == "mutual_info" || id == "chi2" || id == "variance" || id == "random") {
        need(ctx.train, "train split");
        if (id == "mutual_info") out = score_mutual_info(*ctx.train);
        if (id == "chi2") out = score_chi2(*ctx.train);
        if (id == "variance") out = score_variance(*ctx.train);
        if (id == "random") out = score_random(*ctx.train, cfg.seed);
    } else if (id == "relevance" || id == "tm_weight") {
        need(ctx.model, "model");
        need(ctx.train, "train split");
        out = id == "relevance"
                  ? score_relevance(*ctx.model, ctx.alpha, ctx.train->feature_map)
                  : score_tm_weight(*ctx.model, ctx.train->feature_map);
    } else if (info->uses_variant) {
        need(ctx.views, "weight views");
        need(ctx.train, "train split");
        const FeatureMap& map = ctx.train->feature_map;
        if (id == "cw_sum") out = score_cw_sum(*ctx.views, ctx.alpha, variant, map);
        if (id == "support_cw_sum")
            out = score_support_cw_sum(*ctx.views, ctx.alpha, variant, map);
        if (id == "cw_feat") out = score_cw_feat(*ctx.views, variant, map);
        if (id == "margin") out = score_margin(*ctx.views, variant, map);
        if (id == "entropy") out = score_entropy(*ctx.views, variant, map);
        if (id == "gini") out = score_gini(*ctx.views, variant, map);
        if (id == "stability") out = score_stability(*ctx.views, ctx.alpha, variant, map);
    } else {
        need(ctx.model, "model");
        need(ctx.val, "validation split");
        if (id == "taylor_crit") out = score_taylor_crit(*ctx.model, *ctx.val);
        if (id == "var_dropout")
            out = score_var_dropout(*ctx.model, *ctx.val, cfg.n_masks, cfg.seed);
        if (id == "ablation_impact") out = score_ablation_impact(*ctx.model, *ctx.val);
        if (id == "smooth_stabil")
            out = score_smooth_stabil(*ctx.model, *ctx.val, cfg.n_noise, cfg.noise_rate,
                                      cfg.seed);
        if (id == "dropout_loo") out = score_dropout_loo(*ctx.model, *ctx.val);
        if (id == "perm_importance")
            out = score_perm_importance(*ctx.model, *ctx.val, cfg.n_permutations, cfg.seed);
        if (id == "shapley")
            out = score_shapley_mc(*ctx.model, *ctx.val, cfg.n_shapley_perms, cfg.seed);
        if (id == "lime")
            out = score_lime(*ctx.model, *ctx.val, cfg.lime_perturbations,
                             cfg.lime_kernel_width, cfg.seed);
    }
    if (!info->uses_variant) out.variant = "-";
    return out;
}

}  // namespace tmfs
