#include "tmfs/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "tmfs/rng.hpp"

namespace tmfs {

std::string_view protocol_name(Protocol p) {
    switch (p) {
        case Protocol::kInsertion: return "insertion";
        case Protocol::kDeletion: return "deletion";
        case Protocol::kRoar: return "roar";
        case Protocol::kRoad: return "road";
    }
    return "?";
}

Protocol parse_protocol(std::string_view name) {
    if (name == "insertion") return Protocol::kInsertion;
    if (name == "deletion") return Protocol::kDeletion;
    if (name == "roar") return Protocol::kRoar;
    if (name == "road") return Protocol::kRoad;
    throw std::invalid_argument("unknown protocol '" + std::string(name) +
                                "'; valid protocols: insertion, deletion, roar, road");
}

void EvalConfig::validate(int n_features) const {
    if (trials < 1) throw std::invalid_argument("eval config: trials must be >= 1");
    model_params.validate();
    if (k_grid.empty()) throw std::invalid_argument("eval config: empty k grid");
    for (std::size_t i = 0; i < k_grid.size(); ++i) {
        if (k_grid[i] < 1 || k_grid[i] > n_features)
            throw std::invalid_argument("eval config: k outside [1, n_features]");
        if (i > 0 && k_grid[i] <= k_grid[i - 1])
            throw std::invalid_argument("eval config: k grid must be strictly ascending");
    }
}

namespace {

void check_ranking(std::span<const int> ranking, int n_features) {
    if (static_cast<int>(ranking.size()) != n_features)
        throw std::invalid_argument("ranking does not cover all features");
    std::vector<bool> seen(n_features, false);
    for (int f : ranking) {
        if (f < 0 || f >= n_features || seen[f])
            throw std::invalid_argument("ranking is not a permutation of the features");
        seen[f] = true;
    }
}

BinaryDataset mask_features(const BinaryDataset& data, std::span<const int> keep) {
    std::vector<std::uint64_t> mask(data.bits.words_per_row(), 0);
    for (int f : keep)
        for (int col : data.feature_map.features[f].columns)
            mask[col / 64] |= 1ULL << (col % 64);
    BinaryDataset out = data;
    for (std::size_t r = 0; r < out.n_samples(); ++r) {
        auto row = out.bits.row(r);
        for (std::size_t w = 0; w < row.size(); ++w) row[w] &= mask[w];
    }
    return out;
}

BinaryDataset drop_features(const BinaryDataset& data, std::span<const int> dropped) {
    std::set<int> gone(dropped.begin(), dropped.end());
    FeatureMap new_map;
    std::vector<int> old_columns;  // column index in the source per new column
    for (int f = 0; f < data.num_features(); ++f) {
        if (gone.count(f)) continue;
        FeatureMap::Group group = data.feature_map.features[f];
        std::vector<int> new_cols;
        for (int col : group.columns) {
            new_cols.push_back(static_cast<int>(old_columns.size()));
            old_columns.push_back(col);
        }
        group.columns = std::move(new_cols);
        new_map.features.push_back(std::move(group));
    }
    BinaryDataset out;
    out.name = data.name;
    out.labels = data.labels;
    out.num_classes = data.num_classes;
    out.feature_map = std::move(new_map);
    out.bits = BitMatrix(data.n_samples(), old_columns.size());
    for (std::size_t r = 0; r < data.n_samples(); ++r)
        for (std::size_t c = 0; c < old_columns.size(); ++c)
            if (data.bits.get(r, old_columns[c])) out.bits.set(r, c, true);
    return out;
}

BinaryDataset impute_marginal(const BinaryDataset& data, std::span<const int> replaced,
                              const BinaryDataset& source, Rng& rng) {
    if (source.num_columns() != data.num_columns())
        throw std::invalid_argument("road: marginal source/data column mismatch");
    if (source.n_samples() == 0) throw std::invalid_argument("road: empty marginal source");
    BinaryDataset out = data;
    for (std::size_t r = 0; r < out.n_samples(); ++r) {
        for (int f : replaced) {
            std::size_t donor = rng.uniform_below(source.n_samples());
            for (int col : data.feature_map.features[f].columns)
                out.bits.set(r, col, source.bits.get(donor, col));
        }
    }
    return out;
}

}  // namespace

BinaryDataset apply_protocol(const BinaryDataset& data, std::span<const int> ranking, int k,
                             Protocol protocol, Rng& rng,
                             const BinaryDataset* marginal_source) {
    const int n_features = data.num_features();
    check_ranking(ranking, n_features);
    if (k < 0 || k > n_features)
        throw std::invalid_argument("apply_protocol: k out of range");
    std::vector<int> top(ranking.begin(), ranking.begin() + k);
    std::vector<int> rest(ranking.begin() + k, ranking.end());
    switch (protocol) {
        case Protocol::kInsertion: return mask_features(data, top);
        case Protocol::kDeletion: return mask_features(data, rest);
        case Protocol::kRoar: return drop_features(data, top);
        case Protocol::kRoad: {
            if (!marginal_source)
                throw std::invalid_argument("road requires a marginal source dataset");
            return impute_marginal(data, top, *marginal_source, rng);
        }
    }
    throw std::invalid_argument("apply_protocol: unknown protocol");
}

double trapezoid_auc(std::span<const int> k_values, std::span<const double> accuracy) {
    if (k_values.size() != accuracy.size() || k_values.empty())
        throw std::invalid_argument("trapezoid_auc: mismatched or empty inputs");
    if (k_values.size() == 1) return accuracy[0];
    const double lo = static_cast<double>(k_values.front());
    const double hi = static_cast<double>(k_values.back());
    double auc = 0.0;
    for (std::size_t i = 1; i < k_values.size(); ++i) {
        double t0 = (k_values[i - 1] - lo) / (hi - lo);
        double t1 = (k_values[i] - lo) / (hi - lo);
        auc += (t1 - t0) * 0.5 * (accuracy[i - 1] + accuracy[i]);
    }
    return auc;
}

std::vector<int> default_k_grid(int n_features) {
    if (n_features < 1) throw std::invalid_argument("default_k_grid: no features");
    std::vector<int> grid;
    if (n_features <= 12) {
        grid.resize(n_features);
        std::iota(grid.begin(), grid.end(), 1);
        return grid;
    }
    for (int i = 0; i < 10; ++i) {
        double t = static_cast<double>(i) / 9.0;
        int k = 1 + static_cast<int>(std::lround(t * (n_features - 1)));
        if (grid.empty() || k > grid.back()) grid.push_back(k);
    }
    return grid;
}

PruningCurve evaluate_curve(const BinaryDataset& train, const BinaryDataset& val,
                            const BinaryDataset& test, std::span<const int> ranking,
                            const EvalConfig& config) {
    config.validate(train.num_features());
    PruningCurve curve;
    curve.protocol = std::string(protocol_name(config.protocol));
    curve.dataset = train.name;
    curve.k_values = config.k_grid;

    for (int k : config.k_grid) {
        BinaryDataset t_train, t_val, t_test;
        try {
            std::string tag = "road:k=" + std::to_string(k);
            Rng rng_train(derive_seed(config.seed, tag + ":train"));
            Rng rng_val(derive_seed(config.seed, tag + ":val"));
            Rng rng_test(derive_seed(config.seed, tag + ":test"));
            t_train = apply_protocol(train, ranking, k, config.protocol, rng_train, &train);
            t_val = apply_protocol(val, ranking, k, config.protocol, rng_val, &train);
            t_test = apply_protocol(test, ranking, k, config.protocol, rng_test, &train);
        } catch (const std::exception& e) {
            throw std::runtime_error("protocol transform failed at k=" + std::to_string(k) +
                                     ": " + e.what());
        }

        double acc_sum = 0, acc_sq = 0, val_sum = 0, val_sq = 0;
        for (int trial = 0; trial < config.trials; ++trial) {
            try {
                HyperParams params = config.model_params;
                params.seed = derive_seed(config.seed, "trial:" + std::to_string(trial));
                TMClassifier model(params, t_train.num_columns());
                model.fit(t_train, params.epochs);
                double acc = model.accuracy(t_test);
                double vacc = model.accuracy(t_val);
                acc_sum += acc;
                acc_sq += acc * acc;
                val_sum += vacc;
                val_sq += vacc * vacc;
            } catch (const std::exception& e) {
                throw std::runtime_error("training failed at k=" + std::to_string(k) +
                                         ", trial=" + std::to_string(trial) + ": " + e.what());
            }
        }
        const double n = static_cast<double>(config.trials);
        double mean = acc_sum / n;
        double vmean = val_sum / n;
        curve.mean_acc.push_back(mean);
        curve.std_acc.push_back(std::sqrt(std::max(0.0, acc_sq / n - mean * mean)));
        curve.mean_val_acc.push_back(vmean);
        curve.std_val_acc.push_back(std::sqrt(std::max(0.0, val_sq / n - vmean * vmean)));
    }
    curve.auc = trapezoid_auc(curve.k_values, curve.mean_acc);
    return curve;
}

}  // namespace tmfs
