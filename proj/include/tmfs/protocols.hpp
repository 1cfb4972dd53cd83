#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmfs/dataset.hpp"
#include "tmfs/tm.hpp"

namespace tmfs {

enum class Protocol { kInsertion, kDeletion, kRoar, kRoad };

std::string_view protocol_name(Protocol p);
Protocol parse_protocol(std::string_view name);

struct EvalConfig {
    Protocol protocol = Protocol::kDeletion;
    std::vector<int> k_grid;  // strictly ascending, within [1, n_features]
    int trials = 10;
    HyperParams model_params;
    std::uint64_t seed = 0;

    void validate(int n_features) const;
};

struct PruningCurve {
    std::string method_id;
    std::string variant;
    std::string protocol;
    std::string dataset;
    std::vector<int> k_values;
    std::vector<double> mean_acc, std_acc;          // test split
    std::vector<double> mean_val_acc, std_val_acc;  // validation split
    double auc = 0.0;                               // trapezoid over test accuracy
};

// Transforms a dataset under one protocol for the top-k ranked features:
// insertion keeps only the top-k feature columns live, deletion masks them,
// roar drops their column groups entirely, road replaces each top-k
// feature's bits per sample with those of a random marginal_source row
// (which re-encodes a draw from the feature's empirical train marginal).
// k = 0 is allowed and leaves the data unchanged (except roar's identity).
BinaryDataset apply_protocol(const BinaryDataset& data, std::span<const int> ranking, int k,
                             Protocol protocol, Rng& rng,
                             const BinaryDataset* marginal_source = nullptr);

// Trapezoidal area under accuracy over k normalized to [0, 1].
double trapezoid_auc(std::span<const int> k_values, std::span<const double> accuracy);

// All of 1..n for n <= 12, otherwise 10 evenly spaced counts incl. 1 and n.
std::vector<int> default_k_grid(int n_features);

// Retrains `trials` fresh models per k on the protocol-transformed train
// split and measures them on the transformed validation/test splits. Trial
// seeds derive from config.seed and the trial index only, so identity
// transformations reproduce the baseline bit-exactly.
PruningCurve evaluate_curve(const BinaryDataset& train, const BinaryDataset& val,
                            const BinaryDataset& test, std::span<const int> ranking,
                            const EvalConfig& config);

}  // namespace tmfs
