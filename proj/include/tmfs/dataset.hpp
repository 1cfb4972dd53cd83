#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tmfs/bitmatrix.hpp"

namespace tmfs {

struct RawDataset {
    std::string name;
    std::size_t n_features = 0;
    std::vector<double> values;  // row-major, n_samples x n_features
    std::vector<int> labels;     // in [0, num_classes)
    int num_classes = 0;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;  // index -> original label text

    std::size_t n_samples() const { return labels.size(); }
    double value(std::size_t r, std::size_t c) const { return values[r * n_features + c]; }
};

// Maps original features to their binarized column groups. Thresholds are
// strictly increasing within a group; bit b of a group is 1 iff the raw
// value is >= thresholds[b].
struct FeatureMap {
    struct Group {
        std::vector<int> columns;        // ascending column indices
        std::vector<double> thresholds;  // one per column
        bool is_binary = false;          // passed through as a single column
        bool is_constant = false;        // dead all-zero column (warning flag)
    };
    std::vector<Group> features;

    int num_columns() const;
    int num_features() const { return static_cast<int>(features.size()); }
    // feature index owning each column; throws if columns do not partition [0, d).
    std::vector<int> column_owner() const;

    static FeatureMap identity(int d);
};

struct BinaryDataset {
    std::string name;
    BitMatrix bits;  // n_samples x d binarized columns
    std::vector<int> labels;
    int num_classes = 0;
    FeatureMap feature_map;

    std::size_t n_samples() const { return labels.size(); }
    int num_columns() const { return static_cast<int>(bits.cols()); }
    int num_features() const { return feature_map.num_features(); }
};

struct Split {
    std::vector<std::size_t> train, val, test;
};

// Delimited text with a required header row; numeric feature cells;
// categorical labels mapped to 0..C-1 in first-appearance order.
RawDataset load_csv(const std::string& path, const std::string& label_column,
                    char delimiter = ',');

// Thermometer binarization with `bins` equal-width thresholds per feature,
// fitted on fit_indices rows only. Already-binary features pass through as
// a single column; features constant on the fit rows become a single dead
// all-zero column flagged in the FeatureMap.
BinaryDataset thermometer_encode(const RawDataset& raw, int bins,
                                 std::span<const std::size_t> fit_indices);

// Per-class largest-remainder allocation into train/val/test; every part
// gets at least one sample of each class. Requires >= 3 samples per class.
Split stratified_split(const std::vector<int>& labels,
                       std::array<double, 3> ratios, std::uint64_t seed);
inline Split stratified_split(const std::vector<int>& labels, std::uint64_t seed) {
    return stratified_split(labels, {0.6, 0.2, 0.2}, seed);
}

// Synthetic generators (pure functions of their parameters).
RawDataset generate_parity(int n, int d, int k, std::uint64_t seed);
RawDataset generate_hierarchical_bool(int n, int d, std::uint64_t seed);
RawDataset generate_feature_interaction(int n, int d, std::uint64_t seed);

// Row subset sharing the feature map.
BinaryDataset take_rows(const BinaryDataset& data, std::span<const std::size_t> indices);

// One line per sample: d '0'/'1' characters, a space, the label.
void export_bits(const BinaryDataset& data, std::ostream& out);

}  // namespace tmfs
