#pragma once

#include <iosfwd>
#include <vector>

#include "tmfs/bitmatrix.hpp"
#include "tmfs/matrix.hpp"

namespace tmfs {

class TMClassifier;
struct FeatureMap;

// Which literal of each binarized column every clause includes.
struct LiteralIncidence {
    BitMatrix pos;  // M clauses x d columns
    BitMatrix neg;
};

LiteralIncidence literal_incidence(const TMClassifier& model);

// Per (class, column) clause-weight accumulations and their derived views.
// w_plus[c,f] sums weights of class-c clauses including the positive literal
// of column f; w_minus the negated literal. The "net" family is
// net = w_plus - w_minus, abs = |net|; the PosNeg family is
// sum = w_plus + w_minus, abs_sum = |sum|.
struct WeightViews {
    Matrix w_plus, w_minus;
    Matrix net_w, abs_w;
    Matrix sum_w, abs_sum_w;
    // Per-epoch snapshots of the two absolute views, rebuilt from the
    // model's weight history against the final literal incidence.
    std::vector<Matrix> per_epoch_abs_w;
    std::vector<Matrix> per_epoch_abs_sum_w;
};

WeightViews accumulate_weights(const TMClassifier& model, const LiteralIncidence& incidence,
                               bool with_history = true);

// Collapses a (classes x columns) view to (classes x original features) by
// summing each feature's column group. The vector overload does the same
// for a per-column score vector.
Matrix aggregate_to_features(const Matrix& view, const FeatureMap& map);
std::vector<double> aggregate_to_features(const std::vector<double>& view,
                                          const FeatureMap& map);

// Delimited-text dump of the raw accumulations for external inspection.
void dump_weight_views(const WeightViews& views, std::ostream& out);

}  // namespace tmfs
