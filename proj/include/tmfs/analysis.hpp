#pragma once

#include <span>
#include <string>
#include <vector>

#include "tmfs/matrix.hpp"
#include "tmfs/protocols.hpp"
#include "tmfs/scorers.hpp"

namespace tmfs {

// Count of top-5 AUC appearances per (method, protocol), taken over
// datasets. Methods rank by descending AUC with ties broken by id.
struct TallyEntry {
    std::string method;  // variant-qualified id, e.g. "stability:posneg"
    std::string protocol;
    int count = 0;
};
std::vector<TallyEntry> top5_tally(std::span<const PruningCurve> curves);

// Speed-quality tradeoff rows: per dataset, AUC and ranking time min-max
// normalized across methods. Degenerate ranges collapse to 1.0 for AUC and
// 0.0 for time.
struct TradeoffRecord {
    std::string method;
    std::string dataset;
    std::string category;
    double auc = 0.0;        // raw mean AUC for the selected protocol
    double rank_time = 0.0;  // raw seconds
    double normalized_auc = 0.0;
    double normalized_time = 0.0;
};
struct CategoryMean {
    std::string category;
    std::string dataset;
    double normalized_auc = 0.0;
    double normalized_time = 0.0;
};

struct TradeoffTable {
    std::vector<TradeoffRecord> records;
    std::vector<CategoryMean> category_means;
};
TradeoffTable tradeoff_table(std::span<const PruningCurve> curves,
                             std::span<const FeatureScore> scores,
                             std::span<const std::string> score_datasets,
                             Protocol protocol = Protocol::kRoad);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);
inline double rank_correlation(const FeatureScore& a, const FeatureScore& b) {
    return spearman(a.scores, b.scores);
}

// One method's AUC profile across datasets for a fixed protocol; net and
// posneg variants of a method average into one profile unless a variant is
// explicitly selected upstream.
struct MethodProfile {
    std::string method_id;
    std::vector<double> road_auc_by_dataset;
};
std::vector<MethodProfile> build_profiles(std::span<const PruningCurve> curves,
                                          std::span<const std::string> dataset_order,
                                          Protocol protocol = Protocol::kRoad);

Matrix distance_matrix(std::span<const MethodProfile> profiles);

// Agglomerative average-linkage clustering. Cluster ids follow the usual
// convention: leaves are 0..n-1, the i-th merge creates cluster n+i. Ties
// break on the smallest (i, j) pair.
struct Dendrogram {
    struct Merge {
        int a = 0, b = 0;
        double height = 0.0;
        int size = 0;
    };
    std::vector<Merge> merges;
    std::vector<std::string> leaves;
};
Dendrogram average_linkage(const Matrix& dist, std::vector<std::string> leaves = {});

// Reshapes per-feature scores to a rows x cols grid (row-major), min-max
// normalized; a constant score vector maps to all zeros.
Matrix heatmap_export(const FeatureScore& score, int rows, int cols);

}  // namespace tmfs
