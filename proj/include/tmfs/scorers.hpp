#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmfs/dataset.hpp"
#include "tmfs/weight_views.hpp"

namespace tmfs {

class TMClassifier;

enum class WeightVariant { kNet, kPosNeg };
enum class MethodCategory { kFilter, kEmbedded, kWrapper, kAttribution };

std::string_view variant_name(WeightVariant v);
std::string_view category_name(MethodCategory c);

// One scorer's output over the original features. Higher score means more
// important for every method. The ranking orders features by descending
// score with ties broken by ascending feature index.
struct FeatureScore {
    std::string method_id;
    std::string variant;  // "net", "posneg", or "-" for variant-free methods
    std::vector<double> scores;
    std::vector<int> ranking;
    double rank_time_seconds = 0.0;
};

struct ScorerConfig {
    WeightVariant variant = WeightVariant::kNet;
    int n_masks = 64;            // VarDropout
    int n_noise = 8;             // SmoothStabil copies
    int n_permutations = 8;      // PermImportance
    int n_shapley_perms = 32;    // SHAP
    double noise_rate = 0.05;    // SmoothStabil flip probability
    int lime_perturbations = 256;
    double lime_kernel_width = 0.0;  // <= 0 selects 0.75 * sqrt(F)
    std::uint64_t seed = 0;

    void validate() const;
};

std::vector<int> make_ranking(const std::vector<double>& scores);

// Empirical class frequencies of the train split (the alpha weights).
std::vector<double> class_frequencies(const BinaryDataset& train);

// --- Filters (train split only) ---
FeatureScore score_mutual_info(const BinaryDataset& train);
FeatureScore score_chi2(const BinaryDataset& train);
FeatureScore score_variance(const BinaryDataset& train);
FeatureScore score_random(const BinaryDataset& data, std::uint64_t seed);

// --- Embedded (TM internals) ---
FeatureScore score_relevance(const TMClassifier& model, std::span<const double> alpha,
                             const FeatureMap& map);
FeatureScore score_tm_weight(const TMClassifier& model, const FeatureMap& map);
FeatureScore score_cw_sum(const WeightViews& views, std::span<const double> alpha,
                          WeightVariant variant, const FeatureMap& map);
FeatureScore score_support_cw_sum(const WeightViews& views, std::span<const double> alpha,
                                  WeightVariant variant, const FeatureMap& map);
FeatureScore score_cw_feat(const WeightViews& views, WeightVariant variant,
                           const FeatureMap& map);
FeatureScore score_margin(const WeightViews& views, WeightVariant variant,
                          const FeatureMap& map);
FeatureScore score_entropy(const WeightViews& views, WeightVariant variant,
                           const FeatureMap& map);
FeatureScore score_gini(const WeightViews& views, WeightVariant variant,
                        const FeatureMap& map);
FeatureScore score_stability(const WeightViews& views, std::span<const double> alpha,
                             WeightVariant variant, const FeatureMap& map);
FeatureScore score_taylor_crit(const TMClassifier& model, const BinaryDataset& val);
FeatureScore score_var_dropout(const TMClassifier& model, const BinaryDataset& val,
                               int n_masks, std::uint64_t seed);
FeatureScore score_ablation_impact(const TMClassifier& model, const BinaryDataset& val);
FeatureScore score_smooth_stabil(const TMClassifier& model, const BinaryDataset& val,
                                 int n_noise, double noise_rate, std::uint64_t seed);

// --- Wrappers ---
FeatureScore score_dropout_loo(const TMClassifier& model, const BinaryDataset& val);
FeatureScore score_perm_importance(const TMClassifier& model, const BinaryDataset& val,
                                   int n_permutations, std::uint64_t seed);

// --- Attribution ---
FeatureScore score_shapley_mc(const TMClassifier& model, const BinaryDataset& val,
                              int n_shapley_perms, std::uint64_t seed);
FeatureScore score_lime(const TMClassifier& model, const BinaryDataset& val, int n_perturb,
                        double kernel_width, std::uint64_t seed);

// --- Registry ---
struct MethodInfo {
    std::string id;
    std::string display_name;
    MethodCategory category;
    bool uses_variant;
};

const std::vector<MethodInfo>& all_methods();
const MethodInfo* find_method(std::string_view id);  // nullptr when unknown

struct ScorerContext {
    const TMClassifier* model = nullptr;
    const BinaryDataset* train = nullptr;
    const BinaryDataset* val = nullptr;
    const WeightViews* views = nullptr;
    std::vector<double> alpha;
    ScorerConfig config;
};

// Dispatches a method id through its spec signature. Throws
// std::invalid_argument for unknown ids (message lists the valid ones).
FeatureScore run_scorer(std::string_view method_id, WeightVariant variant,
                        const ScorerContext& ctx);

}  // namespace tmfs
