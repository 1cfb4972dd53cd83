#include "tmfs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace tmfs {

namespace {

std::string qualified_id(const std::string& method, const std::string& variant) {
    return variant.empty() || variant == "-" ? method : method + ":" + variant;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::vector<TallyEntry> top5_tally(std::span<const PruningCurve> curves) {
    if (curves.empty()) throw std::invalid_argument("top5_tally: no curves");
    // (dataset, protocol) -> [(method, auc)]
    std::map<std::pair<std::string, std::string>,
             std::vector<std::pair<std::string, double>>>
        cells;
    for (const auto& c : curves)
        cells[{c.dataset, c.protocol}].emplace_back(qualified_id(c.method_id, c.variant),
                                                    c.auc);
    std::map<std::pair<std::string, std::string>, int> counts;  // (method, protocol)
    for (auto& [key, entries] : cells) {
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        const std::size_t top = std::min<std::size_t>(5, entries.size());
        for (std::size_t i = 0; i < top; ++i) ++counts[{entries[i].first, key.second}];
    }
    std::vector<TallyEntry> out;
    for (const auto& [key, count] : counts) out.push_back({key.first, key.second, count});
    return out;
}

TradeoffTable tradeoff_table(std::span<const PruningCurve> curves,
                             std::span<const FeatureScore> scores,
                             std::span<const std::string> score_datasets,
                             Protocol protocol) {
    if (scores.size() != score_datasets.size())
        throw std::invalid_argument("tradeoff_table: scores/datasets size mismatch");
    const std::string proto(protocol_name(protocol));

    // (dataset, method) -> mean auc / rank time
    std::map<std::pair<std::string, std::string>, std::pair<double, int>> auc_acc;
    for (const auto& c : curves) {
        if (c.protocol != proto) continue;
        auto& slot = auc_acc[{c.dataset, qualified_id(c.method_id, c.variant)}];
        slot.first += c.auc;
        slot.second += 1;
    }
    std::map<std::pair<std::string, std::string>, double> times;
    for (std::size_t i = 0; i < scores.size(); ++i)
        times[{score_datasets[i], qualified_id(scores[i].method_id, scores[i].variant)}] =
            scores[i].rank_time_seconds;

    std::set<std::string> datasets;
    for (const auto& [key, _] : auc_acc) datasets.insert(key.first);

    TradeoffTable table;
    for (const auto& dataset : datasets) {
        std::vector<TradeoffRecord> rows;
        for (const auto& [key, acc] : auc_acc) {
            if (key.first != dataset) continue;
            auto t = times.find(key);
            if (t == times.end())
                throw std::invalid_argument("tradeoff_table: missing rank time for " +
                                            key.second + " on " + dataset);
            TradeoffRecord rec;
            rec.method = key.second;
            rec.dataset = dataset;
            std::string base = key.second.substr(0, key.second.find(':'));
            const MethodInfo* info = find_method(base);
            rec.category = info ? std::string(category_name(info->category)) : "?";
            rec.auc = acc.first / acc.second;
            rec.rank_time = t->second;
            rows.push_back(std::move(rec));
        }
        double auc_lo = std::numeric_limits<double>::infinity(), auc_hi = -auc_lo;
        double t_lo = auc_lo, t_hi = -auc_lo;
        for (const auto& r : rows) {
            auc_lo = std::min(auc_lo, r.auc);
            auc_hi = std::max(auc_hi, r.auc);
            t_lo = std::min(t_lo, r.rank_time);
            t_hi = std::max(t_hi, r.rank_time);
        }
        for (auto& r : rows) {
            r.normalized_auc =
                auc_hi > auc_lo ? (r.auc - auc_lo) / (auc_hi - auc_lo) : 1.0;
            r.normalized_time =
                t_hi > t_lo ? (r.rank_time - t_lo) / (t_hi - t_lo) : 0.0;
        }
        std::map<std::string, std::pair<CategoryMean, int>> by_category;
        for (const auto& r : rows) {
            auto& slot = by_category[r.category];
            slot.first.category = r.category;
            slot.first.dataset = dataset;
            slot.first.normalized_auc += r.normalized_auc;
            slot.first.normalized_time += r.normalized_time;
            slot.second += 1;
        }
        for (auto& [_, slot] : by_category) {
            slot.first.normalized_auc /= slot.second;
            slot.first.normalized_time /= slot.second;
            table.category_means.push_back(slot.first);
        }
        table.records.insert(table.records.end(), rows.begin(), rows.end());
    }
    return table;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("spearman: mismatched or empty inputs");
    auto ra = average_ranks(a);
    auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double mean = (n + 1.0) / 2.0;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - mean) * (rb[i] - mean);
        var_a += (ra[i] - mean) * (ra[i] - mean);
        var_b += (rb[i] - mean) * (rb[i] - mean);
    }
    if (var_a == 0.0 || var_b == 0.0) return 0.0;  // a constant vector has no ranking
    return cov / std::sqrt(var_a * var_b);
}

std::vector<MethodProfile> build_profiles(std::span<const PruningCurve> curves,
                                          std::span<const std::string> dataset_order,
                                          Protocol protocol) {
    const std::string proto(protocol_name(protocol));
    // method base id -> dataset -> (sum, count) over variants
    std::map<std::string, std::map<std::string, std::pair<double, int>>> acc;
    for (const auto& c : curves) {
        if (c.protocol != proto) continue;
        auto& slot = acc[c.method_id][c.dataset];
        slot.first += c.auc;
        slot.second += 1;
    }
    std::vector<MethodProfile> profiles;
    for (const auto& [method, by_dataset] : acc) {
        MethodProfile p;
        p.method_id = method;
        for (const auto& dataset : dataset_order) {
            auto it = by_dataset.find(dataset);
            if (it == by_dataset.end())
                throw std::invalid_argument("build_profiles: method '" + method +
                                            "' is missing dataset '" + dataset + "'");
            p.road_auc_by_dataset.push_back(it->second.first / it->second.second);
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

Matrix distance_matrix(std::span<const MethodProfile> profiles) {
    const std::size_t n = profiles.size();
    Matrix dist(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (profiles[i].road_auc_by_dataset.size() != profiles[j].road_auc_by_dataset.size())
                throw std::invalid_argument("distance_matrix: profile length mismatch");
            double sq = 0.0;
            for (std::size_t k = 0; k < profiles[i].road_auc_by_dataset.size(); ++k) {
                double diff =
                    profiles[i].road_auc_by_dataset[k] - profiles[j].road_auc_by_dataset[k];
                sq += diff * diff;
            }
            dist.at(i, j) = dist.at(j, i) = std::sqrt(sq);
        }
    }
    return dist;
}

Dendrogram average_linkage(const Matrix& dist, std::vector<std::string> leaves) {
    const std::size_t n = dist.rows;
    if (n != dist.cols || n == 0)
        throw std::invalid_argument("average_linkage: need a square non-empty matrix");
    if (leaves.empty())
        for (std::size_t i = 0; i < n; ++i) leaves.push_back("leaf" + std::to_string(i));
    if (leaves.size() != n)
        throw std::invalid_argument("average_linkage: leaf label count mismatch");

    struct Cluster {
        int id;
        int size;
        std::vector<int> members;  // leaf indices
    };
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < n; ++i)
        active.push_back({static_cast<int>(i), 1, {static_cast<int>(i)}});

    auto linkage = [&](const Cluster& a, const Cluster& b) {
        double sum = 0.0;
        for (int x : a.members)
            for (int y : b.members) sum += dist.at(x, y);
        return sum / (static_cast<double>(a.members.size()) * b.members.size());
    };

    Dendrogram out;
    out.leaves = std::move(leaves);
    int next_id = static_cast<int>(n);
    while (active.size() > 1) {
        std::size_t best_i = 0, best_j = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                double d = linkage(active[i], active[j]);
                // ties break on the smallest (id_i, id_j) pair
                if (d < best) {
                    best = d;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        Cluster merged;
        merged.id = next_id++;
        merged.size = active[best_i].size + active[best_j].size;
        merged.members = active[best_i].members;
        merged.members.insert(merged.members.end(), active[best_j].members.begin(),
                              active[best_j].members.end());
        int id_a = std::min(active[best_i].id, active[best_j].id);
        int id_b = std::max(active[best_i].id, active[best_j].id);
        out.merges.push_back({id_a, id_b, best, merged.size});
        active.erase(active.begin() + best_j);
        active.erase(active.begin() + best_i);
        active.push_back(std::move(merged));
    }
    return out;
}

Matrix heatmap_export(const FeatureScore& score, int rows, int cols) {
    if (rows < 1 || cols < 1 ||
        static_cast<std::size_t>(rows) * cols != score.scores.size())
        throw std::invalid_argument("heatmap_export: grid size does not match feature count");
    double lo = *std::min_element(score.scores.begin(), score.scores.end());
    double hi = *std::max_element(score.scores.begin(), score.scores.end());
    Matrix grid(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double v = score.scores[static_cast<std::size_t>(r) * cols + c];
            grid.at(r, c) = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        }
    return grid;
}

}  // namespace tmfs
