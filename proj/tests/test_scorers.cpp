#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "tmfs/rng.hpp"
#include "tmfs/scorers.hpp"
#include "tmfs/tm.hpp"
#include "tmfs/weight_views.hpp"

using namespace tmfs;

namespace {

Clause lit_clause(int d, std::initializer_list<int> literals, int class_id, int weight,
                  int polarity = +1) {
    Clause cl;
    cl.ta_state.assign(2 * d, 128);
    for (int lit : literals) {
        int f = (lit > 0 ? lit : -lit) - 1;
        cl.ta_state[lit > 0 ? f : d + f] = 129;
    }
    cl.class_id = class_id;
    cl.polarity = static_cast<std::int8_t>(polarity);
    cl.weight = weight;
    cl.rebuild_includes(d, 128);
    return cl;
}

// Fixture F1: clause A (class 0, +, w=2, {x1}); clause B (class 1, +, w=4,
// {x1, not-x2}); C=2, d=3, identity feature map, alpha = (0.5, 0.5).
struct F1 {
    TMClassifier model;
    WeightViews views;
    FeatureMap map = FeatureMap::identity(3);
    std::vector<double> alpha{0.5, 0.5};

    F1() {
        HyperParams p;
        p.num_clauses = 4;
        p.num_classes = 2;
        model = TMClassifier::from_clauses(
            p, 3, {lit_clause(3, {1}, 0, 2), lit_clause(3, {1, -2}, 1, 4)});
        views = accumulate_weights(model, literal_incidence(model));
    }
};

BinaryDataset binary_rows(const std::vector<std::vector<bool>>& rows,
                          const std::vector<int>& labels, int num_classes) {
    BinaryDataset data;
    int d = rows.empty() ? 0 : static_cast<int>(rows[0].size());
    data.bits = BitMatrix(rows.size(), d);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < d; ++c) data.bits.set(r, c, rows[r][c]);
    data.labels = labels;
    data.num_classes = num_classes;
    data.feature_map = FeatureMap::identity(d);
    return data;
}

void check_valid(const FeatureScore& fs, std::size_t n_features) {
    REQUIRE(fs.scores.size() == n_features);
    REQUIRE(fs.ranking.size() == n_features);
    CHECK(fs.rank_time_seconds > 0.0);
    std::vector<bool> seen(n_features, false);
    for (int f : fs.ranking) {
        REQUIRE(f >= 0);
        REQUIRE(f < static_cast<int>(n_features));
        CHECK_FALSE(seen[f]);
        seen[f] = true;
    }
    for (std::size_t i = 1; i < fs.ranking.size(); ++i)
        CHECK(fs.scores[fs.ranking[i - 1]] >= fs.scores[fs.ranking[i]]);
    for (double s : fs.scores) CHECK(std::isfinite(s));
}

}  // namespace

TEST_CASE("ranking is descending with index tie-break") {
    auto r = make_ranking({1.0, 3.0, 3.0, 0.5, 3.0});
    CHECK(r == std::vector<int>{1, 2, 4, 0, 3});
}

TEST_CASE("mutual information examples") {
    SUBCASE("column identical to balanced label -> ln 2") {
        auto data = binary_rows({{1}, {0}, {1}, {0}}, {1, 0, 1, 0}, 2);
        auto fs = score_mutual_info(data);
        CHECK(fs.scores[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("constant column -> 0") {
        auto data = binary_rows({{0}, {0}, {0}, {0}}, {1, 0, 1, 0}, 2);
        auto fs = score_mutual_info(data);
        CHECK(fs.scores[0] == doctest::Approx(0.0));
    }
}

TEST_CASE("chi-squared examples") {
    SUBCASE("perfect association, balanced 2x2, n=8 -> 8") {
        std::vector<std::vector<bool>> rows(8, std::vector<bool>{0});
        std::vector<int> labels(8);
        for (int i = 0; i < 8; ++i) {
            rows[i][0] = i < 4;
            labels[i] = i < 4 ? 1 : 0;
        }
        auto fs = score_chi2(binary_rows(rows, labels, 2));
        CHECK(fs.scores[0] == doctest::Approx(8.0).epsilon(1e-12));
    }
    SUBCASE("exact independence -> 0") {
        auto data = binary_rows({{1}, {1}, {0}, {0}, {1}, {1}, {0}, {0}},
                                {0, 1, 0, 1, 1, 0, 1, 0}, 2);
        auto fs = score_chi2(data);
        CHECK(fs.scores[0] == doctest::Approx(0.0));
    }
    SUBCASE("constant column -> 0") {
        auto data = binary_rows({{1}, {1}, {1}, {1}}, {0, 1, 0, 1}, 2);
        auto fs = score_chi2(data);
        CHECK(fs.scores[0] == doctest::Approx(0.0));
    }
}

TEST_CASE("variance examples") {
    SUBCASE("balanced column -> 0.25, constant -> 0") {
        auto data = binary_rows({{1, 0}, {0, 0}, {1, 0}, {0, 0}}, {0, 1, 0, 1}, 2);
        auto fs = score_variance(data);
        CHECK(fs.scores[0] == doctest::Approx(0.25));
        CHECK(fs.scores[1] == doctest::Approx(0.0));
    }
    SUBCASE("p=0.1 -> 0.09") {
        std::vector<std::vector<bool>> rows(10, std::vector<bool>{0});
        rows[3][0] = true;
        std::vector<int> labels(10, 0);
        labels[0] = 1;
        auto fs = score_variance(binary_rows(rows, labels, 2));
        CHECK(fs.scores[0] == doctest::Approx(0.09).epsilon(1e-12));
    }
}

TEST_CASE("random scorer is deterministic in [0,1]") {
    auto data = binary_rows({{1, 0, 1}}, {0}, 2);
    auto a = score_random(data, 9);
    auto b = score_random(data, 9);
    CHECK(a.scores == b.scores);
    CHECK(a.ranking == b.ranking);
    for (double s : a.scores) {
        CHECK(s >= 0.0);
        CHECK(s < 1.0);
    }
    auto one = binary_rows({{1}}, {0}, 2);
    CHECK(score_random(one, 3).ranking == std::vector<int>{0});
}

TEST_CASE("fixture F1 embedded scorer hand values") {
    F1 f1;
    SUBCASE("relevance (1, 0.5, 0)") {
        auto fs = score_relevance(f1.model, f1.alpha, f1.map);
        CHECK(fs.scores[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fs.scores[1] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(fs.scores[2] == doctest::Approx(0.0));
    }
    SUBCASE("tm_weight (4, 4, 0)") {
        auto fs = score_tm_weight(f1.model, f1.map);
        CHECK(fs.scores == std::vector<double>{4, 4, 0});
    }
    SUBCASE("cw_sum net (3, 2, 0)") {
        auto fs = score_cw_sum(f1.views, f1.alpha, WeightVariant::kNet, f1.map);
        CHECK(fs.scores[0] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(fs.scores[1] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(fs.scores[2] == doctest::Approx(0.0));
    }
    SUBCASE("cw_feat net (10/3, 4, 0)") {
        auto fs = score_cw_feat(f1.views, WeightVariant::kNet, f1.map);
        CHECK(fs.scores[0] == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
        CHECK(fs.scores[1] == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(fs.scores[2] == doctest::Approx(0.0));
    }
    SUBCASE("margin (2, 4, 0)") {
        auto fs = score_margin(f1.views, WeightVariant::kNet, f1.map);
        CHECK(fs.scores == std::vector<double>{2, 4, 0});
    }
    SUBCASE("entropy f1 ~ 0.0566, one-hot column -> ln 2, zero column -> 0") {
        auto fs = score_entropy(f1.views, WeightVariant::kNet, f1.map);
        CHECK(fs.scores[0] == doctest::Approx(0.0566330).epsilon(1e-4));
        CHECK(fs.scores[1] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(fs.scores[2] == doctest::Approx(0.0));
    }
    SUBCASE("gini f1 = 5/9, one-hot -> 1, zero -> 0") {
        auto fs = score_gini(f1.views, WeightVariant::kNet, f1.map);
        CHECK(fs.scores[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
        CHECK(fs.scores[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fs.scores[2] == doctest::Approx(0.0));
    }
}

TEST_CASE("support_cw_sum weights classes by 1 - alpha") {
    WeightViews views;
    views.abs_w = Matrix(2, 1);
    views.abs_w.at(0, 0) = 4;
    views.abs_w.at(1, 0) = 8;
    views.abs_sum_w = views.abs_w;
    std::vector<double> alpha{0.25, 0.75};
    auto fs = score_support_cw_sum(views, alpha, WeightVariant::kNet, FeatureMap::identity(1));
    CHECK(fs.scores[0] == doctest::Approx(0.75 * 4 + 0.25 * 8).epsilon(1e-12));

    // Uniform alpha over 2 classes: equals cw_sum.
    std::vector<double> uniform{0.5, 0.5};
    auto sup = score_support_cw_sum(views, uniform, WeightVariant::kNet, FeatureMap::identity(1));
    auto cws = score_cw_sum(views, uniform, WeightVariant::kNet, FeatureMap::identity(1));
    CHECK(sup.scores == cws.scores);
}

TEST_CASE("posneg variant consumes absSumW") {
    // One clause with x1 included positively, another same class with not-x1:
    // netW cancels, sumW does not.
    HyperParams p;
    p.num_clauses = 4;
    p.num_classes = 2;
    auto model = TMClassifier::from_clauses(
        p, 1, {lit_clause(1, {1}, 0, 3), lit_clause(1, {-1}, 0, 3)});
    auto views = accumulate_weights(model, literal_incidence(model));
    CHECK(views.abs_w.at(0, 0) == 0);
    CHECK(views.abs_sum_w.at(0, 0) == 6);
    std::vector<double> alpha{1.0, 0.0};
    auto net = score_cw_sum(views, alpha, WeightVariant::kNet, FeatureMap::identity(1));
    auto posneg = score_cw_sum(views, alpha, WeightVariant::kPosNeg, FeatureMap::identity(1));
    CHECK(net.scores[0] == 0.0);
    CHECK(posneg.scores[0] == 6.0);
    CHECK(net.variant == "net");
    CHECK(posneg.variant == "posneg");
}

TEST_CASE("stability examples") {
    auto views_with_history = [](std::vector<double> history) {
        WeightViews views;
        views.abs_w = Matrix(1, 1);
        views.abs_sum_w = Matrix(1, 1);
        for (double h : history) {
            Matrix snap(1, 1);
            snap.at(0, 0) = h;
            views.per_epoch_abs_w.push_back(snap);
            views.per_epoch_abs_sum_w.push_back(snap);
        }
        return views;
    };
    std::vector<double> alpha{1.0};
    auto map = FeatureMap::identity(1);
    SUBCASE("constant nonzero history -> mean/epsilon") {
        auto views = views_with_history({2, 2, 2});
        auto fs = score_stability(views, alpha, WeightVariant::kNet, map);
        CHECK(fs.scores[0] == doctest::Approx(2e6).epsilon(1e-9));
    }
    SUBCASE("all-zero history -> 0") {
        auto views = views_with_history({0, 0, 0});
        auto fs = score_stability(views, alpha, WeightVariant::kNet, map);
        CHECK(fs.scores[0] == doctest::Approx(0.0));
    }
    SUBCASE("history (0,4): mean 2, population std 2 -> ~1") {
        auto views = views_with_history({0, 4});
        auto fs = score_stability(views, alpha, WeightVariant::kNet, map);
        CHECK(fs.scores[0] == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("no history -> all zero") {
        WeightViews views;
        views.abs_w = Matrix(1, 1);
        views.abs_sum_w = Matrix(1, 1);
        auto fs = score_stability(views, alpha, WeightVariant::kNet, map);
        CHECK(fs.scores[0] == 0.0);
    }
}

TEST_CASE("taylor criterion examples") {
    HyperParams p;
    p.num_clauses = 4;
    p.num_classes = 2;
    auto model = TMClassifier::from_clauses(p, 3, {lit_clause(3, {1}, 0, 3)});
    SUBCASE("single clause, sample with x1=1 -> |delta| = 3 on f1") {
        auto val = binary_rows({{1, 0, 0}}, {0}, 2);
        auto fs = score_taylor_crit(model, val);
        CHECK(fs.scores[0] == doctest::Approx(3.0));
        CHECK(fs.scores[1] == doctest::Approx(0.0));  // features in no clause
        CHECK(fs.scores[2] == doctest::Approx(0.0));
    }
    SUBCASE("flip can turn a clause on") {
        auto val = binary_rows({{0, 1, 0}}, {0}, 2);
        auto fs = score_taylor_crit(model, val);
        CHECK(fs.scores[0] == doctest::Approx(3.0));  // flipping f1 fires the clause
    }
    SUBCASE("empty validation set is an error") {
        auto val = binary_rows({}, {}, 2);
        val.bits = BitMatrix(0, 3);
        val.feature_map = FeatureMap::identity(3);
        CHECK_THROWS_AS(score_taylor_crit(model, val), std::invalid_argument);
    }
}

TEST_CASE("var_dropout examples") {
    HyperParams p;
    p.num_clauses = 4;
    p.num_classes = 2;
    auto model = TMClassifier::from_clauses(p, 3, {lit_clause(3, {1}, 0, 3)});
    auto val = binary_rows({{1, 0, 0}, {1, 1, 0}}, {0, 0}, 2);
    auto fs = score_var_dropout(model, val, 512, 7);
    CHECK(fs.scores[0] == doctest::Approx(3.0).epsilon(1e-9));  // exact contrast
    CHECK(fs.scores[2] == doctest::Approx(0.0).epsilon(0.25));  // no clause touches f3
    auto again = score_var_dropout(model, val, 512, 7);
    CHECK(fs.scores == again.scores);
}

TEST_CASE("ablation impact enumerated oracle") {
    // class 1 requires x1; class 0 votes on not-x1.
    HyperParams p;
    p.num_clauses = 4;
    p.num_classes = 2;
    auto model = TMClassifier::from_clauses(
        p, 3, {lit_clause(3, {1}, 1, 2), lit_clause(3, {-1}, 0, 1)});
    std::vector<std::vector<bool>> rows;
    std::vector<int> labels;
    for (int pattern = 0; pattern < 8; ++pattern) {
        rows.push_back({(pattern & 1) != 0, (pattern & 2) != 0, (pattern & 4) != 0});
        labels.push_back(pattern & 1);
    }
    auto val = binary_rows(rows, labels, 2);
    auto fs = score_ablation_impact(model, val);
    // Enumerating the 8 inputs: baseline accuracy 1; with f1 ablated every
    // sample predicts class 0, so the 4 class-1 samples are lost.
    CHECK(fs.scores[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fs.scores[1] == doctest::Approx(0.0));
    CHECK(fs.scores[2] == doctest::Approx(0.0));
}

TEST_CASE("dropout_loo matches ablation_impact on identical inputs") {
    Rng rng(17);
    std::vector<std::vector<bool>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        std::vector<bool> x(4);
        for (int j = 0; j < 4; ++j) x[j] = rng.bernoulli(0.5);
        rows.push_back(x);
        labels.push_back(x[0] == x[1] ? 1 : 0);
    }
    auto data = binary_rows(rows, labels, 2);
    HyperParams p;
    p.num_clauses = 16;
    p.threshold = 8;
    p.num_classes = 2;
    p.seed = 2;
    TMClassifier model(p, 4);
    model.fit(data, 10);
    auto a = score_ablation_impact(model, data);
    auto b = score_dropout_loo(model, data);
    CHECK(a.scores == b.scores);
    CHECK(a.ranking == b.ranking);
    CHECK(b.method_id == "dropout_loo");
}

TEST_CASE("smooth_stabil with zero noise equals taylor_crit bit-exactly") {
    HyperParams p;
    p.num_clauses = 4;
    p.num_classes = 2;
    auto model = TMClassifier::from_clauses(
        p, 3, {lit_clause(3, {1, -2}, 0, 3), lit_clause(3, {2}, 1, 5)});
    auto val = binary_rows({{1, 0, 1}, {0, 1, 0}, {1, 1, 1}}, {0, 1, 1}, 2);
    auto smooth = score_smooth_stabil(model, val, 4, 0.0, 3);
    auto taylor = score_taylor_crit(model, val);
    CHECK(smooth.scores == taylor.scores);

    auto noisy = score_smooth_stabil(model, val, 4, 0.2, 3);
    auto noisy2 = score_smooth_stabil(model, val, 4, 0.2, 3);
    CHECK(noisy.scores == noisy2.scores);  // deterministic per seed
    CHECK(fabs(noisy.scores[2]) >= 0.0);   // finite
}

TEST_CASE("perm_importance examples") {
    HyperParams p;
    p.num_clauses = 4;
    p.num_classes = 2;
    auto model = TMClassifier::from_clauses(
        p, 3, {lit_clause(3, {1}, 1, 2), lit_clause(3, {-1}, 0, 1)});
    // x2 constant: its shuffle is the identity and scores exactly 0.
    auto val = binary_rows({{1, 1, 0}, {1, 1, 1}, {0, 1, 0}, {0, 1, 1}}, {1, 1, 0, 0}, 2);
    auto fs = score_perm_importance(model, val, 24, 5);
    CHECK(fs.scores[0] > 0.0);
    CHECK(fs.scores[1] == 0.0);
    CHECK(fs.scores[2] == doctest::Approx(0.0));  // feature in no clause
}

TEST_CASE("shapley on an additive model is exact") {
    HyperParams p;
    p.num_clauses = 6;
    p.num_classes = 2;
    auto model = TMClassifier::from_clauses(
        p, 3,
        {lit_clause(3, {1}, 0, 2), lit_clause(3, {2}, 0, 5), lit_clause(3, {3}, 0, 9)});
    auto val = binary_rows({{1, 0, 1}}, {0}, 2);
    auto fs = score_shapley_mc(model, val, 16, 11);
    CHECK(fs.scores[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fs.scores[1] == doctest::Approx(0.0));
    CHECK(fs.scores[2] == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("lime recovers the single influential feature") {
    HyperParams p;
    p.num_clauses = 4;
    p.num_classes = 2;
    auto model = TMClassifier::from_clauses(p, 3, {lit_clause(3, {1}, 0, 5)});
    auto val = binary_rows({{1, 1, 0}, {1, 0, 1}}, {0, 0}, 2);
    auto fs = score_lime(model, val, 512, 0.0, 13);
    CHECK(fs.ranking[0] == 0);
    CHECK(std::abs(fs.scores[0]) > 10 * std::abs(fs.scores[1]));
    CHECK(std::abs(fs.scores[1]) < 0.1);  // feature in no clause
    auto again = score_lime(model, val, 512, 0.0, 13);
    CHECK(fs.scores == again.scores);  // deterministic per seed
}

TEST_CASE("weight-scale covariance and ranking invariance") {
    Rng rng(23);
    std::vector<Clause> clauses;
    const int d = 4;
    for (int i = 0; i < 8; ++i) {
        std::initializer_list<int> none{};
        Clause cl = lit_clause(d, none, i % 2, 1 + static_cast<int>(rng.uniform_below(6)),
                               i % 3 == 0 ? -1 : +1);
        for (int j = 0; j < 2 * d; ++j)
            if (rng.bernoulli(0.35)) cl.ta_state[j] = 129;
        cl.rebuild_includes(d, 128);
        clauses.push_back(cl);
    }
    HyperParams p;
    p.num_clauses = 8;
    p.num_classes = 2;
    auto model = TMClassifier::from_clauses(p, d, clauses);
    auto doubled_clauses = clauses;
    for (auto& cl : doubled_clauses) cl.weight *= 2;
    auto model2 = TMClassifier::from_clauses(p, d, doubled_clauses);

    auto views = accumulate_weights(model, literal_incidence(model));
    auto views2 = accumulate_weights(model2, literal_incidence(model2));
    std::vector<double> alpha{0.5, 0.5};
    auto map = FeatureMap::identity(d);

    std::vector<std::vector<bool>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 12; ++i) {
        std::vector<bool> x(d);
        for (int j = 0; j < d; ++j) x[j] = rng.bernoulli(0.5);
        rows.push_back(x);
        labels.push_back(static_cast<int>(rng.uniform_below(2)));
    }
    auto val = binary_rows(rows, labels, 2);

    auto check_doubles = [](const FeatureScore& a, const FeatureScore& b) {
        REQUIRE(a.scores.size() == b.scores.size());
        for (std::size_t i = 0; i < a.scores.size(); ++i)
            CHECK(b.scores[i] == doctest::Approx(2.0 * a.scores[i]).epsilon(1e-9));
        CHECK(a.ranking == b.ranking);
    };
    check_doubles(score_cw_sum(views, alpha, WeightVariant::kNet, map),
                  score_cw_sum(views2, alpha, WeightVariant::kNet, map));
    check_doubles(score_support_cw_sum(views, alpha, WeightVariant::kPosNeg, map),
                  score_support_cw_sum(views2, alpha, WeightVariant::kPosNeg, map));
    check_doubles(score_tm_weight(model, map), score_tm_weight(model2, map));
    check_doubles(score_margin(views, WeightVariant::kNet, map),
                  score_margin(views2, WeightVariant::kNet, map));
    check_doubles(score_taylor_crit(model, val), score_taylor_crit(model2, val));

    auto check_invariant = [](const FeatureScore& a, const FeatureScore& b) {
        REQUIRE(a.scores.size() == b.scores.size());
        for (std::size_t i = 0; i < a.scores.size(); ++i)
            CHECK(b.scores[i] == doctest::Approx(a.scores[i]).epsilon(1e-9));
    };
    check_invariant(score_entropy(views, WeightVariant::kPosNeg, map),
                    score_entropy(views2, WeightVariant::kPosNeg, map));
    check_invariant(score_gini(views, WeightVariant::kNet, map),
                    score_gini(views2, WeightVariant::kNet, map));
}

TEST_CASE("registry covers the 21 methods and dispatch works end to end") {
    CHECK(all_methods().size() == 21);
    int variant_sensitive = 0;
    for (const auto& m : all_methods())
        if (m.uses_variant) ++variant_sensitive;
    CHECK(variant_sensitive == 7);

    Rng rng(3);
    std::vector<std::vector<bool>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        std::vector<bool> x(4);
        for (int j = 0; j < 4; ++j) x[j] = rng.bernoulli(0.5);
        rows.push_back(x);
        labels.push_back(x[0] && x[1] ? 1 : 0);
    }
    auto train = binary_rows(rows, labels, 2);
    auto val = binary_rows({rows.begin(), rows.begin() + 20},
                           {labels.begin(), labels.begin() + 20}, 2);
    HyperParams p;
    p.num_clauses = 16;
    p.threshold = 8;
    p.num_classes = 2;
    p.seed = 9;
    TMClassifier model(p, 4);
    model.fit(train, 8);
    auto views = accumulate_weights(model, literal_incidence(model));

    ScorerContext ctx;
    ctx.model = &model;
    ctx.train = &train;
    ctx.val = &val;
    ctx.views = &views;
    ctx.alpha = class_frequencies(train);
    ctx.config.seed = 21;
    ctx.config.n_masks = 16;
    ctx.config.n_noise = 2;
    ctx.config.n_permutations = 3;
    ctx.config.n_shapley_perms = 8;
    ctx.config.lime_perturbations = 32;

    for (const auto& m : all_methods()) {
        auto fs = run_scorer(m.id, WeightVariant::kNet, ctx);
        check_valid(fs, 4);
        CHECK(fs.method_id == m.id);
        if (!m.uses_variant) CHECK(fs.variant == "-");
    }
    CHECK_THROWS_WITH_AS(run_scorer("bogus", WeightVariant::kNet, ctx),
                         doctest::Contains("valid methods"), std::invalid_argument);
}
