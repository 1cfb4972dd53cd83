#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tmfs/dataset.hpp"
#include "tmfs/rng.hpp"

using namespace tmfs;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        static int counter = 0;
        path = "tmfs_test_csv_" + std::to_string(counter++) + ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

TEST_CASE("load_csv basic parse") {
    TempCsv file("a,b,y\n1.5,2,a\n3,4,b\n5,6.25,a\n");
    auto data = load_csv(file.path, "y");
    CHECK(data.n_samples() == 3);
    CHECK(data.n_features == 2);
    CHECK(data.value(0, 0) == 1.5);
    CHECK(data.value(2, 1) == 6.25);
    CHECK(data.labels == std::vector<int>{0, 1, 0});
    CHECK(data.class_names == std::vector<std::string>{"a", "b"});
    CHECK(data.feature_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load_csv label column anywhere") {
    TempCsv file("y,a\nneg,1\npos,2\nneg,3\n");
    auto data = load_csv(file.path, "y");
    CHECK(data.labels == std::vector<int>{0, 1, 0});
    CHECK(data.value(1, 0) == 2.0);
}

TEST_CASE("load_csv error paths") {
    CHECK_THROWS_AS(load_csv("definitely_missing_file.csv", "y"), std::invalid_argument);
    {
        TempCsv file("a,b,y\n");
        CHECK_THROWS_AS(load_csv(file.path, "y"), std::invalid_argument);  // header only
    }
    {
        TempCsv file("a,y\n1,u\n2,u\n");
        CHECK_THROWS_AS(load_csv(file.path, "y"), std::invalid_argument);  // single class
    }
    {
        TempCsv file("a,y\noops,u\n2,v\n");
        CHECK_THROWS_AS(load_csv(file.path, "y"), std::invalid_argument);  // non-numeric
    }
    {
        TempCsv file("a,y\n1,u\n2,v\n");
        CHECK_THROWS_AS(load_csv(file.path, "z"), std::invalid_argument);  // no such column
    }
}

TEST_CASE("thermometer thresholds from the hand example") {
    // One feature with fit range [0, 10], bins = 10 -> thresholds 1..10.
    RawDataset raw;
    raw.name = "hand";
    raw.n_features = 1;
    raw.num_classes = 2;
    raw.class_names = {"0", "1"};
    raw.feature_names = {"v"};
    for (double v : {0.0, 10.0, 5.0, 2.5}) raw.values.push_back(v);
    raw.labels = {0, 1, 0, 1};

    auto idx = all_indices(4);
    auto data = thermometer_encode(raw, 10, idx);
    CHECK(data.num_columns() == 10);
    const auto& group = data.feature_map.features[0];
    REQUIRE(group.thresholds.size() == 10);
    for (int b = 0; b < 10; ++b) CHECK(group.thresholds[b] == doctest::Approx(b + 1.0));

    auto bits_of = [&](std::size_t row) {
        std::string s;
        for (int c = 0; c < 10; ++c) s += data.bits.get(row, c) ? '1' : '0';
        return s;
    };
    CHECK(bits_of(0) == "0000000000");  // fit minimum
    CHECK(bits_of(1) == "1111111111");  // fit maximum
    CHECK(bits_of(2) == "1111100000");  // value 5.0
}

TEST_CASE("thermometer binary pass-through and constant features") {
    RawDataset raw;
    raw.n_features = 3;
    raw.num_classes = 2;
    raw.class_names = {"0", "1"};
    raw.feature_names = {"bin", "const", "real"};
    // rows: (binary, constant, real)
    std::vector<std::array<double, 3>> rows{{1, 4, 0.0}, {0, 4, 1.0}, {1, 4, 2.0}};
    for (auto& r : rows)
        for (double v : r) raw.values.push_back(v);
    raw.labels = {0, 1, 0};

    auto idx = all_indices(3);
    auto data = thermometer_encode(raw, 4, idx);
    const auto& groups = data.feature_map.features;
    CHECK(groups[0].is_binary);
    CHECK(groups[0].columns.size() == 1);
    CHECK(groups[1].is_constant);
    CHECK(groups[1].columns.size() == 1);
    CHECK(groups[2].columns.size() == 4);
    CHECK(data.num_columns() == 6);

    CHECK(data.bits.get(0, groups[0].columns[0]) == true);
    CHECK(data.bits.get(1, groups[0].columns[0]) == false);
    for (int r = 0; r < 3; ++r) CHECK(data.bits.get(r, groups[1].columns[0]) == false);
}

TEST_CASE("thermometer fits on train rows only") {
    RawDataset raw;
    raw.n_features = 1;
    raw.num_classes = 2;
    raw.class_names = {"0", "1"};
    raw.feature_names = {"v"};
    for (double v : {0.0, 2.0, 100.0}) raw.values.push_back(v);
    raw.labels = {0, 1, 0};

    std::vector<std::size_t> fit{0, 1};  // range [0, 2]; row 2 is out-of-range
    auto data = thermometer_encode(raw, 2, fit);
    // Thresholds 1 and 2; value 100 saturates.
    CHECK(data.bits.get(2, 0) == true);
    CHECK(data.bits.get(2, 1) == true);
    CHECK(data.bits.get(0, 0) == false);
}

TEST_CASE("thermometer monotonicity and order preservation on random data") {
    Rng rng(31);
    RawDataset raw;
    raw.n_features = 3;
    raw.num_classes = 2;
    raw.class_names = {"0", "1"};
    raw.feature_names = {"a", "b", "c"};
    const int n = 120;
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < 3; ++f) raw.values.push_back(rng.uniform01() * (f + 1) - f);
        raw.labels.push_back(static_cast<int>(rng.uniform_below(2)));
    }
    auto idx = all_indices(n);
    auto data = thermometer_encode(raw, 10, idx);

    for (int r = 0; r < n; ++r) {
        for (const auto& group : data.feature_map.features) {
            for (std::size_t b = 1; b < group.columns.size(); ++b) {
                // bit b set implies bit b-1 set
                if (data.bits.get(r, group.columns[b]))
                    CHECK(data.bits.get(r, group.columns[b - 1]));
            }
        }
    }

    // popcount within a feature is monotone in the raw value
    for (int f = 0; f < 3; ++f) {
        const auto& group = data.feature_map.features[f];
        for (int r1 = 0; r1 < n; ++r1) {
            int r2 = static_cast<int>(rng.uniform_below(n));
            int pop1 = 0, pop2 = 0;
            for (int col : group.columns) {
                pop1 += data.bits.get(r1, col);
                pop2 += data.bits.get(r2, col);
            }
            if (raw.value(r1, f) <= raw.value(r2, f))
                CHECK(pop1 <= pop2);
            else
                CHECK(pop1 >= pop2);
        }
    }
}

TEST_CASE("stratified_split proportions and determinism") {
    SUBCASE("100 balanced samples -> 30/10/10 per class") {
        std::vector<int> labels;
        for (int i = 0; i < 100; ++i) labels.push_back(i % 2);
        auto split = stratified_split(labels, 17);
        CHECK(split.train.size() == 60);
        CHECK(split.val.size() == 20);
        CHECK(split.test.size() == 20);
        for (const auto* part : {&split.train, &split.val, &split.test}) {
            int per_class[2] = {0, 0};
            for (auto i : *part) ++per_class[labels[i]];
            CHECK(per_class[0] == per_class[1]);
        }
        auto again = stratified_split(labels, 17);
        CHECK(split.train == again.train);
        CHECK(split.val == again.val);
        CHECK(split.test == again.test);
    }
    SUBCASE("parts are disjoint and cover everything") {
        Rng rng(5);
        std::vector<int> labels;
        for (int i = 0; i < 83; ++i) labels.push_back(static_cast<int>(rng.uniform_below(3)));
        for (int c = 0; c < 3; ++c) labels.insert(labels.end(), 3, c);  // ensure >= 3 each
        auto split = stratified_split(labels, 99);
        std::set<std::size_t> seen;
        for (const auto* part : {&split.train, &split.val, &split.test})
            for (auto i : *part) CHECK(seen.insert(i).second);
        CHECK(seen.size() == labels.size());
    }
    SUBCASE("small classes keep every part non-empty") {
        for (std::size_t n_c : {3u, 4u, 5u, 7u}) {
            std::vector<int> labels(n_c, 0);
            labels.insert(labels.end(), n_c, 1);
            auto split = stratified_split(labels, 1);
            for (const auto* part : {&split.train, &split.val, &split.test}) {
                int per_class[2] = {0, 0};
                for (auto i : *part) ++per_class[labels[i]];
                CHECK(per_class[0] >= 1);
                CHECK(per_class[1] >= 1);
            }
        }
    }
    SUBCASE("class below 3 samples rejected") {
        std::vector<int> labels{0, 0, 0, 1, 1};
        CHECK_THROWS_AS(stratified_split(labels, 1), std::invalid_argument);
    }
}

TEST_CASE("parity generator") {
    auto data = generate_parity(300, 8, 1, 44);
    for (std::size_t i = 0; i < data.n_samples(); ++i)
        CHECK(data.labels[i] == static_cast<int>(data.value(i, 0)));

    auto d5 = generate_parity(100, 10, 5, 44);
    Rng rng(3);
    for (std::size_t i = 0; i < d5.n_samples(); ++i) {
        int f = static_cast<int>(rng.uniform_below(5));
        int parity = 0;
        for (int j = 0; j < 5; ++j) parity ^= d5.value(i, j) != 0.0;
        CHECK(parity == d5.labels[i]);
        // flipping one relevant bit flips the label
        parity ^= 1;
        int flipped = 0;
        for (int j = 0; j < 5; ++j) {
            double v = d5.value(i, j);
            if (j == f) v = 1.0 - v;
            flipped ^= v != 0.0;
        }
        CHECK(flipped == parity);
    }
    CHECK_THROWS_AS(generate_parity(10, 4, 5, 1), std::invalid_argument);
}

TEST_CASE("hierarchical bool generator") {
    auto data = generate_hierarchical_bool(400, 20, 7);
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        int c1 = data.value(i, 0) != 0 && data.value(i, 1) != 0;
        int c2 = data.value(i, 2) != 0 && data.value(i, 3) != 0;
        int c3 = data.value(i, 4) != 0 && data.value(i, 5) != 0;
        CHECK(data.labels[i] == (c1 + c2 + c3 >= 2 ? 1 : 0));
    }
    // all-ones -> 1, all-zeros -> 0 by construction of the majority
    std::vector<double> ones(20, 1.0), zeros(20, 0.0);
    CHECK((ones[0] != 0 && ones[1] != 0) + (ones[2] != 0 && ones[3] != 0) +
              (ones[4] != 0 && ones[5] != 0) >=
          2);
}

TEST_CASE("feature interaction generator truth table") {
    auto data = generate_feature_interaction(500, 10, 12);
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        int a = data.value(i, 0) != 0 && data.value(i, 1) != 0;
        int b = data.value(i, 2) != 0 && data.value(i, 3) != 0;
        CHECK(data.labels[i] == (a ^ b));
    }
}

TEST_CASE("generators are pure functions of (parameters, seed)") {
    auto a = generate_parity(50, 6, 3, 123);
    auto b = generate_parity(50, 6, 3, 123);
    CHECK(a.values == b.values);
    CHECK(a.labels == b.labels);
    auto c = generate_parity(50, 6, 3, 124);
    CHECK(a.values != c.values);
}

TEST_CASE("take_rows and export_bits") {
    RawDataset raw = generate_feature_interaction(20, 5, 3);
    auto idx = all_indices(20);
    auto data = thermometer_encode(raw, 10, idx);
    std::vector<std::size_t> pick{0, 3, 7};
    auto sub = take_rows(data, pick);
    CHECK(sub.n_samples() == 3);
    CHECK(sub.labels[1] == data.labels[3]);
    for (int c = 0; c < data.num_columns(); ++c) CHECK(sub.bits.get(2, c) == data.bits.get(7, c));

    std::ostringstream out;
    export_bits(sub, out);
    std::istringstream lines(out.str());
    std::string bits;
    int label;
    int row = 0;
    while (lines >> bits >> label) {
        CHECK(bits.size() == static_cast<std::size_t>(sub.num_columns()));
        CHECK(label == sub.labels[row]);
        for (int c = 0; c < sub.num_columns(); ++c)
            CHECK((bits[c] == '1') == sub.bits.get(row, c));
        ++row;
    }
    CHECK(row == 3);
}

TEST_CASE("bundled iris fixture loads") {
    auto data = load_csv(std::string(TMFS_DATA_DIR) + "/iris.csv", "species");
    CHECK(data.n_samples() == 150);
    CHECK(data.n_features == 4);
    CHECK(data.num_classes == 3);
    CHECK(data.class_names[0] == "setosa");
}
