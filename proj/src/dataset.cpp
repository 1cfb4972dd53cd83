#include "tmfs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "tmfs/rng.hpp"

namespace tmfs {

int FeatureMap::num_columns() const {
    int n = 0;
    for (const auto& g : features) n += static_cast<int>(g.columns.size());
    return n;
}

std::vector<int> FeatureMap::column_owner() const {
    const int d = num_columns();
    std::vector<int> owner(d, -1);
    for (std::size_t f = 0; f < features.size(); ++f) {
        for (int col : features[f].columns) {
            if (col < 0 || col >= d || owner[col] != -1)
                throw std::invalid_argument("FeatureMap: columns do not partition [0, d)");
            owner[col] = static_cast<int>(f);
        }
    }
    for (int col = 0; col < d; ++col)
        if (owner[col] == -1) throw std::invalid_argument("FeatureMap: unmapped column");
    return owner;
}

FeatureMap FeatureMap::identity(int d) {
    FeatureMap map;
    map.features.resize(d);
    for (int i = 0; i < d; ++i) {
        map.features[i].columns = {i};
        map.features[i].thresholds = {0.5};
        map.features[i].is_binary = true;
    }
    return map;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == delimiter) {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(cur);
    for (auto& c : cells) {
        while (!c.empty() && (c.back() == '\r' || c.back() == ' ' || c.back() == '\t'))
            c.pop_back();
        std::size_t start = c.find_first_not_of(" \t");
        c = start == std::string::npos ? std::string{} : c.substr(start);
    }
    return cells;
}

}  // namespace

RawDataset load_csv(const std::string& path, const std::string& label_column,
                    char delimiter) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
    auto header = split_line(line, delimiter);

    int label_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = static_cast<int>(i);
    if (label_idx < 0)
        throw std::invalid_argument(path + ": label column '" + label_column + "' not found");

    RawDataset data;
    data.name = path;
    data.n_features = header.size() - 1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (static_cast<int>(i) != label_idx) data.feature_names.push_back(header[i]);

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto cells = split_line(line, delimiter);
        if (cells.size() != header.size())
            throw std::invalid_argument(path + ": row " + std::to_string(row) +
                                        " has wrong cell count");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (static_cast<int>(i) == label_idx) {
                const std::string& text = cells[i];
                auto it = std::find(data.class_names.begin(), data.class_names.end(), text);
                if (it == data.class_names.end()) {
                    data.class_names.push_back(text);
                    data.labels.push_back(static_cast<int>(data.class_names.size()) - 1);
                } else {
                    data.labels.push_back(
                        static_cast<int>(it - data.class_names.begin()));
                }
            } else {
                const char* begin = cells[i].c_str();
                char* end = nullptr;
                double v = std::strtod(begin, &end);
                if (end == begin || *end != '\0')
                    throw std::invalid_argument(path + ": row " + std::to_string(row) +
                                                ": non-numeric feature cell '" + cells[i] + "'");
                data.values.push_back(v);
            }
        }
    }
    if (data.labels.empty()) throw std::invalid_argument(path + ": no data rows");
    data.num_classes = static_cast<int>(data.class_names.size());
    if (data.num_classes < 2)
        throw std::invalid_argument(path + ": label column has a single class");
    return data;
}

BinaryDataset thermometer_encode(const RawDataset& raw, int bins,
                                 std::span<const std::size_t> fit_indices) {
    if (bins < 1) throw std::invalid_argument("thermometer_encode: bins must be >= 1");
    if (fit_indices.empty())
        throw std::invalid_argument("thermometer_encode: empty fit index set");
    for (std::size_t idx : fit_indices)
        if (idx >= raw.n_samples())
            throw std::invalid_argument("thermometer_encode: fit index out of range");

    FeatureMap map;
    map.features.resize(raw.n_features);
    int next_col = 0;
    for (std::size_t f = 0; f < raw.n_features; ++f) {
        auto& group = map.features[f];
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t idx : fit_indices) {
            lo = std::min(lo, raw.value(idx, f));
            hi = std::max(hi, raw.value(idx, f));
        }
        bool binary = true;
        for (std::size_t r = 0; r < raw.n_samples() && binary; ++r) {
            double v = raw.value(r, f);
            binary = v == 0.0 || v == 1.0;
        }

        if (lo == hi) {
            group.is_constant = true;
            group.columns = {next_col++};
        } else if (binary) {
            group.is_binary = true;
            group.columns = {next_col++};
            group.thresholds = {0.5};
        } else {
            group.thresholds.resize(bins);
            for (int b = 1; b <= bins; ++b) {
                double t = static_cast<double>(b) / bins;
                group.thresholds[b - 1] = lo * (1.0 - t) + hi * t;
            }
            bool increasing = true;
            for (int b = 1; b < bins; ++b)
                if (!(group.thresholds[b - 1] < group.thresholds[b])) increasing = false;
            if (!increasing) {
                // Range too narrow for distinct thresholds: treat as constant.
                group.thresholds.clear();
                group.is_constant = true;
                group.columns = {next_col++};
            } else {
                group.columns.resize(bins);
                std::iota(group.columns.begin(), group.columns.end(), next_col);
                next_col += bins;
            }
        }
    }

    BinaryDataset out;
    out.name = raw.name;
    out.labels = raw.labels;
    out.num_classes = raw.num_classes;
    out.feature_map = std::move(map);
    out.bits = BitMatrix(raw.n_samples(), next_col);
    for (std::size_t r = 0; r < raw.n_samples(); ++r) {
        for (std::size_t f = 0; f < raw.n_features; ++f) {
            const auto& group = out.feature_map.features[f];
            if (group.is_constant) continue;
            double v = raw.value(r, f);
            for (std::size_t b = 0; b < group.thresholds.size(); ++b)
                if (v >= group.thresholds[b]) out.bits.set(r, group.columns[b], true);
        }
    }
    return out;
}

Split stratified_split(const std::vector<int>& labels, std::array<double, 3> ratios,
                       std::uint64_t seed) {
    if (labels.empty()) throw std::invalid_argument("stratified_split: empty label vector");
    int num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw std::invalid_argument("stratified_split: negative label");
        by_class[labels[i]].push_back(i);
    }

    double ratio_sum = ratios[0] + ratios[1] + ratios[2];
    Split split;
    Rng rng(seed);
    for (int c = 0; c < num_classes; ++c) {
        auto& idx = by_class[c];
        if (idx.size() < 3)
            throw std::invalid_argument("stratified_split: class " + std::to_string(c) +
                                        " has fewer than 3 samples");
        rng.shuffle(idx);

        // Largest-remainder allocation, then guarantee a non-empty share
        // of this class in every part.
        const double n = static_cast<double>(idx.size());
        std::array<std::size_t, 3> count;
        std::array<double, 3> frac;
        std::size_t assigned = 0;
        for (int p = 0; p < 3; ++p) {
            double quota = n * ratios[p] / ratio_sum;
            count[p] = static_cast<std::size_t>(quota);
            frac[p] = quota - static_cast<double>(count[p]);
            assigned += count[p];
        }
        while (assigned < idx.size()) {
            int best = 0;
            for (int p = 1; p < 3; ++p)
                if (frac[p] > frac[best]) best = p;
            ++count[best];
            frac[best] = -1.0;
            ++assigned;
        }
        for (int p = 0; p < 3; ++p) {
            while (count[p] == 0) {
                int donor = 0;
                for (int q = 1; q < 3; ++q)
                    if (count[q] > count[donor]) donor = q;
                --count[donor];
                ++count[p];
            }
        }

        std::size_t pos = 0;
        for (std::size_t i = 0; i < count[0]; ++i) split.train.push_back(idx[pos++]);
        for (std::size_t i = 0; i < count[1]; ++i) split.val.push_back(idx[pos++]);
        for (std::size_t i = 0; i < count[2]; ++i) split.test.push_back(idx[pos++]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

namespace {

template <typename LabelFn>
RawDataset generate_bits(const std::string& name, int n, int d, std::uint64_t seed,
                         int min_d, LabelFn label_fn) {
    if (d < min_d)
        throw std::invalid_argument(name + " generator: d must be >= " + std::to_string(min_d));
    if (n <= 0) throw std::invalid_argument(name + " generator: n must be positive");
    RawDataset data;
    data.name = name;
    data.n_features = static_cast<std::size_t>(d);
    data.num_classes = 2;
    data.class_names = {"0", "1"};
    for (int f = 0; f < d; ++f) data.feature_names.push_back("x" + std::to_string(f + 1));
    data.values.resize(static_cast<std::size_t>(n) * d);
    data.labels.resize(n);
    Rng rng(seed);
    for (int r = 0; r < n; ++r) {
        double* row = data.values.data() + static_cast<std::size_t>(r) * d;
        for (int f = 0; f < d; ++f) row[f] = rng.bernoulli(0.5) ? 1.0 : 0.0;
        data.labels[r] = label_fn(row);
    }
    return data;
}

}  // namespace

RawDataset generate_parity(int n, int d, int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("parity generator: k must be >= 1");
    if (k > d) throw std::invalid_argument("parity generator: k must be <= d");
    return generate_bits("parity", n, d, seed, k, [k](const double* row) {
        int acc = 0;
        for (int i = 0; i < k; ++i) acc ^= row[i] != 0.0;
        return acc;
    });
}

RawDataset generate_hierarchical_bool(int n, int d, std::uint64_t seed) {
    return generate_bits("hierarchical_bool", n, d, seed, 6, [](const double* row) {
        int c1 = row[0] != 0.0 && row[1] != 0.0;
        int c2 = row[2] != 0.0 && row[3] != 0.0;
        int c3 = row[4] != 0.0 && row[5] != 0.0;
        return c1 + c2 + c3 >= 2 ? 1 : 0;
    });
}

RawDataset generate_feature_interaction(int n, int d, std::uint64_t seed) {
    return generate_bits("feature_interaction", n, d, seed, 4, [](const double* row) {
        int a = row[0] != 0.0 && row[1] != 0.0;
        int b = row[2] != 0.0 && row[3] != 0.0;
        return a ^ b;
    });
}

BinaryDataset take_rows(const BinaryDataset& data, std::span<const std::size_t> indices) {
    BinaryDataset out;
    out.name = data.name;
    out.num_classes = data.num_classes;
    out.feature_map = data.feature_map;
    out.bits = BitMatrix(indices.size(), data.bits.cols());
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::size_t src = indices[i];
        if (src >= data.n_samples()) throw std::invalid_argument("take_rows: index out of range");
        auto src_row = data.bits.row(src);
        auto dst_row = out.bits.row(i);
        std::copy(src_row.begin(), src_row.end(), dst_row.begin());
        out.labels.push_back(data.labels[src]);
    }
    return out;
}

void export_bits(const BinaryDataset& data, std::ostream& out) {
    const int d = data.num_columns();
    std::string line;
    for (std::size_t r = 0; r < data.n_samples(); ++r) {
        line.clear();
        for (int c = 0; c < d; ++c) line += data.bits.get(r, c) ? '1' : '0';
        out << line << ' ' << data.labels[r] << '\n';
    }
}

}  // namespace tmfs
