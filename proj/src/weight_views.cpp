#include "tmfs/weight_views.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "tmfs/dataset.hpp"
#include "tmfs/tm.hpp"

namespace tmfs {

LiteralIncidence literal_incidence(const TMClassifier& model) {
    const int d = model.num_features();
    const auto& clauses = model.clauses();
    LiteralIncidence inc{BitMatrix(clauses.size(), d), BitMatrix(clauses.size(), d)};
    for (std::size_t ell = 0; ell < clauses.size(); ++ell) {
        const Clause& cl = clauses[ell];
        const int n_states = model.params().ta_states_per_action;
        for (int f = 0; f < d; ++f) {
            if (cl.ta_state[f] > n_states) inc.pos.set(ell, f, true);
            if (cl.ta_state[d + f] > n_states) inc.neg.set(ell, f, true);
        }
    }
    return inc;
}

namespace {

struct AbsViews {
    Matrix abs_w, abs_sum_w;
};

// W+/W- for one weight assignment, reduced straight to the absolute views.
AbsViews abs_views_for_weights(const TMClassifier& model, const LiteralIncidence& inc,
                               const std::vector<std::int32_t>& weights) {
    const int C = model.params().num_classes;
    const int d = model.num_features();
    Matrix w_plus(C, d), w_minus(C, d);
    const auto& clauses = model.clauses();
    for (std::size_t ell = 0; ell < clauses.size(); ++ell) {
        const int c = clauses[ell].class_id;
        const double w = static_cast<double>(weights[ell]);
        for (int f = 0; f < d; ++f) {
            if (inc.pos.get(ell, f)) w_plus.at(c, f) += w;
            if (inc.neg.get(ell, f)) w_minus.at(c, f) += w;
        }
    }
    AbsViews out{Matrix(C, d), Matrix(C, d)};
    for (std::size_t i = 0; i < w_plus.data.size(); ++i) {
        out.abs_w.data[i] = std::abs(w_plus.data[i] - w_minus.data[i]);
        out.abs_sum_w.data[i] = std::abs(w_plus.data[i] + w_minus.data[i]);
    }
    return out;
}

}  // namespace

WeightViews accumulate_weights(const TMClassifier& model, const LiteralIncidence& incidence,
                               bool with_history) {
    const int C = model.params().num_classes;
    const int d = model.num_features();
    WeightViews views;
    views.w_plus = Matrix(C, d);
    views.w_minus = Matrix(C, d);
    const auto& clauses = model.clauses();
    for (std::size_t ell = 0; ell < clauses.size(); ++ell) {
        const Clause& cl = clauses[ell];
        const double w = static_cast<double>(cl.weight);
        for (int f = 0; f < d; ++f) {
            if (incidence.pos.get(ell, f)) views.w_plus.at(cl.class_id, f) += w;
            if (incidence.neg.get(ell, f)) views.w_minus.at(cl.class_id, f) += w;
        }
    }
    views.net_w = Matrix(C, d);
    views.abs_w = Matrix(C, d);
    views.sum_w = Matrix(C, d);
    views.abs_sum_w = Matrix(C, d);
    for (std::size_t i = 0; i < views.w_plus.data.size(); ++i) {
        views.net_w.data[i] = views.w_plus.data[i] - views.w_minus.data[i];
        views.abs_w.data[i] = std::abs(views.net_w.data[i]);
        views.sum_w.data[i] = views.w_plus.data[i] + views.w_minus.data[i];
        views.abs_sum_w.data[i] = std::abs(views.sum_w.data[i]);
    }

    if (with_history) {
        for (const auto& weights : model.weight_history()) {
            auto epoch = abs_views_for_weights(model, incidence, weights);
            views.per_epoch_abs_w.push_back(std::move(epoch.abs_w));
            views.per_epoch_abs_sum_w.push_back(std::move(epoch.abs_sum_w));
        }
    }
    return views;
}

Matrix aggregate_to_features(const Matrix& view, const FeatureMap& map) {
    if (static_cast<int>(view.cols) != map.num_columns())
        throw std::invalid_argument("aggregate_to_features: view/map column mismatch");
    map.column_owner();  // validates the partition
    Matrix out(view.rows, map.features.size());
    for (std::size_t f = 0; f < map.features.size(); ++f)
        for (int col : map.features[f].columns)
            for (std::size_t c = 0; c < view.rows; ++c)
                out.at(c, f) += view.at(c, col);
    return out;
}

std::vector<double> aggregate_to_features(const std::vector<double>& view,
                                          const FeatureMap& map) {
    Matrix m(1, view.size());
    m.data = view;
    return aggregate_to_features(m, map).data;
}

void dump_weight_views(const WeightViews& views, std::ostream& out) {
    auto write = [&out](const char* name, const Matrix& m) {
        char buf[64];
        for (std::size_t c = 0; c < m.rows; ++c) {
            out << name << '\t' << c;
            for (std::size_t f = 0; f < m.cols; ++f) {
                std::snprintf(buf, sizeof buf, "%.17g", m.at(c, f));
                out << '\t' << buf;
            }
            out << '\n';
        }
    };
    out << "view\tclass\tvalues...\n";
    write("w_plus", views.w_plus);
    write("w_minus", views.w_minus);
}

}  // namespace tmfs
