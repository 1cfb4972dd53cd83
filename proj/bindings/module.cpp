#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>

#include "tmfs/analysis.hpp"
#include "tmfs/dataset.hpp"
#include "tmfs/protocols.hpp"
#include "tmfs/rng.hpp"
#include "tmfs/scorers.hpp"
#include "tmfs/tm.hpp"
#include "tmfs/weight_views.hpp"

namespace py = pybind11;
using namespace tmfs;

namespace {

std::vector<std::size_t> to_indices(const std::vector<std::size_t>& v) { return v; }

py::dict score_to_dict(const FeatureScore& fs) {
    py::dict out;
    out["method"] = fs.method_id;
    out["variant"] = fs.variant;
    out["scores"] = fs.scores;
    out["ranking"] = fs.ranking;
    out["rank_time_s"] = fs.rank_time_seconds;
    return out;
}

py::dict curve_to_dict(const PruningCurve& c) {
    py::dict out;
    out["method"] = c.method_id;
    out["variant"] = c.variant;
    out["protocol"] = c.protocol;
    out["dataset"] = c.dataset;
    out["k_values"] = c.k_values;
    out["mean_acc"] = c.mean_acc;
    out["std_acc"] = c.std_acc;
    out["mean_val_acc"] = c.mean_val_acc;
    out["std_val_acc"] = c.std_val_acc;
    out["auc"] = c.auc;
    return out;
}

WeightVariant parse_variant(const std::string& name) {
    if (name == "net") return WeightVariant::kNet;
    if (name == "posneg") return WeightVariant::kPosNeg;
    throw std::invalid_argument("variant must be 'net' or 'posneg'");
}

}  // namespace

PYBIND11_MODULE(_tmfs, m) {
    m.doc() = "Weighted Tsetlin Machine classifier and feature-selection benchmark";

    py::class_<RawDataset>(m, "RawDataset")
        .def_readonly("name", &RawDataset::name)
        .def_readonly("labels", &RawDataset::labels)
        .def_readonly("num_classes", &RawDataset::num_classes)
        .def_readonly("feature_names", &RawDataset::feature_names)
        .def_readonly("class_names", &RawDataset::class_names)
        .def_property_readonly("n_samples", &RawDataset::n_samples)
        .def_property_readonly("n_features",
                               [](const RawDataset& d) { return d.n_features; })
        .def("value", &RawDataset::value, py::arg("row"), py::arg("feature"))
        .def("__repr__", [](const RawDataset& d) {
            return "<RawDataset '" + d.name + "' " + std::to_string(d.n_samples()) + "x" +
                   std::to_string(d.n_features) + ">";
        });

    py::class_<Split>(m, "Split")
        .def_readonly("train", &Split::train)
        .def_readonly("val", &Split::val)
        .def_readonly("test", &Split::test);

    py::class_<BinaryDataset>(m, "BinaryDataset")
        .def_readonly("name", &BinaryDataset::name)
        .def_readonly("labels", &BinaryDataset::labels)
        .def_readonly("num_classes", &BinaryDataset::num_classes)
        .def_property_readonly("n_samples", &BinaryDataset::n_samples)
        .def_property_readonly("num_columns", &BinaryDataset::num_columns)
        .def_property_readonly("num_features", &BinaryDataset::num_features)
        .def("row",
             [](const BinaryDataset& d, std::size_t i) {
                 if (i >= d.n_samples()) throw std::out_of_range("row index out of range");
                 std::vector<bool> bits(d.num_columns());
                 for (int c = 0; c < d.num_columns(); ++c) bits[c] = d.bits.get(i, c);
                 return bits;
             },
             py::arg("index"))
        .def("feature_columns",
             [](const BinaryDataset& d, int f) {
                 if (f < 0 || f >= d.num_features())
                     throw std::out_of_range("feature index out of range");
                 return d.feature_map.features[f].columns;
             },
             py::arg("feature"))
        .def("__repr__", [](const BinaryDataset& d) {
            return "<BinaryDataset '" + d.name + "' " + std::to_string(d.n_samples()) + "x" +
                   std::to_string(d.num_columns()) + " (" +
                   std::to_string(d.num_features()) + " features)>";
        });

    py::class_<HyperParams>(m, "HyperParams")
        .def(py::init([](int num_clauses, int threshold, double specificity, int num_classes,
                         int ta_states_per_action, int epochs, std::uint64_t seed) {
                 HyperParams p;
                 p.num_clauses = num_clauses;
                 p.threshold = threshold;
                 p.specificity = specificity;
                 p.num_classes = num_classes;
                 p.ta_states_per_action = ta_states_per_action;
                 p.epochs = epochs;
                 p.seed = seed;
                 p.validate();
                 return p;
             }),
             py::arg("num_clauses") = 500, py::arg("threshold") = 600,
             py::arg("specificity") = 3.0, py::arg("num_classes") = 2,
             py::arg("ta_states_per_action") = 128, py::arg("epochs") = 30,
             py::arg("seed") = 0)
        .def_readwrite("num_clauses", &HyperParams::num_clauses)
        .def_readwrite("threshold", &HyperParams::threshold)
        .def_readwrite("specificity", &HyperParams::specificity)
        .def_readwrite("num_classes", &HyperParams::num_classes)
        .def_readwrite("ta_states_per_action", &HyperParams::ta_states_per_action)
        .def_readwrite("epochs", &HyperParams::epochs)
        .def_readwrite("seed", &HyperParams::seed);

    py::class_<TMClassifier>(m, "TMClassifier")
        .def(py::init<HyperParams, int>(), py::arg("params"), py::arg("num_features"))
        .def_property_readonly("num_features", &TMClassifier::num_features)
        .def_property_readonly("params", &TMClassifier::params)
        .def("fit",
             [](TMClassifier& model, const BinaryDataset& train,
                std::optional<int> epochs) {
                 model.fit(train, epochs.value_or(model.params().epochs));
             },
             py::arg("train"), py::arg("epochs") = py::none())
        .def("predict",
             [](const TMClassifier& model, const std::vector<bool>& x) {
                 return model.predict(x);
             },
             py::arg("x"))
        .def("class_sums",
             [](const TMClassifier& model, const std::vector<bool>& x) {
                 return model.class_sums(x);
             },
             py::arg("x"))
        .def("accuracy", &TMClassifier::accuracy, py::arg("data"))
        .def("macro_f1", &TMClassifier::macro_f1, py::arg("data"))
        .def("save", &TMClassifier::save_file, py::arg("path"))
        .def_static("load", &TMClassifier::load_file, py::arg("path"))
        .def("__repr__", [](const TMClassifier& model) {
            return "<TMClassifier " + std::to_string(model.clauses().size()) + " clauses, " +
                   std::to_string(model.num_features()) + " columns>";
        });

    m.def("load_csv", &load_csv, py::arg("path"), py::arg("label_column"),
          py::arg("delimiter") = ',');
    m.def("generate_parity", &generate_parity, py::arg("n") = 500, py::arg("d") = 20,
          py::arg("k") = 5, py::arg("seed") = 0);
    m.def("generate_hierarchical_bool", &generate_hierarchical_bool, py::arg("n") = 500,
          py::arg("d") = 20, py::arg("seed") = 0);
    m.def("generate_feature_interaction", &generate_feature_interaction, py::arg("n") = 500,
          py::arg("d") = 20, py::arg("seed") = 0);
    m.def(
        "stratified_split",
        [](const std::vector<int>& labels, std::uint64_t seed) {
            return stratified_split(labels, seed);
        },
        py::arg("labels"), py::arg("seed") = 0);
    m.def(
        "thermometer_encode",
        [](const RawDataset& raw, int bins, const std::vector<std::size_t>& fit_indices) {
            return thermometer_encode(raw, bins, to_indices(fit_indices));
        },
        py::arg("raw"), py::arg("bins") = 10, py::arg("fit_indices"));
    m.def(
        "take_rows",
        [](const BinaryDataset& data, const std::vector<std::size_t>& indices) {
            return take_rows(data, indices);
        },
        py::arg("data"), py::arg("indices"));

    m.def("available_methods", [] {
        py::list out;
        for (const auto& info : all_methods()) {
            py::dict entry;
            entry["id"] = info.id;
            entry["display_name"] = info.display_name;
            entry["category"] = std::string(category_name(info.category));
            entry["uses_variant"] = info.uses_variant;
            out.append(entry);
        }
        return out;
    });

    m.def(
        "score",
        [](const std::string& method, const TMClassifier& model, const BinaryDataset& train,
           const BinaryDataset& val, const std::string& variant, std::uint64_t seed,
           int n_masks, int n_noise, int n_permutations, int n_shapley_perms,
           double noise_rate, int lime_perturbations, double lime_kernel_width) {
            WeightVariant wv = parse_variant(variant);
            auto views = accumulate_weights(model, literal_incidence(model));
            ScorerContext ctx;
            ctx.model = &model;
            ctx.train = &train;
            ctx.val = &val;
            ctx.views = &views;
            ctx.alpha = class_frequencies(train);
            ctx.config.variant = wv;
            ctx.config.seed = seed;
            ctx.config.n_masks = n_masks;
            ctx.config.n_noise = n_noise;
            ctx.config.n_permutations = n_permutations;
            ctx.config.n_shapley_perms = n_shapley_perms;
            ctx.config.noise_rate = noise_rate;
            ctx.config.lime_perturbations = lime_perturbations;
            ctx.config.lime_kernel_width = lime_kernel_width;
            return score_to_dict(run_scorer(method, wv, ctx));
        },
        py::arg("method"), py::arg("model"), py::arg("train"), py::arg("val"),
        py::arg("variant") = "net", py::arg("seed") = 0, py::arg("n_masks") = 64,
        py::arg("n_noise") = 8, py::arg("n_permutations") = 8,
        py::arg("n_shapley_perms") = 32, py::arg("noise_rate") = 0.05,
        py::arg("lime_perturbations") = 256, py::arg("lime_kernel_width") = 0.0,
        "Run one feature scorer against a trained model; returns scores, the "
        "ranking, and the measured ranking time.");

    m.def(
        "apply_protocol",
        [](const BinaryDataset& data, const std::vector<int>& ranking, int k,
           const std::string& protocol, std::uint64_t seed,
           const BinaryDataset* marginal_source) {
            Rng rng(seed);
            return apply_protocol(data, ranking, k, parse_protocol(protocol), rng,
                                  marginal_source);
        },
        py::arg("data"), py::arg("ranking"), py::arg("k"), py::arg("protocol"),
        py::arg("seed") = 0, py::arg("marginal_source") = nullptr);

    m.def(
        "evaluate_curve",
        [](const BinaryDataset& train, const BinaryDataset& val, const BinaryDataset& test,
           const std::vector<int>& ranking, const std::string& protocol,
           std::vector<int> k_grid, int trials, const HyperParams& params,
           std::uint64_t seed) {
            EvalConfig cfg;
            cfg.protocol = parse_protocol(protocol);
            cfg.k_grid = k_grid.empty() ? default_k_grid(train.num_features()) : k_grid;
            cfg.trials = trials;
            cfg.model_params = params;
            cfg.seed = seed;
            return curve_to_dict(evaluate_curve(train, val, test, ranking, cfg));
        },
        py::arg("train"), py::arg("val"), py::arg("test"), py::arg("ranking"),
        py::arg("protocol"), py::arg("k_grid") = std::vector<int>{},
        py::arg("trials") = 10, py::arg("params"), py::arg("seed") = 0,
        "Retrain fresh models per k under the protocol and return the pruning curve.");

    m.def("default_k_grid", &default_k_grid, py::arg("n_features"));
    m.def(
        "spearman",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return spearman(a, b);
        },
        py::arg("a"), py::arg("b"));
}
