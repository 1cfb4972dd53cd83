#include "tmfs/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tmfs/rng.hpp"
#include "tmfs/weight_views.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tmfs {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
std::string join(const std::vector<T>& values, char sep = ';') {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += sep;
        if constexpr (std::is_same_v<T, double>)
            out += fmt_double(values[i]);
        else
            out += std::to_string(values[i]);
    }
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    if (text.empty()) return out;
    for (const auto& cell : split(text, ';')) out.push_back(std::strtod(cell.c_str(), nullptr));
    return out;
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    if (text.empty()) return out;
    for (const auto& cell : split(text, ';')) out.push_back(std::atoi(cell.c_str()));
    return out;
}

void append_log(const std::string& out_dir, const std::string& line) {
    std::ofstream log(fs::path(out_dir) / "run.log", std::ios::app);
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
    log << stamp << "Z " << line << "\n";
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        out << content;
    }
    fs::rename(tmp, path);
}

}  // namespace

void apply_dataset_defaults(DatasetConfig& ds) {
    struct Defaults {
        const char* name;
        double s;
        int t;
    };
    // Tuned (s, T) per dataset used for the published baselines.
    static const Defaults table[] = {
        {"hierarchical_bool", 3.00, 600}, {"parity", 3.00, 600},
        {"feature_interaction", 3.00, 600}, {"balance_scale", 3.00, 600},
        {"banknote", 3.00, 600},          {"breast_cancer", 18.33, 500},
        {"digits", 6.92, 50},             {"ecoli", 3.00, 600},
        {"glass", 13.10, 50},             {"heart_disease", 3.32, 300},
        {"ionosphere", 19.82, 200},       {"iris", 14.80, 300},
        {"pima_diabetes", 8.63, 50},      {"sonar", 3.30, 50},
        {"spambase", 3.00, 600},          {"steel_plates_faults", 8.34, 50},
        {"transfusion", 3.00, 600},       {"vehicle", 1.17, 50},
        {"wine", 9.70, 800},
    };
    if (ds.specificity <= 0.0 || ds.threshold <= 0) {
        for (const auto& row : table) {
            if (ds.name == row.name) {
                if (ds.specificity <= 0.0) ds.specificity = row.s;
                if (ds.threshold <= 0) ds.threshold = row.t;
                break;
            }
        }
    }
    if (ds.specificity <= 0.0) ds.specificity = 3.0;
    if (ds.threshold <= 0) ds.threshold = 600;
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    RunConfig cfg;
    cfg.schema_version = j.value("schema_version", 1);
    if (cfg.schema_version != 1)
        throw std::invalid_argument("config: unsupported schema_version");
    cfg.seed = j.value("seed", std::uint64_t{42});
    cfg.output_dir = j.value("output_dir", std::string("results"));
    cfg.trials = j.value("trials", 10);
    cfg.parallelism = j.value("parallelism", 0);
    if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("protocols"))
        cfg.protocols = j["protocols"].get<std::vector<std::string>>();
    if (j.contains("k_grid")) cfg.k_grid = j["k_grid"].get<std::vector<int>>();
    if (j.contains("scorer")) {
        const auto& s = j["scorer"];
        cfg.scorer.n_masks = s.value("n_masks", cfg.scorer.n_masks);
        cfg.scorer.n_noise = s.value("n_noise", cfg.scorer.n_noise);
        cfg.scorer.n_permutations = s.value("n_permutations", cfg.scorer.n_permutations);
        cfg.scorer.n_shapley_perms = s.value("n_shapley_perms", cfg.scorer.n_shapley_perms);
        cfg.scorer.noise_rate = s.value("noise_rate", cfg.scorer.noise_rate);
        cfg.scorer.lime_perturbations =
            s.value("lime_perturbations", cfg.scorer.lime_perturbations);
        cfg.scorer.lime_kernel_width =
            s.value("lime_kernel_width", cfg.scorer.lime_kernel_width);
        cfg.scorer.validate();
    }
    if (!j.contains("datasets") || !j["datasets"].is_array() || j["datasets"].empty())
        throw std::invalid_argument("config: at least one dataset is required");
    for (const auto& d : j["datasets"]) {
        DatasetConfig ds;
        ds.name = d.value("name", std::string{});
        if (ds.name.empty()) throw std::invalid_argument("config: dataset without a name");
        ds.path = d.value("path", std::string{});
        ds.label_column = d.value("label_column", std::string{});
        ds.generator = d.value("generator", std::string{});
        ds.gen_n = d.value("n", ds.gen_n);
        ds.gen_d = d.value("d", ds.gen_d);
        ds.gen_k = d.value("k", ds.gen_k);
        ds.specificity = d.value("s", 0.0);
        ds.threshold = d.value("T", 0);
        ds.clauses = d.value("clauses", 500);
        ds.bins = d.value("bins", 10);
        ds.epochs = d.value("epochs", 30);
        ds.heatmap_rows = d.value("heatmap_rows", 0);
        ds.heatmap_cols = d.value("heatmap_cols", 0);
        if (ds.generator.empty() && ds.path.empty())
            throw std::invalid_argument("config: dataset '" + ds.name +
                                        "' needs a path or a generator");
        if (!ds.generator.empty() && ds.generator != "parity" &&
            ds.generator != "hierarchical_bool" && ds.generator != "feature_interaction")
            throw std::invalid_argument("config: unknown generator '" + ds.generator + "'");
        if (!ds.path.empty() && ds.label_column.empty())
            throw std::invalid_argument("config: dataset '" + ds.name +
                                        "' needs a label_column");
        apply_dataset_defaults(ds);
        cfg.datasets.push_back(std::move(ds));
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string config_hash(const RunConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["seed"] = cfg.seed;
    j["trials"] = cfg.trials;
    j["methods"] = cfg.methods;
    j["protocols"] = cfg.protocols;
    j["k_grid"] = cfg.k_grid;
    j["scorer"] = {{"n_masks", cfg.scorer.n_masks},
                   {"n_noise", cfg.scorer.n_noise},
                   {"n_permutations", cfg.scorer.n_permutations},
                   {"n_shapley_perms", cfg.scorer.n_shapley_perms},
                   {"noise_rate", cfg.scorer.noise_rate},
                   {"lime_perturbations", cfg.scorer.lime_perturbations},
                   {"lime_kernel_width", cfg.scorer.lime_kernel_width}};
    json ds_list = json::array();
    for (const auto& ds : cfg.datasets) {
        ds_list.push_back({{"name", ds.name},
                           {"path", ds.path},
                           {"label_column", ds.label_column},
                           {"generator", ds.generator},
                           {"n", ds.gen_n},
                           {"d", ds.gen_d},
                           {"k", ds.gen_k},
                           {"s", ds.specificity},
                           {"T", ds.threshold},
                           {"clauses", ds.clauses},
                           {"bins", ds.bins},
                           {"epochs", ds.epochs}});
    }
    j["datasets"] = ds_list;
    std::uint64_t h = fnv1a64(j.dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string resolve_output_dir(const RunConfig& cfg) {
    const char* root = std::getenv("TMFS_OUTPUT_ROOT");
    if (root && *root) return (fs::path(root) / cfg.output_dir).string();
    return cfg.output_dir;
}

std::vector<MethodSelection> expand_methods(const std::vector<std::string>& specs) {
    std::vector<MethodSelection> out;
    auto add = [&out](const MethodInfo& info, WeightVariant v) {
        MethodSelection sel;
        sel.id = info.id;
        sel.variant = v;
        sel.has_variant = info.uses_variant;
        for (const auto& existing : out)
            if (existing.qualified() == sel.qualified()) return;
        out.push_back(sel);
    };
    for (const auto& spec : specs) {
        if (spec == "all") {
            for (const auto& info : all_methods()) {
                add(info, WeightVariant::kNet);
                if (info.uses_variant) add(info, WeightVariant::kPosNeg);
            }
            continue;
        }
        auto colon = spec.find(':');
        std::string base = spec.substr(0, colon);
        const MethodInfo* info = find_method(base);
        if (!info) {
            std::string valid = "all";
            for (const auto& m : all_methods()) valid += ", " + m.id;
            throw std::invalid_argument("unknown method '" + spec +
                                        "'; valid methods: " + valid);
        }
        if (colon == std::string::npos) {
            add(*info, WeightVariant::kNet);
            if (info->uses_variant) add(*info, WeightVariant::kPosNeg);
        } else {
            std::string suffix = spec.substr(colon + 1);
            if (!info->uses_variant)
                throw std::invalid_argument("method '" + base + "' has no variants");
            if (suffix == "net")
                add(*info, WeightVariant::kNet);
            else if (suffix == "posneg")
                add(*info, WeightVariant::kPosNeg);
            else
                throw std::invalid_argument("unknown variant '" + suffix +
                                            "' (expected net or posneg)");
        }
    }
    if (out.empty()) throw std::invalid_argument("no methods selected");
    return out;
}

std::vector<Protocol> expand_protocols(const std::vector<std::string>& specs) {
    std::vector<Protocol> out;
    auto add = [&out](Protocol p) {
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    };
    for (const auto& spec : specs) {
        if (spec == "all") {
            add(Protocol::kInsertion);
            add(Protocol::kDeletion);
            add(Protocol::kRoar);
            add(Protocol::kRoad);
        } else {
            add(parse_protocol(spec));
        }
    }
    if (out.empty()) throw std::invalid_argument("no protocols selected");
    return out;
}

DatasetBundle prepare_dataset(const DatasetConfig& ds, const RunConfig& cfg) {
    RawDataset raw;
    if (!ds.generator.empty()) {
        std::uint64_t gen_seed = derive_seed(cfg.seed, "gen:" + ds.name);
        if (ds.generator == "parity")
            raw = generate_parity(ds.gen_n, ds.gen_d, ds.gen_k, gen_seed);
        else if (ds.generator == "hierarchical_bool")
            raw = generate_hierarchical_bool(ds.gen_n, ds.gen_d, gen_seed);
        else
            raw = generate_feature_interaction(ds.gen_n, ds.gen_d, gen_seed);
    } else {
        raw = load_csv(ds.path, ds.label_column);
    }

    auto split = stratified_split(raw.labels, derive_seed(cfg.seed, "split:" + ds.name));
    auto full = thermometer_encode(raw, ds.bins, split.train);
    full.name = ds.name;

    DatasetBundle bundle;
    bundle.name = ds.name;
    bundle.train = take_rows(full, split.train);
    bundle.val = take_rows(full, split.val);
    bundle.test = take_rows(full, split.test);
    bundle.train.name = bundle.val.name = bundle.test.name = ds.name;
    bundle.heatmap_rows = ds.heatmap_rows;
    bundle.heatmap_cols = ds.heatmap_cols;

    HyperParams p;
    const int groups = 2 * raw.num_classes;
    p.num_clauses = (ds.clauses + groups - 1) / groups * groups;  // round up to 2C multiple
    p.threshold = ds.threshold;
    p.specificity = ds.specificity;
    p.num_classes = raw.num_classes;
    p.epochs = ds.epochs;
    p.validate();
    bundle.params = p;
    return bundle;
}

TMClassifier train_base_model(const DatasetBundle& bundle, std::uint64_t run_seed) {
    HyperParams p = bundle.params;
    p.seed = derive_seed(run_seed, "model:" + bundle.name);
    TMClassifier model(p, bundle.train.num_columns());
    model.fit(bundle.train, p.epochs);
    return model;
}

// ------------------------------------------------------------- persistence

namespace {

constexpr const char* kScoreHeader =
    "schema_version\tconfig_hash\tdataset\tmethod\tvariant\tcategory\trank_time_s\tscores\t"
    "ranking";
constexpr const char* kCurveHeader =
    "schema_version\tconfig_hash\tdataset\tmethod\tvariant\tprotocol\tk_values\tmean_acc\t"
    "std_acc\tmean_val_acc\tstd_val_acc\tauc";

std::string score_row(const ScoreRecord& rec, const std::string& hash) {
    const MethodInfo* info = find_method(rec.score.method_id);
    std::string category = info ? std::string(category_name(info->category)) : "?";
    std::string row = "1\t" + hash + '\t' + rec.dataset + '\t' + rec.score.method_id + '\t' +
                      rec.score.variant + '\t' + category + '\t' +
                      fmt_double(rec.score.rank_time_seconds) + '\t' +
                      join(rec.score.scores) + '\t' + join(rec.score.ranking);
    return row;
}

json curve_to_json(const PruningCurve& c, const std::string& hash) {
    json j;
    j["schema_version"] = 1;
    j["config_hash"] = hash;
    j["dataset"] = c.dataset;
    j["method"] = c.method_id;
    j["variant"] = c.variant;
    j["protocol"] = c.protocol;
    j["k_values"] = c.k_values;
    j["mean_acc"] = c.mean_acc;
    j["std_acc"] = c.std_acc;
    j["mean_val_acc"] = c.mean_val_acc;
    j["std_val_acc"] = c.std_val_acc;
    j["auc"] = c.auc;
    return j;
}

PruningCurve curve_from_json(const json& j) {
    PruningCurve c;
    c.dataset = j.at("dataset").get<std::string>();
    c.method_id = j.at("method").get<std::string>();
    c.variant = j.at("variant").get<std::string>();
    c.protocol = j.at("protocol").get<std::string>();
    c.k_values = j.at("k_values").get<std::vector<int>>();
    c.mean_acc = j.at("mean_acc").get<std::vector<double>>();
    c.std_acc = j.at("std_acc").get<std::vector<double>>();
    c.mean_val_acc = j.at("mean_val_acc").get<std::vector<double>>();
    c.std_val_acc = j.at("std_val_acc").get<std::vector<double>>();
    c.auc = j.at("auc").get<double>();
    return c;
}

json score_to_json(const FeatureScore& s) {
    json j;
    j["method"] = s.method_id;
    j["variant"] = s.variant;
    j["scores"] = s.scores;
    j["ranking"] = s.ranking;
    j["rank_time_s"] = s.rank_time_seconds;
    return j;
}

FeatureScore score_from_json(const json& j) {
    FeatureScore s;
    s.method_id = j.at("method").get<std::string>();
    s.variant = j.at("variant").get<std::string>();
    s.scores = j.at("scores").get<std::vector<double>>();
    s.ranking = j.at("ranking").get<std::vector<int>>();
    s.rank_time_seconds = j.at("rank_time_s").get<double>();
    return s;
}

struct SortKey {
    std::string dataset, method, variant, protocol;
    bool operator<(const SortKey& o) const {
        return std::tie(dataset, method, variant, protocol) <
               std::tie(o.dataset, o.method, o.variant, o.protocol);
    }
};

}  // namespace

void write_score_table(const std::string& path, const std::vector<ScoreRecord>& scores,
                       const std::string& hash) {
    auto sorted = scores;
    std::sort(sorted.begin(), sorted.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
        return std::tie(a.dataset, a.score.method_id, a.score.variant) <
               std::tie(b.dataset, b.score.method_id, b.score.variant);
    });
    std::string text = std::string(kScoreHeader) + "\n";
    for (const auto& rec : sorted) text += score_row(rec, hash) + "\n";
    atomic_write(path, text);
}

void write_curve_table(const std::string& path, const std::vector<PruningCurve>& curves,
                       const std::string& hash) {
    auto sorted = curves;
    std::sort(sorted.begin(), sorted.end(), [](const PruningCurve& a, const PruningCurve& b) {
        return std::tie(a.dataset, a.method_id, a.variant, a.protocol) <
               std::tie(b.dataset, b.method_id, b.variant, b.protocol);
    });
    std::string text = std::string(kCurveHeader) + "\n";
    for (const auto& c : sorted) {
        text += "1\t" + hash + '\t' + c.dataset + '\t' + c.method_id + '\t' + c.variant +
                '\t' + c.protocol + '\t' + join(c.k_values) + '\t' + join(c.mean_acc) + '\t' +
                join(c.std_acc) + '\t' + join(c.mean_val_acc) + '\t' + join(c.std_val_acc) +
                '\t' + fmt_double(c.auc) + "\n";
    }
    atomic_write(path, text);
}

void write_curve_jsonl(const std::string& path, const std::vector<PruningCurve>& curves,
                       const std::string& hash) {
    auto sorted = curves;
    std::sort(sorted.begin(), sorted.end(), [](const PruningCurve& a, const PruningCurve& b) {
        return std::tie(a.dataset, a.method_id, a.variant, a.protocol) <
               std::tie(b.dataset, b.method_id, b.variant, b.protocol);
    });
    std::string text;
    for (const auto& c : sorted) text += curve_to_json(c, hash).dump() + "\n";
    atomic_write(path, text);
}

std::vector<ScoreRecord> read_score_table(const std::string& path, std::string* hash_out) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open score table: " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<ScoreRecord> out;
    std::set<std::string> hashes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line, '\t');
        if (cells.size() != 9)
            throw std::invalid_argument("malformed score table row in " + path);
        hashes.insert(cells[1]);
        ScoreRecord rec;
        rec.dataset = cells[2];
        rec.score.method_id = cells[3];
        rec.score.variant = cells[4];
        rec.score.rank_time_seconds = std::strtod(cells[6].c_str(), nullptr);
        rec.score.scores = parse_doubles(cells[7]);
        rec.score.ranking = parse_ints(cells[8]);
        out.push_back(std::move(rec));
    }
    if (hashes.size() > 1)
        throw std::invalid_argument("mixed config hashes in " + path);
    if (hash_out) *hash_out = hashes.empty() ? "" : *hashes.begin();
    return out;
}

std::vector<PruningCurve> read_curve_table(const std::string& path, std::string* hash_out) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open curve table: " + path);
    std::string line;
    std::getline(in, line);
    std::vector<PruningCurve> out;
    std::set<std::string> hashes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line, '\t');
        if (cells.size() != 12)
            throw std::invalid_argument("malformed curve table row in " + path);
        hashes.insert(cells[1]);
        PruningCurve c;
        c.dataset = cells[2];
        c.method_id = cells[3];
        c.variant = cells[4];
        c.protocol = cells[5];
        c.k_values = parse_ints(cells[6]);
        c.mean_acc = parse_doubles(cells[7]);
        c.std_acc = parse_doubles(cells[8]);
        c.mean_val_acc = parse_doubles(cells[9]);
        c.std_val_acc = parse_doubles(cells[10]);
        c.auc = std::strtod(cells[11].c_str(), nullptr);
        out.push_back(std::move(c));
    }
    if (hashes.size() > 1)
        throw std::invalid_argument("mixed config hashes in " + path);
    if (hash_out) *hash_out = hashes.empty() ? "" : *hashes.begin();
    return out;
}

// --------------------------------------------------------------- benchmark

namespace {

// Runs jobs on `threads` workers; each job catches its own failures.
void run_jobs(std::vector<std::function<void()>>& jobs, int threads) {
    if (threads <= 1) {
        for (auto& job : jobs) job();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    int count = std::min<int>(threads, static_cast<int>(jobs.size()));
    for (int t = 0; t < count; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                jobs[i]();
            }
        });
    }
    for (auto& w : workers) w.join();
}

json load_cell(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return json::object();
    try {
        json j = json::parse(in);
        return j.is_object() ? j : json::object();
    } catch (const json::exception&) {
        return json::object();  // unreadable cells are recomputed
    }
}

// Loads the cached base model when its meta matches this config hash,
// otherwise trains and caches it.
TMClassifier obtain_base_model(const DatasetBundle& bundle, const RunConfig& cfg,
                               const std::string& out_dir, const std::string& hash) {
    fs::path model_path = fs::path(out_dir) / "models" / (bundle.name + ".tm");
    fs::path meta_path = fs::path(out_dir) / "models" / (bundle.name + ".meta.json");
    if (fs::exists(model_path) && fs::exists(meta_path)) {
        json meta = load_cell(meta_path);
        if (meta.value("config_hash", "") == hash)
            return TMClassifier::load_file(model_path.string());
    }
    TMClassifier base = train_base_model(bundle, cfg.seed);
    base.save_file(model_path.string());
    json meta{{"config_hash", hash}, {"dataset", bundle.name}};
    atomic_write(meta_path, meta.dump(2));
    return base;
}

}  // namespace

BenchmarkResult run_benchmark(const RunConfig& cfg, bool with_curves) {
    const std::string out_dir = resolve_output_dir(cfg);
    const std::string hash = config_hash(cfg);
    fs::create_directories(fs::path(out_dir) / "cells");
    fs::create_directories(fs::path(out_dir) / "models");

    auto selections = expand_methods(cfg.methods);
    auto protocols = expand_protocols(cfg.protocols);
    const int threads =
        cfg.parallelism > 0 ? cfg.parallelism
                            : std::max(1u, std::thread::hardware_concurrency());

    BenchmarkResult result;
    std::mutex collect_mutex;

    for (const auto& ds_cfg : cfg.datasets) {
        DatasetBundle bundle;
        try {
            bundle = prepare_dataset(ds_cfg, cfg);
        } catch (const std::exception& e) {
            result.errors.push_back({"dataset__" + ds_cfg.name, e.what()});
            continue;
        }

        TMClassifier base = obtain_base_model(bundle, cfg, out_dir, hash);

        auto incidence = literal_incidence(base);
        auto views = accumulate_weights(base, incidence);
        auto alpha = class_frequencies(bundle.train);

        // Stage A: score cells.
        std::map<std::string, FeatureScore> ranked;  // qualified id -> score
        std::vector<std::function<void()>> score_jobs;
        for (const auto& sel : selections) {
            score_jobs.push_back([&, sel] {
                const std::string key =
                    "score__" + bundle.name + "__" + sel.qualified();
                fs::path cell_path = fs::path(out_dir) / "cells" / (key + ".json");
                json cell = load_cell(cell_path);
                if (cell.value("config_hash", "") == hash &&
                    cell.value("status", "") == "ok") {
                    auto score = score_from_json(cell.at("payload"));
                    std::lock_guard lock(collect_mutex);
                    ranked[sel.qualified()] = score;
                    result.scores.push_back({bundle.name, std::move(score)});
                    ++result.resumed_cells;
                    return;
                }
                try {
                    ScorerContext ctx;
                    ctx.model = &base;
                    ctx.train = &bundle.train;
                    ctx.val = &bundle.val;
                    ctx.views = &views;
                    ctx.alpha = alpha;
                    ctx.config = cfg.scorer;
                    ctx.config.variant = sel.variant;
                    ctx.config.seed =
                        derive_seed(cfg.seed, "scorer:" + bundle.name + ":" + sel.qualified());
                    FeatureScore score = run_scorer(sel.id, sel.variant, ctx);
                    json out{{"schema_version", 1},
                             {"config_hash", hash},
                             {"kind", "score"},
                             {"dataset", bundle.name},
                             {"status", "ok"},
                             {"payload", score_to_json(score)}};
                    atomic_write(cell_path, out.dump());
                    std::lock_guard lock(collect_mutex);
                    ranked[sel.qualified()] = score;
                    result.scores.push_back({bundle.name, std::move(score)});
                    ++result.computed_cells;
                } catch (const std::exception& e) {
                    json out{{"schema_version", 1},
                             {"config_hash", hash},
                             {"kind", "score"},
                             {"dataset", bundle.name},
                             {"status", "error"},
                             {"message", e.what()}};
                    atomic_write(cell_path, out.dump());
                    std::lock_guard lock(collect_mutex);
                    result.errors.push_back({key, e.what()});
                }
            });
        }
        run_jobs(score_jobs, threads);

        if (!with_curves) continue;

        // Stage B: curve cells.
        std::vector<int> k_grid =
            cfg.k_grid.empty() ? default_k_grid(bundle.train.num_features()) : cfg.k_grid;
        std::vector<std::function<void()>> curve_jobs;
        for (const auto& sel : selections) {
            auto it = ranked.find(sel.qualified());
            if (it == ranked.end()) continue;  // scorer failed; already recorded
            const FeatureScore& score = it->second;
            for (Protocol protocol : protocols) {
                curve_jobs.push_back([&, sel, protocol, &score = it->second] {
                    const std::string proto(protocol_name(protocol));
                    const std::string key = "curve__" + bundle.name + "__" +
                                            sel.qualified() + "__" + proto;
                    fs::path cell_path = fs::path(out_dir) / "cells" / (key + ".json");
                    json cell = load_cell(cell_path);
                    if (cell.value("config_hash", "") == hash &&
                        cell.value("status", "") == "ok") {
                        std::lock_guard lock(collect_mutex);
                        result.curves.push_back(curve_from_json(cell.at("payload")));
                        ++result.resumed_cells;
                        return;
                    }
                    try {
                        EvalConfig eval_cfg;
                        eval_cfg.protocol = protocol;
                        eval_cfg.k_grid = k_grid;
                        eval_cfg.trials = cfg.trials;
                        eval_cfg.model_params = bundle.params;
                        eval_cfg.seed = derive_seed(
                            cfg.seed, "curve:" + bundle.name + ":" + sel.qualified() + ":" +
                                          proto);
                        PruningCurve curve = evaluate_curve(bundle.train, bundle.val,
                                                            bundle.test, score.ranking,
                                                            eval_cfg);
                        curve.method_id = sel.id;
                        curve.variant = score.variant;
                        json out{{"schema_version", 1},
                                 {"config_hash", hash},
                                 {"kind", "curve"},
                                 {"status", "ok"},
                                 {"payload", curve_to_json(curve, hash)}};
                        atomic_write(cell_path, out.dump());
                        std::lock_guard lock(collect_mutex);
                        result.curves.push_back(std::move(curve));
                        ++result.computed_cells;
                    } catch (const std::exception& e) {
                        json out{{"schema_version", 1},
                                 {"config_hash", hash},
                                 {"kind", "curve"},
                                 {"status", "error"},
                                 {"message", e.what()}};
                        atomic_write(cell_path, out.dump());
                        std::lock_guard lock(collect_mutex);
                        result.errors.push_back({key, e.what()});
                    }
                });
            }
        }
        run_jobs(curve_jobs, threads);
    }

    write_score_table((fs::path(out_dir) / "scores.tsv").string(), result.scores, hash);
    if (with_curves) {
        write_curve_table((fs::path(out_dir) / "curves.tsv").string(), result.curves, hash);
        write_curve_jsonl((fs::path(out_dir) / "curves.jsonl").string(), result.curves, hash);
    }
    if (!result.errors.empty()) {
        std::string text = "cell\tmessage\n";
        std::sort(result.errors.begin(), result.errors.end(),
                  [](const CellError& a, const CellError& b) { return a.key < b.key; });
        for (const auto& e : result.errors) text += e.key + '\t' + e.message + '\n';
        atomic_write(fs::path(out_dir) / "errors.tsv", text);
    }
    return result;
}

// ---------------------------------------------------------------- commands

void cmd_train(const RunConfig& cfg, bool export_bits_flag) {
    const std::string out_dir = resolve_output_dir(cfg);
    const std::string hash = config_hash(cfg);
    fs::create_directories(fs::path(out_dir) / "models");
    fs::create_directories(fs::path(out_dir) / "metrics");

    std::string table =
        "schema_version\tconfig_hash\tdataset\tsamples\tfeatures\tclasses\ts\tT\tclauses\t"
        "epochs\taccuracy\tmacro_f1\n";
    for (const auto& ds_cfg : cfg.datasets) {
        DatasetBundle bundle = prepare_dataset(ds_cfg, cfg);
        TMClassifier model = train_base_model(bundle, cfg.seed);
        model.save_file((fs::path(out_dir) / "models" / (bundle.name + ".tm")).string());
        json meta{{"config_hash", hash}, {"dataset", bundle.name}};
        atomic_write(fs::path(out_dir) / "models" / (bundle.name + ".meta.json"),
                     meta.dump(2));

        double acc = model.accuracy(bundle.test);
        double f1 = model.macro_f1(bundle.test);
        std::size_t samples =
            bundle.train.n_samples() + bundle.val.n_samples() + bundle.test.n_samples();
        table += "1\t" + hash + '\t' + bundle.name + '\t' + std::to_string(samples) + '\t' +
                 std::to_string(bundle.train.num_features()) + '\t' +
                 std::to_string(bundle.params.num_classes) + '\t' +
                 fmt_double(bundle.params.specificity) + '\t' +
                 std::to_string(bundle.params.threshold) + '\t' +
                 std::to_string(bundle.params.num_clauses) + '\t' +
                 std::to_string(bundle.params.epochs) + '\t' + fmt_double(acc) + '\t' +
                 fmt_double(f1) + "\n";

        if (export_bits_flag) {
            fs::create_directories(fs::path(out_dir) / "bits");
            std::ofstream bits(fs::path(out_dir) / "bits" / (bundle.name + ".bits.txt"));
            export_bits(bundle.train, bits);
            export_bits(bundle.val, bits);
            export_bits(bundle.test, bits);
        }
    }
    atomic_write(fs::path(out_dir) / "metrics" / "train_metrics.tsv", table);
    append_log(out_dir, "train completed");
}

void cmd_rank(const RunConfig& cfg, bool dump_views_flag) {
    const std::string out_dir = resolve_output_dir(cfg);
    run_benchmark(cfg, /*with_curves=*/false);
    if (dump_views_flag) {
        const std::string hash = config_hash(cfg);
        fs::create_directories(fs::path(out_dir) / "views");
        for (const auto& ds_cfg : cfg.datasets) {
            DatasetBundle bundle = prepare_dataset(ds_cfg, cfg);
            TMClassifier base = obtain_base_model(bundle, cfg, out_dir, hash);
            auto views = accumulate_weights(base, literal_incidence(base), false);
            std::ofstream out(fs::path(out_dir) / "views" / (bundle.name + ".wpm.tsv"));
            dump_weight_views(views, out);
        }
    }
    append_log(out_dir, "rank completed");
}

void cmd_eval(const RunConfig& cfg) {
    RunConfig with_reference = cfg;
    // The random-reference curve ships with every evaluation.
    auto selections = expand_methods(cfg.methods);
    bool has_random = false;
    for (const auto& sel : selections)
        if (sel.id == "random") has_random = true;
    if (!has_random) with_reference.methods.push_back("random");

    auto result = run_benchmark(with_reference, /*with_curves=*/true);
    append_log(resolve_output_dir(cfg),
               "eval completed: " + std::to_string(result.computed_cells) + " computed, " +
                   std::to_string(result.resumed_cells) + " resumed, " +
                   std::to_string(result.errors.size()) + " failed");
}

namespace {

std::string tradeoff_rows(const TradeoffTable& table) {
    std::string text =
        "method\tdataset\tcategory\tauc\trank_time_s\tnormalized_auc\tnormalized_time\n";
    for (const auto& r : table.records)
        text += r.method + '\t' + r.dataset + '\t' + r.category + '\t' + fmt_double(r.auc) +
                '\t' + fmt_double(r.rank_time) + '\t' + fmt_double(r.normalized_auc) + '\t' +
                fmt_double(r.normalized_time) + '\n';
    return text;
}

}  // namespace

void cmd_analyze(const RunConfig& cfg) {
    const std::string out_dir = resolve_output_dir(cfg);
    fs::path scores_path = fs::path(out_dir) / "scores.tsv";
    fs::path curves_path = fs::path(out_dir) / "curves.tsv";
    if (!fs::exists(scores_path) && !fs::exists(curves_path))
        throw std::invalid_argument("no results in '" + out_dir +
                                    "'; run eval (or rank) first");

    std::string scores_hash, curves_hash;
    std::vector<ScoreRecord> scores;
    std::vector<PruningCurve> curves;
    if (fs::exists(scores_path)) scores = read_score_table(scores_path.string(), &scores_hash);
    if (fs::exists(curves_path)) curves = read_curve_table(curves_path.string(), &curves_hash);
    if (!scores_hash.empty() && !curves_hash.empty() && scores_hash != curves_hash)
        throw std::invalid_argument("result directory mixes config hashes (" + scores_hash +
                                    " vs " + curves_hash + ")");
    const std::string hash = config_hash(cfg);
    const std::string found = scores_hash.empty() ? curves_hash : scores_hash;
    if (!found.empty() && found != hash)
        throw std::invalid_argument("results were produced by config hash " + found +
                                    " but the current config hashes to " + hash);

    fs::path analysis_dir = fs::path(out_dir) / "analysis";
    fs::create_directories(analysis_dir);

    if (!curves.empty()) {
        // Top-5 tally.
        auto tally = top5_tally(curves);
        std::string text = "method\tprotocol\tcount\n";
        for (const auto& t : tally)
            text += t.method + '\t' + t.protocol + '\t' + std::to_string(t.count) + '\n';
        atomic_write(analysis_dir / "top5_tally.tsv", text);

        // Pick the profile/tradeoff protocol: road when present, else the
        // alphabetically first one in the results.
        std::set<std::string> protocols_present;
        for (const auto& c : curves) protocols_present.insert(c.protocol);
        std::string proto_name = protocols_present.count("road")
                                     ? std::string("road")
                                     : *protocols_present.begin();
        Protocol proto = parse_protocol(proto_name);

        std::vector<FeatureScore> flat;
        std::vector<std::string> flat_ds;
        for (const auto& rec : scores) {
            flat.push_back(rec.score);
            flat_ds.push_back(rec.dataset);
        }
        auto table = tradeoff_table(curves, flat, flat_ds, proto);
        atomic_write(analysis_dir / "tradeoff.tsv", tradeoff_rows(table));
        {
            std::string text2 = "category\tdataset\tnormalized_auc\tnormalized_time\n";
            for (const auto& cm : table.category_means)
                text2 += cm.category + '\t' + cm.dataset + '\t' +
                         fmt_double(cm.normalized_auc) + '\t' +
                         fmt_double(cm.normalized_time) + '\n';
            atomic_write(analysis_dir / "tradeoff_categories.tsv", text2);
        }
        // Top-3 selections, both orders of normalize/select.
        {
            std::map<std::string, std::vector<TradeoffRecord>> by_ds;
            for (const auto& r : table.records) by_ds[r.dataset].push_back(r);
            std::string norm_first = "method\tdataset\tnormalized_auc\tnormalized_time\n";
            std::string select_first = "method\tdataset\tnormalized_auc\tnormalized_time\n";
            for (auto& [ds, rows] : by_ds) {
                auto ranked_rows = rows;
                std::sort(ranked_rows.begin(), ranked_rows.end(),
                          [](const TradeoffRecord& a, const TradeoffRecord& b) {
                              if (a.auc != b.auc) return a.auc > b.auc;
                              return a.method < b.method;
                          });
                ranked_rows.resize(std::min<std::size_t>(3, ranked_rows.size()));
                // normalize-then-select: values from the full-table normalization
                for (const auto& r : ranked_rows)
                    norm_first += r.method + '\t' + ds + '\t' + fmt_double(r.normalized_auc) +
                                  '\t' + fmt_double(r.normalized_time) + '\n';
                // select-then-normalize: min-max within the top-3 only
                double a_lo = 1e300, a_hi = -1e300, t_lo = 1e300, t_hi = -1e300;
                for (const auto& r : ranked_rows) {
                    a_lo = std::min(a_lo, r.auc);
                    a_hi = std::max(a_hi, r.auc);
                    t_lo = std::min(t_lo, r.rank_time);
                    t_hi = std::max(t_hi, r.rank_time);
                }
                for (const auto& r : ranked_rows) {
                    double na = a_hi > a_lo ? (r.auc - a_lo) / (a_hi - a_lo) : 1.0;
                    double nt = t_hi > t_lo ? (r.rank_time - t_lo) / (t_hi - t_lo) : 0.0;
                    select_first +=
                        r.method + '\t' + ds + '\t' + fmt_double(na) + '\t' + fmt_double(nt) +
                        '\n';
                }
            }
            atomic_write(analysis_dir / "tradeoff_top3_normalize_first.tsv", norm_first);
            atomic_write(analysis_dir / "tradeoff_top3_select_first.tsv", select_first);
        }

        // Method profiles, distances, dendrogram.
        std::vector<std::string> dataset_order;
        {
            std::set<std::string> seen;
            for (const auto& c : curves)
                if (c.protocol == proto_name && seen.insert(c.dataset).second)
                    dataset_order.push_back(c.dataset);
            std::sort(dataset_order.begin(), dataset_order.end());
        }
        auto profiles = build_profiles(curves, dataset_order, proto);
        auto dist = distance_matrix(profiles);
        {
            std::string text2 = "method";
            for (const auto& p : profiles) text2 += '\t' + p.method_id;
            text2 += '\n';
            for (std::size_t i = 0; i < profiles.size(); ++i) {
                text2 += profiles[i].method_id;
                for (std::size_t j = 0; j < profiles.size(); ++j)
                    text2 += '\t' + fmt_double(dist.at(i, j));
                text2 += '\n';
            }
            atomic_write(analysis_dir / "distance_matrix.tsv", text2);
        }
        {
            std::vector<std::string> leaves;
            for (const auto& p : profiles) leaves.push_back(p.method_id);
            auto tree = average_linkage(dist, leaves);
            std::string text2 = "cluster_a\tcluster_b\theight\tsize\n";
            for (const auto& m : tree.merges)
                text2 += std::to_string(m.a) + '\t' + std::to_string(m.b) + '\t' +
                         fmt_double(m.height) + '\t' + std::to_string(m.size) + '\n';
            text2 += "# leaves:";
            for (const auto& leaf : tree.leaves) text2 += ' ' + leaf;
            text2 += '\n';
            atomic_write(analysis_dir / "dendrogram.tsv", text2);
        }
    }

    if (!scores.empty()) {
        // Pairwise ranking correlations per dataset.
        std::map<std::string, std::vector<const ScoreRecord*>> by_ds;
        for (const auto& rec : scores) by_ds[rec.dataset].push_back(&rec);
        std::string text = "dataset\tmethod_a\tmethod_b\tspearman\n";
        for (const auto& [ds, recs] : by_ds) {
            for (std::size_t i = 0; i < recs.size(); ++i) {
                for (std::size_t j = i + 1; j < recs.size(); ++j) {
                    std::string a = recs[i]->score.method_id +
                                    (recs[i]->score.variant == "-"
                                         ? ""
                                         : ":" + recs[i]->score.variant);
                    std::string b = recs[j]->score.method_id +
                                    (recs[j]->score.variant == "-"
                                         ? ""
                                         : ":" + recs[j]->score.variant);
                    double rho = rank_correlation(recs[i]->score, recs[j]->score);
                    text += ds + '\t' + a + '\t' + b + '\t' + fmt_double(rho) + '\n';
                }
            }
        }
        atomic_write(analysis_dir / "correlations.tsv", text);

        // Heatmaps for datasets with a configured grid.
        for (const auto& ds_cfg : cfg.datasets) {
            if (ds_cfg.heatmap_rows < 1 || ds_cfg.heatmap_cols < 1) continue;
            for (const auto& rec : scores) {
                if (rec.dataset != ds_cfg.name) continue;
                auto grid = heatmap_export(rec.score, ds_cfg.heatmap_rows, ds_cfg.heatmap_cols);
                std::string name = "heatmap__" + ds_cfg.name + "__" + rec.score.method_id;
                if (rec.score.variant != "-") name += "_" + rec.score.variant;
                std::string text2;
                for (std::size_t r = 0; r < grid.rows; ++r) {
                    for (std::size_t c = 0; c < grid.cols; ++c)
                        text2 += (c ? "\t" : "") + fmt_double(grid.at(r, c));
                    text2 += '\n';
                }
                atomic_write(analysis_dir / (name + ".tsv"), text2);
            }
        }
    }
    append_log(out_dir, "analyze completed");
}

void cmd_report(const RunConfig& cfg) {
    const std::string out_dir = resolve_output_dir(cfg);
    const std::string hash = config_hash(cfg);
    fs::path metrics_path = fs::path(out_dir) / "metrics" / "train_metrics.tsv";
    if (!fs::exists(metrics_path))
        throw std::invalid_argument("no train metrics in '" + out_dir +
                                    "'; run train first");

    std::string report;
    report += "# Benchmark report\n\n";
    report += "Config hash: `" + hash + "`\n\n";
    report += "## Baselines (test split)\n\n";
    report += "| Dataset | Samples | Features | Classes | s | T | Acc (%) | F1 (%) |\n";
    report += "|---|---|---|---|---|---|---|---|\n";
    {
        std::ifstream in(metrics_path);
        std::string line;
        std::getline(in, line);
        std::vector<std::vector<std::string>> rows;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto cells = split(line, '\t');
            if (cells.size() < 12) continue;
            if (cells[1] != hash)
                throw std::invalid_argument(
                    "train metrics were produced by a different config (hash " + cells[1] +
                    ")");
            rows.push_back(cells);
        }
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a[2] < b[2]; });
        for (const auto& cells : rows) {
            char acc[32], f1[32];
            std::snprintf(acc, sizeof acc, "%.2f", std::strtod(cells[10].c_str(), nullptr) * 100);
            std::snprintf(f1, sizeof f1, "%.2f", std::strtod(cells[11].c_str(), nullptr) * 100);
            report += "| " + cells[2] + " | " + cells[3] + " | " + cells[4] + " | " + cells[5] +
                      " | " + cells[6] + " | " + cells[7] + " | " + acc + " | " + f1 + " |\n";
        }
    }

    fs::path curves_path = fs::path(out_dir) / "curves.tsv";
    if (fs::exists(curves_path)) {
        std::string curves_hash;
        auto curves = read_curve_table(curves_path.string(), &curves_hash);
        if (!curves_hash.empty() && curves_hash != hash)
            throw std::invalid_argument("curve results carry config hash " + curves_hash +
                                        ", expected " + hash);
        report += "\n## Top-5 AUC appearances\n\n";
        report += "| Method | Protocol | Count |\n|---|---|---|\n";
        for (const auto& t : top5_tally(curves))
            report += "| " + t.method + " | " + t.protocol + " | " + std::to_string(t.count) +
                      " |\n";
    }

    atomic_write(fs::path(out_dir) / "report.md", report);
    append_log(out_dir, "report completed");
}

}  // namespace tmfs
