#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmfs/analysis.hpp"
#include "tmfs/dataset.hpp"
#include "tmfs/protocols.hpp"
#include "tmfs/scorers.hpp"
#include "tmfs/tm.hpp"

namespace tmfs {

struct DatasetConfig {
    std::string name;
    std::string path;          // delimited text source; empty when generated
    std::string label_column;
    std::string generator;     // "", "parity", "hierarchical_bool", "feature_interaction"
    int gen_n = 500;
    int gen_d = 20;
    int gen_k = 5;
    double specificity = 0.0;  // 0 -> per-name default
    int threshold = 0;         // 0 -> per-name default
    int clauses = 500;
    int bins = 10;
    int epochs = 30;
    int heatmap_rows = 0;
    int heatmap_cols = 0;
};

struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 42;
    std::string output_dir = "results";
    int trials = 10;
    int parallelism = 0;  // 0 = all hardware threads
    std::vector<DatasetConfig> datasets;
    std::vector<std::string> methods{"all"};
    std::vector<std::string> protocols{"all"};
    std::vector<int> k_grid;  // empty -> default policy per dataset
    ScorerConfig scorer;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// Fills default (s, T) for known dataset names.
void apply_dataset_defaults(DatasetConfig& ds);

// Stable 16-hex-digit digest of everything that affects results; the output
// directory and the parallelism degree are deliberately excluded.
std::string config_hash(const RunConfig& cfg);

// Output directory after the TMFS_OUTPUT_ROOT override.
std::string resolve_output_dir(const RunConfig& cfg);

struct MethodSelection {
    std::string id;
    WeightVariant variant = WeightVariant::kNet;
    bool has_variant = false;

    std::string qualified() const {
        return has_variant ? id + ":" + std::string(variant_name(variant)) : id;
    }
};
// Expands specs ("all", "chi2", "cw_sum:posneg", bare variant-capable ids)
// into concrete selections; unknown names throw with the valid id list.
std::vector<MethodSelection> expand_methods(const std::vector<std::string>& specs);
std::vector<Protocol> expand_protocols(const std::vector<std::string>& specs);

struct DatasetBundle {
    std::string name;
    BinaryDataset train, val, test;
    HyperParams params;
    int heatmap_rows = 0;
    int heatmap_cols = 0;
};
DatasetBundle prepare_dataset(const DatasetConfig& ds, const RunConfig& cfg);
TMClassifier train_base_model(const DatasetBundle& bundle, std::uint64_t run_seed);

struct ScoreRecord {
    std::string dataset;
    FeatureScore score;
};
struct CellError {
    std::string key;
    std::string message;
};
struct BenchmarkResult {
    std::vector<ScoreRecord> scores;
    std::vector<PruningCurve> curves;
    std::vector<CellError> errors;
    int computed_cells = 0;
    int resumed_cells = 0;
};

// Scores every selected method on every dataset and, when `with_curves`,
// retrains pruning curves for every (method, protocol) cell. Cells persist
// under <out>/cells/ and finished ones are skipped on rerun. Cell failures
// are recorded and the run continues.
BenchmarkResult run_benchmark(const RunConfig& cfg, bool with_curves = true);

// Command entry points. User-input problems throw std::invalid_argument.
void cmd_train(const RunConfig& cfg, bool export_bits_flag = false);
void cmd_rank(const RunConfig& cfg, bool dump_views_flag = false);
void cmd_eval(const RunConfig& cfg);
void cmd_analyze(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

// Table I/O shared by commands and tests.
void write_score_table(const std::string& path, const std::vector<ScoreRecord>& scores,
                       const std::string& hash);
void write_curve_table(const std::string& path, const std::vector<PruningCurve>& curves,
                       const std::string& hash);
void write_curve_jsonl(const std::string& path, const std::vector<PruningCurve>& curves,
                       const std::string& hash);
std::vector<ScoreRecord> read_score_table(const std::string& path, std::string* hash_out);
std::vector<PruningCurve> read_curve_table(const std::string& path, std::string* hash_out);

}  // namespace tmfs
