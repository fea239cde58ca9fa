#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "degm/baseline_fbs.hpp"
#include "degm/dataset_io.hpp"
#include "degm/evaluation.hpp"
#include "degm/generation.hpp"
#include "degm/training.hpp"

namespace degm {

// Everything needed to reproduce a run. Defaults are the published settings
// (d=256, l=4, m=50, T=100, lambda=1, tau=0.8, lr=1e-4, 100 epochs,
// 500 candidates, 67 event types plus PAD).
struct ExperimentConfig {
    std::filesystem::path dataset;
    std::string dataset_name = "dataset";
    // Either inline type names or a path to a JSON array of names.
    std::optional<std::vector<std::string>> ontology_names;
    std::optional<std::filesystem::path> ontology_path;

    ModelConfig model;
    TrainConfig train;
    GenerationConfig generation;
    int augment_n = 1;
    OverflowPolicy overflow = OverflowPolicy::truncate;
    SequenceMode sequence_mode = SequenceMode::direct_paths;
    bool save_candidates = false;
    bool fbs_prune_isolated = false;

    std::filesystem::path out_dir = "runs";
    std::uint64_t seed = 0;
    bool deterministic = false;

    // Seeds of the individual stages, all derived from `seed`.
    std::uint64_t init_seed() const;
    std::uint64_t train_seed() const;
    std::uint64_t generation_seed() const;
    std::uint64_t augment_seed() const;
    std::uint64_t fbs_seed() const;

    void validate() const;
};

constexpr int kDefaultEventTypes = 67;

// Layered update: keys present in `j` override `base`; unknown keys throw.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

// Output root when --out is not given: $DEGM_OUT_ROOT or "runs".
std::filesystem::path default_output_root();

// Resolves the ontology in effect and loads the dataset with it.
Dataset load_experiment_dataset(const ExperimentConfig& config);

// Sort, pad, truncate/reject oversize graphs, and expand by resorting.
std::vector<SortedGraph> prepare_training_corpus(const std::vector<InstanceGraph>& train_graphs,
                                                 const ExperimentConfig& config, const EventOntology& ontology);

struct TrainOutcome {
    TrainReport report;
    std::filesystem::path best_checkpoint;
    std::filesystem::path last_checkpoint;
};

// Writes config.json, train_log.jsonl and checkpoints/{best,last}.ckpt.
TrainOutcome cmd_train(const ExperimentConfig& config);

struct GenerateOutcome {
    std::vector<Schema> candidates;
    Selection selection;
    Schema schema;
    std::filesystem::path schema_path;
};

// Writes schema.json, selection_log.json and optionally candidates/.
GenerateOutcome cmd_generate(const ExperimentConfig& config, const std::filesystem::path& checkpoint);

struct EvaluateRequest {
    std::filesystem::path schema;
    std::filesystem::path dataset;
    Split split = Split::test;
    std::filesystem::path out_dir;
    std::string dataset_name = "dataset";
    std::string method = "DEGM";
    bool include_reference = false;
    SequenceMode sequence_mode = SequenceMode::direct_paths;
};

// Writes metrics.json and metrics.csv.
MetricsReport cmd_evaluate(const EvaluateRequest& request);

struct FbsOutcome {
    EdgeFrequencyTable table;
    Schema schema;
    MetricsReport metrics;
};

// Writes fbs_schema.json, fbs_metrics.json and fbs_metrics.csv.
FbsOutcome cmd_baseline_fbs(const ExperimentConfig& config);

void cmd_synth_data(const SyntheticCorpusConfig& spec, std::uint64_t seed, const std::filesystem::path& path);

}  // namespace degm
