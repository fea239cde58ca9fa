#include "degm/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "degm/checkpoint.hpp"

namespace degm {

namespace fs = std::filesystem;

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& section) {
    if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown config key '" + section + key + "'");
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

Objective parse_objective(const std::string& s) {
    if (s == "simplified") return Objective::simplified;
    if (s == "diffusion_lm_e2e") return Objective::diffusion_lm_e2e;
    throw ConfigError("unknown objective '" + s + "'");
}

std::string to_string(Objective o) { return o == Objective::simplified ? "simplified" : "diffusion_lm_e2e"; }

RefineSource parse_refine(const std::string& s) {
    if (s == "type_representation") return RefineSource::type_representation;
    if (s == "structure_representation") return RefineSource::structure_representation;
    throw ConfigError("unknown refine_source '" + s + "'");
}

std::string to_string(RefineSource r) {
    return r == RefineSource::type_representation ? "type_representation" : "structure_representation";
}

SequenceMode parse_sequence_mode(const std::string& s) {
    if (s == "direct_paths") return SequenceMode::direct_paths;
    if (s == "reachable_triples") return SequenceMode::reachable_triples;
    throw ConfigError("unknown sequence_mode '" + s + "'");
}

std::string to_string(SequenceMode s) {
    return s == SequenceMode::direct_paths ? "direct_paths" : "reachable_triples";
}

OverflowPolicy parse_overflow(const std::string& s) {
    if (s == "truncate") return OverflowPolicy::truncate;
    if (s == "reject") return OverflowPolicy::reject;
    throw ConfigError("unknown overflow policy '" + s + "'");
}

std::string read_text(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string("cannot open ") + what + " " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

std::string type_names_hint(const std::vector<std::string>& names) {
    return std::to_string(names.size()) + " types";
}

// Training/generation need a concrete ontology; num_types follows it.
ModelConfig model_for(const ExperimentConfig& config, const EventOntology& ontology) {
    ModelConfig model = config.model;
    if (model.num_types != ontology.size()) {
        std::cerr << "note: model.num_types " << model.num_types << " replaced by ontology size " << ontology.size()
                  << " (" << type_names_hint(ontology.real_names()) << " + PAD)\n";
        model.num_types = ontology.size();
    }
    return model;
}

nlohmann::json epoch_to_json(const EpochRecord& r) {
    nlohmann::json j{{"epoch", r.epoch}, {"loss_total", r.total}, {"loss_type", r.type}, {"loss_struct", r.structure}};
    j["val_event_type_f1"] = r.val_event_type_f1 ? nlohmann::json(*r.val_event_type_f1) : nlohmann::json(nullptr);
    return j;
}

}  // namespace

std::uint64_t ExperimentConfig::init_seed() const { return derive_seed(seed, 1); }
std::uint64_t ExperimentConfig::train_seed() const { return derive_seed(seed, 2); }
std::uint64_t ExperimentConfig::generation_seed() const { return derive_seed(seed, 3); }
std::uint64_t ExperimentConfig::augment_seed() const { return derive_seed(seed, 4); }
std::uint64_t ExperimentConfig::fbs_seed() const { return derive_seed(seed, 5); }

void ExperimentConfig::validate() const {
    model.validate();
    train.validate();
    generation.validate();
    if (augment_n < 1) throw ConfigError("augment_n must be >= 1");
    if (ontology_names && ontology_path) throw ConfigError("ontology given both inline and as a path");
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
    check_keys(j,
               {"dataset", "dataset_name", "ontology", "seed", "out", "deterministic", "model", "train", "generation",
                "evaluation", "fbs"},
               "");
    if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
    read(j, "dataset_name", c.dataset_name);
    read(j, "seed", c.seed);
    read(j, "deterministic", c.deterministic);
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("ontology")) {
        const auto& o = j.at("ontology");
        if (o.is_array()) {
            c.ontology_names = o.get<std::vector<std::string>>();
            c.ontology_path.reset();
        } else if (o.is_string()) {
            c.ontology_path = o.get<std::string>();
            c.ontology_names.reset();
        } else if (!o.is_null()) {
            throw ConfigError("'ontology' must be a list of names or a path");
        }
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m, {"d", "layers", "m", "num_types", "T", "residual", "activation"}, "model.");
        ModelConfig parsed = model_config_from_json(m);
        // Only override what was given.
        read(m, "d", c.model.d);
        read(m, "layers", c.model.layers);
        read(m, "m", c.model.m);
        read(m, "num_types", c.model.num_types);
        read(m, "T", c.model.T);
        read(m, "residual", c.model.residual);
        if (m.contains("activation")) c.model.activation = parsed.activation;
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t,
                   {"lr", "epochs", "batch_size", "lambda_st", "objective", "full_t_sum", "mask_pad",
                    "val_candidates", "augment_n", "overflow"},
                   "train.");
        read(t, "lr", c.train.lr);
        read(t, "epochs", c.train.epochs);
        read(t, "batch_size", c.train.batch_size);
        read(t, "lambda_st", c.train.lambda_st);
        read(t, "full_t_sum", c.train.full_t_sum);
        read(t, "mask_pad", c.train.mask_pad);
        read(t, "val_candidates", c.train.val_candidates);
        read(t, "augment_n", c.augment_n);
        if (t.contains("objective")) c.train.objective = parse_objective(t.at("objective").get<std::string>());
        if (t.contains("overflow")) c.overflow = parse_overflow(t.at("overflow").get<std::string>());
    }
    if (j.contains("generation")) {
        const auto& g = j.at("generation");
        check_keys(g, {"num_candidates", "tau", "refine_source", "threads", "save_candidates"}, "generation.");
        read(g, "num_candidates", c.generation.num_candidates);
        read(g, "tau", c.generation.tau);
        read(g, "threads", c.generation.threads);
        read(g, "save_candidates", c.save_candidates);
        if (g.contains("refine_source"))
            c.generation.refine_source = parse_refine(g.at("refine_source").get<std::string>());
    }
    if (j.contains("evaluation")) {
        const auto& e = j.at("evaluation");
        check_keys(e, {"sequence_mode"}, "evaluation.");
        if (e.contains("sequence_mode")) c.sequence_mode = parse_sequence_mode(e.at("sequence_mode").get<std::string>());
    }
    if (j.contains("fbs")) {
        const auto& f = j.at("fbs");
        check_keys(f, {"prune_isolated"}, "fbs.");
        read(f, "prune_isolated", c.fbs_prune_isolated);
    }
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["dataset"] = c.dataset.string();
    j["dataset_name"] = c.dataset_name;
    if (c.ontology_names) j["ontology"] = *c.ontology_names;
    else if (c.ontology_path) j["ontology"] = c.ontology_path->string();
    else j["ontology"] = nullptr;
    j["seed"] = c.seed;
    j["out"] = c.out_dir.string();
    j["deterministic"] = c.deterministic;
    j["model"] = model_config_to_json(c.model);
    j["train"] = {{"lr", c.train.lr},
                  {"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"lambda_st", c.train.lambda_st},
                  {"objective", to_string(c.train.objective)},
                  {"full_t_sum", c.train.full_t_sum},
                  {"mask_pad", c.train.mask_pad},
                  {"val_candidates", c.train.val_candidates},
                  {"augment_n", c.augment_n},
                  {"overflow", c.overflow == OverflowPolicy::truncate ? "truncate" : "reject"}};
    j["generation"] = {{"num_candidates", c.generation.num_candidates},
                       {"tau", c.generation.tau},
                       {"refine_source", to_string(c.generation.refine_source)},
                       {"threads", c.generation.threads},
                       {"save_candidates", c.save_candidates}};
    j["evaluation"] = {{"sequence_mode", to_string(c.sequence_mode)}};
    j["fbs"] = {{"prune_isolated", c.fbs_prune_isolated}};
    return j;
}

ExperimentConfig load_config(const fs::path& path, ExperimentConfig base) {
    const std::string text = read_text(path, "config file");
    try {
        return config_from_json(nlohmann::json::parse(text), std::move(base));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
}

fs::path default_output_root() {
    if (const char* env = std::getenv("DEGM_OUT_ROOT"); env && *env) return env;
    return "runs";
}

Dataset load_experiment_dataset(const ExperimentConfig& config) {
    if (config.dataset.empty()) throw ConfigError("no dataset path configured");
    if (!fs::exists(config.dataset)) throw DataError("dataset path does not exist: " + config.dataset.string());
    std::optional<EventOntology> ontology;
    if (config.ontology_names) ontology.emplace(*config.ontology_names);
    if (config.ontology_path) {
        try {
            ontology.emplace(nlohmann::json::parse(read_text(*config.ontology_path, "ontology file"))
                                 .get<std::vector<std::string>>());
        } catch (const nlohmann::json::exception& e) {
            throw DataError("ontology file " + config.ontology_path->string() + ": " + e.what());
        }
    }
    return ontology ? load_dataset(config.dataset, *ontology) : load_dataset(config.dataset);
}

std::vector<SortedGraph> prepare_training_corpus(const std::vector<InstanceGraph>& train_graphs,
                                                 const ExperimentConfig& config, const EventOntology& ontology) {
    std::vector<InstanceGraph> fitted;
    fitted.reserve(train_graphs.size());
    for (const auto& g : train_graphs) {
        if (g.num_nodes() > config.model.m) {
            if (config.overflow == OverflowPolicy::reject)
                throw DataError("graph '" + g.graph_id + "' has " + std::to_string(g.num_nodes()) +
                                " nodes, more than m=" + std::to_string(config.model.m));
            std::cerr << "warning: graph '" << g.graph_id << "' truncated from " << g.num_nodes() << " to "
                      << config.model.m << " nodes\n";
            fitted.push_back(truncate_graph(g, config.model.m));
        } else {
            fitted.push_back(g);
        }
    }
    return augment_by_resorting(fitted, config.augment_n, config.augment_seed(), config.model.m, ontology.pad_index());
}

TrainOutcome cmd_train(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    config.validate();
    Dataset ds = load_experiment_dataset(config);
    config.model = model_for(config, ds.ontology);

    const auto train_graphs = filter_split(ds.graphs, Split::train);
    if (train_graphs.empty()) throw DataError("train split of " + config.dataset.string() + " is empty");
    const auto val_graphs = filter_split(ds.graphs, Split::val);
    const auto corpus = prepare_training_corpus(train_graphs, config, ds.ontology);

    fs::create_directories(config.out_dir / "checkpoints");
    write_text(config.out_dir / "config.json", config_to_json(config).dump(2) + "\n");

    TrainConfig tc = config.train;
    tc.seed = config.train_seed();
    tc.tau = config.generation.tau;
    NoiseSchedule schedule = build_schedule(config.model.T);
    DenoiserParams params = DenoiserParams::initialize(config.model, config.init_seed());

    std::ofstream log(config.out_dir / "train_log.jsonl", std::ios::binary);
    if (!log) throw DataError("cannot write " + (config.out_dir / "train_log.jsonl").string());
    auto on_epoch = [&](const EpochRecord& r, const DenoiserParams&) {
        log << epoch_to_json(r).dump() << '\n';
        log.flush();
    };
    std::cerr << "training on " << corpus.size() << " sorted graphs (" << train_graphs.size() << " instance graphs), "
              << params.num_parameters() << " parameters\n";

    TrainOutcome outcome;
    outcome.report = train(corpus, params, tc, schedule, val_graphs, on_epoch);

    nlohmann::json meta{{"dataset", config.dataset_name}, {"seed", config.seed}};
    outcome.best_checkpoint = config.out_dir / "checkpoints" / "best.ckpt";
    outcome.last_checkpoint = config.out_dir / "checkpoints" / "last.ckpt";
    meta["epoch"] = outcome.report.best_epoch;
    save_checkpoint(outcome.best_checkpoint, {outcome.report.best_params, ds.ontology.names(), meta});
    meta["epoch"] = config.train.epochs;
    save_checkpoint(outcome.last_checkpoint, {params, ds.ontology.names(), meta});
    return outcome;
}

GenerateOutcome cmd_generate(const ExperimentConfig& config_in, const fs::path& checkpoint) {
    ExperimentConfig config = config_in;
    config.validate();
    if (!fs::exists(checkpoint)) throw DataError("checkpoint does not exist: " + checkpoint.string());
    Checkpoint ck = load_checkpoint(checkpoint);
    Dataset ds = load_experiment_dataset(config);
    config.model = model_for(config, ds.ontology);

    const ModelConfig& have = ck.params.config;
    const ModelConfig& want = config.model;
    auto mismatch = [&](const char* name, int a, int b) {
        if (a != b)
            throw ConfigError(std::string("checkpoint ") + checkpoint.string() + " has " + name + "=" +
                              std::to_string(a) + " but the config expects " + std::to_string(b));
    };
    mismatch("d", have.d, want.d);
    mismatch("m", have.m, want.m);
    mismatch("num_types", have.num_types, want.num_types);
    mismatch("T", have.T, want.T);
    mismatch("layers", have.layers, want.layers);
    if (ck.ontology != ds.ontology.names()) throw ConfigError("checkpoint ontology differs from the dataset ontology");

    const auto val_graphs = filter_split(ds.graphs, Split::val);
    if (val_graphs.empty()) throw DataError("val split of " + config.dataset.string() + " is empty");

    GenerationConfig gc = config.generation;
    gc.seed = config.generation_seed();
    if (config.deterministic) gc.threads = 1;
    NoiseSchedule schedule = build_schedule(have.T);

    GenerateOutcome outcome;
    outcome.candidates = generate_candidates(ck.params, schedule, gc);
    outcome.selection = select_schema(outcome.candidates, val_graphs);
    outcome.schema = outcome.candidates[static_cast<std::size_t>(outcome.selection.index)];

    fs::create_directories(config.out_dir);
    const std::string ckpt_id = checkpoint.filename().string();
    auto provenance = [&](int k) {
        return nlohmann::json{{"method", "DEGM"},      {"checkpoint", ckpt_id}, {"seed", candidate_seed(gc, k)},
                              {"run_seed", config.seed}, {"tau", gc.tau},         {"T", have.T},
                              {"candidate", k}};
    };
    if (config.save_candidates) {
        fs::create_directories(config.out_dir / "candidates");
        for (std::size_t k = 0; k < outcome.candidates.size(); ++k)
            save_schema(config.out_dir / "candidates" / ("candidate_" + std::to_string(k) + ".json"),
                        outcome.candidates[k], ds.ontology, provenance(static_cast<int>(k)));
    }
    outcome.schema_path = config.out_dir / "schema.json";
    save_schema(outcome.schema_path, outcome.schema, ds.ontology, provenance(outcome.selection.index));

    nlohmann::json log{{"checkpoint", ckpt_id},
                       {"num_candidates", gc.num_candidates},
                       {"selected", outcome.selection.index},
                       {"selected_val_event_type_f1", outcome.selection.score},
                       {"val_event_type_f1", outcome.selection.scores}};
    write_text(config.out_dir / "selection_log.json", log.dump(2) + "\n");
    return outcome;
}

MetricsReport cmd_evaluate(const EvaluateRequest& req) {
    if (!fs::exists(req.dataset)) throw DataError("dataset path does not exist: " + req.dataset.string());
    if (!fs::exists(req.schema)) throw DataError("schema path does not exist: " + req.schema.string());
    Dataset ds = load_dataset(req.dataset);
    Schema schema = load_schema(req.schema, ds.ontology);
    auto graphs = filter_split(ds.graphs, req.split);
    if (graphs.empty())
        throw DataError(std::string(to_string(req.split)) + " split of " + req.dataset.string() + " is empty");
    MetricsReport report = evaluate(schema, graphs, req.sequence_mode);

    fs::create_directories(req.out_dir);
    nlohmann::json j = metrics_to_json(report, req.dataset_name, req.method);
    j["split"] = std::string(to_string(req.split));
    if (req.include_reference) j["reference"] = reference_scores_json();
    write_text(req.out_dir / "metrics.json", j.dump(2) + "\n");
    write_text(req.out_dir / "metrics.csv", metrics_to_csv(report, req.dataset_name, req.method));
    return report;
}

FbsOutcome cmd_baseline_fbs(const ExperimentConfig& config) {
    Dataset ds = load_experiment_dataset(config);
    const auto train_graphs = filter_split(ds.graphs, Split::train);
    if (train_graphs.empty()) throw DataError("train split of " + config.dataset.string() + " is empty");
    const auto test_graphs = filter_split(ds.graphs, Split::test);
    if (test_graphs.empty()) throw DataError("test split of " + config.dataset.string() + " is empty");

    FbsOutcome outcome;
    outcome.table = count_frequencies(train_graphs);
    if (outcome.table.empty()) throw DataError("training graphs contain no edges");
    outcome.schema = fbs_schema(outcome.table, config.fbs_seed(), FbsOptions{config.fbs_prune_isolated});
    outcome.metrics = evaluate(outcome.schema, test_graphs, config.sequence_mode);

    fs::create_directories(config.out_dir);
    save_schema(config.out_dir / "fbs_schema.json", outcome.schema, ds.ontology,
                {{"method", "FBS"}, {"seed", config.fbs_seed()}, {"run_seed", config.seed}});
    write_text(config.out_dir / "fbs_metrics.json",
               metrics_to_json(outcome.metrics, config.dataset_name, "FBS").dump(2) + "\n");
    write_text(config.out_dir / "fbs_metrics.csv", metrics_to_csv(outcome.metrics, config.dataset_name, "FBS"));
    return outcome;
}

void cmd_synth_data(const SyntheticCorpusConfig& spec, std::uint64_t seed, const fs::path& path) {
    SyntheticCorpus corpus = generate_synthetic_corpus(spec, seed);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    save_dataset(path, {corpus.ontology, corpus.graphs});
}

}  // namespace degm
