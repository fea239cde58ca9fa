#include "gtest/gtest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "degm/checkpoint.hpp"
#include "degm/experiment.hpp"

using namespace degm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "degm_experiment_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path synth_dataset(const fs::path& dir) {
    auto path = dir / "data.json";
    cmd_synth_data({5, 24, 3, 7, 0.35, 0.6, 0.2}, 17, path);
    return path;
}

ExperimentConfig smoke_config(const fs::path& dataset, const fs::path& out) {
    ExperimentConfig c;
    c.dataset = dataset;
    c.dataset_name = "synthetic";
    c.model.d = 8;
    c.model.layers = 1;
    c.model.m = 8;
    c.model.T = 5;
    c.train.epochs = 2;
    c.train.batch_size = 4;
    c.train.lr = 1e-3;
    c.train.val_candidates = 2;
    c.generation.num_candidates = 4;
    c.generation.tau = 0.5;
    c.out_dir = out;
    c.seed = 3;
    return c;
}

struct CliResult {
    int code;
    std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& dir) {
    const char* cli = std::getenv("DEGM_CLI");
    if (!cli) return {-1, "DEGM_CLI not set"};
    auto err = dir / "stderr.txt";
    std::string cmd = std::string(cli) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

}  // namespace

TEST(Config, DefaultsArePublishedSettings) {
    ExperimentConfig c;
    EXPECT_EQ(c.model.d, 256);
    EXPECT_EQ(c.model.layers, 4);
    EXPECT_EQ(c.model.m, 50);
    EXPECT_EQ(c.model.T, 100);
    EXPECT_EQ(c.model.num_types, kDefaultEventTypes + 1);
    EXPECT_EQ(c.train.lambda_st, 1.0);
    EXPECT_EQ(c.train.lr, 1e-4);
    EXPECT_EQ(c.train.epochs, 100);
    EXPECT_EQ(c.generation.tau, 0.8);
    EXPECT_EQ(c.generation.num_candidates, 500);
    EXPECT_EQ(c.train.objective, Objective::simplified);
}

TEST(Config, JsonOverridesOnlyGivenKeys) {
    ExperimentConfig base;
    base.seed = 9;
    auto c = config_from_json(nlohmann::json::parse(R"({"model": {"d": 16}, "train": {"epochs": 3, "objective": "diffusion_lm_e2e"},
        "generation": {"tau": 0.6}, "evaluation": {"sequence_mode": "reachable_triples"}})"),
                              base);
    EXPECT_EQ(c.model.d, 16);
    EXPECT_EQ(c.model.layers, 4);
    EXPECT_EQ(c.train.epochs, 3);
    EXPECT_EQ(c.train.objective, Objective::diffusion_lm_e2e);
    EXPECT_EQ(c.generation.tau, 0.6);
    EXPECT_EQ(c.sequence_mode, SequenceMode::reachable_triples);
    EXPECT_EQ(c.seed, 9u);
}

TEST(Config, RoundTripsThroughJson) {
    ExperimentConfig c = smoke_config("x.json", "out");
    c.ontology_names = std::vector<std::string>{"A", "B"};
    c.overflow = OverflowPolicy::reject;
    auto back = config_from_json(config_to_json(c));
    EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"modle": {}})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"train": {"learning_rate": 1}})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"train": {"objective": "other"}})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"train": {"epochs": "many"}})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"ontology": 5})")), ConfigError);
}

TEST(Config, DistinctStageSeeds) {
    ExperimentConfig c;
    c.seed = 1;
    std::set<std::uint64_t> seeds{c.init_seed(), c.train_seed(), c.generation_seed(), c.augment_seed(), c.fbs_seed()};
    EXPECT_EQ(seeds.size(), 5u);
}

TEST(Config, OutputRootFromEnvironment) {
    setenv("DEGM_OUT_ROOT", "/tmp/somewhere", 1);
    EXPECT_EQ(default_output_root(), fs::path("/tmp/somewhere"));
    unsetenv("DEGM_OUT_ROOT");
    EXPECT_EQ(default_output_root(), fs::path("runs"));
}

TEST(PrepareCorpus, TruncateOrReject) {
    auto dir = scratch("overflow");
    ExperimentConfig c;
    c.model.m = 3;
    EventOntology ont({"A", "B"});
    std::vector<InstanceGraph> graphs = {{{0, 1, 0, 1}, {{0, 1}, {1, 2}, {2, 3}}, "long", Split::train}};
    auto out = prepare_training_corpus(graphs, c, ont);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].real_count, 3);
    c.overflow = OverflowPolicy::reject;
    EXPECT_THROW(prepare_training_corpus(graphs, c, ont), DataError);
    c.overflow = OverflowPolicy::truncate;
    c.augment_n = 3;
    EXPECT_EQ(prepare_training_corpus(graphs, c, ont).size(), 3u);
}

TEST(Pipeline, TrainGenerateEvaluateBaseline) {
    auto dir = scratch("pipeline");
    auto data = synth_dataset(dir);
    auto cfg = smoke_config(data, dir / "train");
    auto trained = cmd_train(cfg);
    EXPECT_TRUE(fs::exists(dir / "train" / "config.json"));
    EXPECT_TRUE(fs::exists(trained.best_checkpoint));
    EXPECT_TRUE(fs::exists(trained.last_checkpoint));
    std::istringstream log(slurp(dir / "train" / "train_log.jsonl"));
    int lines = 0;
    for (std::string line; std::getline(log, line); ++lines) {
        auto j = nlohmann::json::parse(line);
        EXPECT_TRUE(j.contains("loss_total"));
        EXPECT_TRUE(j.contains("val_event_type_f1"));
    }
    EXPECT_EQ(lines, 2);
    // num_types follows the dataset ontology (5 types plus PAD)
    EXPECT_EQ(load_checkpoint(trained.best_checkpoint).params.config.num_types, 6);

    auto gcfg = cfg;
    gcfg.out_dir = dir / "gen";
    gcfg.save_candidates = true;
    auto gen = cmd_generate(gcfg, trained.best_checkpoint);
    EXPECT_EQ(gen.candidates.size(), 4u);
    EXPECT_TRUE(fs::exists(dir / "gen" / "schema.json"));
    EXPECT_TRUE(fs::exists(dir / "gen" / "selection_log.json"));
    EXPECT_TRUE(fs::exists(dir / "gen" / "candidates" / "candidate_3.json"));
    auto schema_doc = nlohmann::json::parse(slurp(gen.schema_path));
    EXPECT_EQ(schema_doc["provenance"]["checkpoint"], "best.ckpt");

    EvaluateRequest req;
    req.schema = gen.schema_path;
    req.dataset = data;
    req.out_dir = dir / "eval";
    req.include_reference = true;
    auto metrics = cmd_evaluate(req);
    auto mj = nlohmann::json::parse(slurp(dir / "eval" / "metrics.json"));
    EXPECT_DOUBLE_EQ(mj["event_type_f1"].get<double>(), metrics.event_type_f1);
    bool has_gae = false;
    for (const auto& r : mj["reference"]) has_gae = has_gae || r["method"] == "DoubleGAE";
    EXPECT_TRUE(has_gae);
    std::istringstream csv(slurp(dir / "eval" / "metrics.csv"));
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    EXPECT_EQ(rows, 1 + static_cast<int>(metrics.per_graph.size()) + 1);

    auto fcfg = cfg;
    fcfg.out_dir = dir / "fbs";
    auto fbs = cmd_baseline_fbs(fcfg);
    EXPECT_TRUE(fs::exists(dir / "fbs" / "fbs_schema.json"));
    EXPECT_TRUE(fs::exists(dir / "fbs" / "fbs_metrics.csv"));
    EXPECT_GT(fbs.schema.num_nodes(), 0);
}

TEST(Pipeline, SchemaScoredAgainstItselfIsPerfect) {
    auto dir = scratch("self");
    Dataset ds{EventOntology({"A", "B", "C"}), {}};
    Schema s{{0, 1, 2}, {{0, 1}, {1, 2}, {0, 2}}};
    ds.graphs.push_back(schema_as_graph(s, "self", Split::test));
    save_dataset(dir / "self.json", ds);
    save_schema(dir / "schema.json", s, ds.ontology);
    EvaluateRequest req{dir / "schema.json", dir / "self.json", Split::test, dir / "eval"};
    auto r = cmd_evaluate(req);
    EXPECT_EQ(r.event_type_f1, 1.0);
    EXPECT_EQ(r.seq_f1_l2, 1.0);
    EXPECT_EQ(r.seq_f1_l3, 1.0);
}

TEST(Pipeline, SameSeedSameArtifacts) {
    auto dir = scratch("determinism");
    auto data = synth_dataset(dir);
    auto run = [&](const std::string& name) {
        auto cfg = smoke_config(data, dir / name);
        cfg.deterministic = true;
        auto trained = cmd_train(cfg);
        cfg.out_dir = dir / name / "gen";
        cmd_generate(cfg, trained.best_checkpoint);
        return std::make_pair(slurp(dir / name / "train_log.jsonl"), slurp(dir / name / "gen" / "schema.json"));
    };
    auto a = run("a");
    auto b = run("b");
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
}

TEST(Pipeline, GenerateRefusesMismatchedCheckpoint) {
    auto dir = scratch("mismatch");
    auto data = synth_dataset(dir);
    auto cfg = smoke_config(data, dir / "train");
    cfg.train.epochs = 1;
    auto trained = cmd_train(cfg);
    for (auto tweak : {+[](ExperimentConfig& c) { c.model.d = 16; }, +[](ExperimentConfig& c) { c.model.m = 9; },
                       +[](ExperimentConfig& c) { c.model.T = 6; }, +[](ExperimentConfig& c) { c.model.layers = 2; }}) {
        auto g = cfg;
        g.out_dir = dir / "gen";
        tweak(g);
        EXPECT_THROW(cmd_generate(g, trained.best_checkpoint), ConfigError);
    }
    auto other = cfg;
    other.ontology_names = std::vector<std::string>{"Type0", "Type1", "Type2", "Type3", "Type4", "Extra"};
    EXPECT_THROW(cmd_generate(other, trained.best_checkpoint), ConfigError);
    EXPECT_THROW(cmd_generate(cfg, dir / "nope.ckpt"), DataError);
}

TEST(Cli, MissingDatasetNamesPath) {
    auto dir = scratch("cli_missing");
    auto r = run_cli("train --dataset " + (dir / "absent.json").string() + " --out " + (dir / "o").string(), dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("absent.json"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    auto dir = scratch("cli_codes");
    EXPECT_EQ(run_cli("", dir).code, 1);
    EXPECT_EQ(run_cli("frobnicate", dir).code, 1);
    EXPECT_EQ(run_cli("generate --dataset x.json", dir).code, 1);  // --checkpoint is required
    std::ofstream(dir / "bad_config.json") << R"({"unknown_section": 1})";
    auto r = run_cli("train --config " + (dir / "bad_config.json").string(), dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("unknown_section"), std::string::npos);
}

TEST(Cli, SynthTrainGenerateEvaluate) {
    auto dir = scratch("cli_run");
    const std::string data = (dir / "data.json").string();
    ASSERT_EQ(run_cli("synth-data --types 4 --graphs 16 --min-nodes 3 --max-nodes 6 --seed 2 --out " + data, dir).code, 0);
    std::ofstream(dir / "cfg.json") << R"({"model": {"d": 8, "layers": 1, "m": 8, "T": 4},
        "train": {"epochs": 1, "batch_size": 4, "val_candidates": 1}, "generation": {"num_candidates": 3}})";
    const std::string cfg = (dir / "cfg.json").string();
    // flag beats config file
    ASSERT_EQ(run_cli("train --config " + cfg + " --dataset " + data + " --epochs 2 --out " + (dir / "t").string(), dir).code, 0);
    std::istringstream log(slurp(dir / "t" / "train_log.jsonl"));
    int lines = 0;
    for (std::string line; std::getline(log, line);) ++lines;
    EXPECT_EQ(lines, 2);
    ASSERT_EQ(run_cli("generate --config " + cfg + " --dataset " + data + " --checkpoint " +
                          (dir / "t" / "checkpoints" / "best.ckpt").string() + " --out " + (dir / "g").string(),
                      dir)
                  .code,
              0);
    ASSERT_EQ(run_cli("evaluate --schema " + (dir / "g" / "schema.json").string() + " --dataset " + data + " --out " +
                          (dir / "e").string(),
                      dir)
                  .code,
              0);
    EXPECT_TRUE(fs::exists(dir / "e" / "metrics.csv"));
    ASSERT_EQ(run_cli("baseline-fbs --dataset " + data + " --out " + (dir / "f").string(), dir).code, 0);
    EXPECT_TRUE(fs::exists(dir / "f" / "fbs_schema.json"));
}
