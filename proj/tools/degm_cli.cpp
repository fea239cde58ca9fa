// degm: train, generate, evaluate and baseline commands for the diffusion
// event graph model.
//
// Precedence: built-in defaults < --config file < command-line flags.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "degm/experiment.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool deterministic = false;
    std::string dataset;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "JSON experiment config file");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_flag("--deterministic", f.deterministic, "single-threaded, fixed reduction order");
    cmd->add_option("--dataset", f.dataset, "dataset JSON file");
}

degm::ExperimentConfig resolve(const CommonFlags& f, const std::string& command) {
    degm::ExperimentConfig c;
    c.out_dir = degm::default_output_root() / command;
    if (!f.config.empty()) c = degm::load_config(f.config, c);
    if (f.seed) c.seed = *f.seed;
    if (!f.out.empty()) c.out_dir = f.out;
    if (f.deterministic) c.deterministic = true;
    if (!f.dataset.empty()) c.dataset = f.dataset;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diffusion event graph model: schema skeleton generation"};
    app.require_subcommand(1);

    CommonFlags train_flags;
    auto* train = app.add_subcommand("train", "train the denoiser and write checkpoints");
    add_common(train, train_flags);
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<int> augment_n;
    bool verbose = false;
    train->add_option("--epochs", epochs);
    train->add_option("--lr", lr);
    train->add_option("--augment", augment_n, "sorted variants per training graph");
    train->add_flag("-v,--verbose", verbose, "per-epoch progress on stderr");

    CommonFlags gen_flags;
    auto* generate = app.add_subcommand("generate", "generate candidate schemas and select on validation");
    add_common(generate, gen_flags);
    std::string checkpoint;
    std::optional<int> candidates;
    std::optional<double> tau;
    bool save_candidates = false;
    generate->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    generate->add_option("--candidates", candidates);
    generate->add_option("--tau", tau);
    generate->add_flag("--save-candidates", save_candidates);

    degm::EvaluateRequest eval_req;
    std::string eval_split = "test";
    std::string eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "score a schema file against a dataset split");
    evaluate->add_option("--schema", eval_req.schema)->required();
    evaluate->add_option("--dataset", eval_req.dataset)->required();
    evaluate->add_option("--split", eval_split)->check(CLI::IsMember({"train", "val", "test"}));
    evaluate->add_option("--out", eval_out);
    evaluate->add_option("--dataset-name", eval_req.dataset_name);
    evaluate->add_option("--method", eval_req.method);
    evaluate->add_flag("--reference", eval_req.include_reference, "embed published comparison scores");

    CommonFlags fbs_flags;
    auto* fbs = app.add_subcommand("baseline-fbs", "frequency-based sampling baseline");
    add_common(fbs, fbs_flags);

    degm::SyntheticCorpusConfig synth;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth-data", "write a synthetic random-DAG dataset");
    synth_cmd->add_option("--types", synth.num_types);
    synth_cmd->add_option("--graphs", synth.num_graphs);
    synth_cmd->add_option("--min-nodes", synth.min_nodes);
    synth_cmd->add_option("--max-nodes", synth.max_nodes);
    synth_cmd->add_option("--density", synth.edge_density);
    synth_cmd->add_option("--train-ratio", synth.train_ratio);
    synth_cmd->add_option("--val-ratio", synth.val_ratio);
    synth_cmd->add_option("--seed", synth_seed);
    synth_cmd->add_option("--out", synth_out, "output dataset file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*train) {
            auto c = resolve(train_flags, "train");
            if (epochs) c.train.epochs = *epochs;
            if (lr) c.train.lr = *lr;
            if (augment_n) c.augment_n = *augment_n;
            c.train.verbose = verbose;
            auto outcome = degm::cmd_train(c);
            std::cout << "best epoch " << outcome.report.best_epoch << ", checkpoint " << outcome.best_checkpoint.string()
                      << '\n';
        } else if (*generate) {
            auto c = resolve(gen_flags, "generate");
            if (candidates) c.generation.num_candidates = *candidates;
            if (tau) c.generation.tau = *tau;
            if (save_candidates) c.save_candidates = true;
            auto outcome = degm::cmd_generate(c, checkpoint);
            std::cout << "selected candidate " << outcome.selection.index << " of " << outcome.candidates.size()
                      << " (val event-type F1 " << outcome.selection.score << "), wrote " << outcome.schema_path.string()
                      << '\n';
        } else if (*evaluate) {
            eval_req.split = degm::parse_split(eval_split);
            eval_req.out_dir = eval_out.empty() ? degm::default_output_root() / "evaluate" : std::filesystem::path(eval_out);
            auto report = degm::cmd_evaluate(eval_req);
            std::cout << "event_type_f1 " << report.event_type_f1 << " seq_f1_l2 " << report.seq_f1_l2 << " seq_f1_l3 "
                      << report.seq_f1_l3 << '\n';
        } else if (*fbs) {
            auto c = resolve(fbs_flags, "baseline-fbs");
            auto outcome = degm::cmd_baseline_fbs(c);
            std::cout << "FBS schema: " << outcome.schema.num_nodes() << " nodes, " << outcome.schema.edges.size()
                      << " edges; event_type_f1 " << outcome.metrics.event_type_f1 << " seq_f1_l2 "
                      << outcome.metrics.seq_f1_l2 << " seq_f1_l3 " << outcome.metrics.seq_f1_l3 << '\n';
        } else if (*synth_cmd) {
            degm::cmd_synth_data(synth, synth_seed, synth_out);
            std::cout << "wrote " << synth_out << '\n';
        }
    } catch (const degm::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const degm::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const degm::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
