#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "degm/event_graphs.hpp"

namespace degm {

struct Dataset {
    EventOntology ontology;
    std::vector<InstanceGraph> graphs;
};

struct SplitSummary {
    int num_graphs = 0;
    double avg_nodes = 0.0;
    double avg_edges = 0.0;
};

struct DatasetSummary {
    SplitSummary train, val, test, all;
};

DatasetSummary summarize(const std::vector<InstanceGraph>& graphs);

// Published corpus statistics (train/val/test counts, avg nodes, avg edges)
// for cross-checking a loaded release of the IED datasets.
struct ReferenceStatistics {
    std::string name;
    int train, val, test;
    double avg_nodes, avg_edges;
};
const std::vector<ReferenceStatistics>& reference_dataset_statistics();

// Rewrites an external on-disk layout into the canonical document
// {"ontology": [...], "graphs": [{"id", "split", "nodes", "edges"}]}.
using DatasetAdapter = std::function<nlohmann::json(const nlohmann::json&)>;

Dataset parse_dataset(const nlohmann::json& doc);

// Reads and validates a dataset file. Errors carry the offending graph id.
Dataset load_dataset(const std::filesystem::path& path, const DatasetAdapter& adapter = {});

// As above, but node types are resolved against `ontology`, which must
// contain every type the file's ontology declares.
Dataset load_dataset(const std::filesystem::path& path, const EventOntology& ontology,
                     const DatasetAdapter& adapter = {});

nlohmann::json dataset_to_json(const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace degm
