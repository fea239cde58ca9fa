#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "degm/schema.hpp"

namespace degm {

// How length-3 sequences are collected: chains of two direct edges, or
// ordered triples a ->* b ->* c along any path (sensitivity variant).
enum class SequenceMode { direct_paths, reachable_triples };

// Set F1 with empty/empty = 1 and empty/non-empty = 0.
template <typename T>
double set_f1(const std::set<T>& predicted, const std::set<T>& reference) {
    if (predicted.empty() && reference.empty()) return 1.0;
    if (predicted.empty() || reference.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& x : predicted) hits += reference.count(x);
    if (hits == 0) return 0.0;
    const double p = static_cast<double>(hits) / static_cast<double>(predicted.size());
    const double r = static_cast<double>(hits) / static_cast<double>(reference.size());
    return 2.0 * p * r / (p + r);
}

std::set<TypeId> type_set(TypedGraphView g);

// Type tuples along directed paths with `length` nodes (2 or 3).
std::set<std::vector<TypeId>> type_sequences(TypedGraphView g, int length,
                                             SequenceMode mode = SequenceMode::direct_paths);

double event_type_f1(TypedGraphView schema, TypedGraphView graph);
double event_seq_f1(TypedGraphView schema, TypedGraphView graph, int length,
                    SequenceMode mode = SequenceMode::direct_paths);

struct GraphScores {
    std::string graph_id;
    double event_type_f1 = 0, seq_f1_l2 = 0, seq_f1_l3 = 0;
};

struct MetricsReport {
    double event_type_f1 = 0, seq_f1_l2 = 0, seq_f1_l3 = 0;
    std::vector<GraphScores> per_graph;
};

MetricsReport evaluate(const Schema& schema, const std::vector<InstanceGraph>& graphs,
                       SequenceMode mode = SequenceMode::direct_paths);

// Mean event-type F1 of a schema over graphs (the selection criterion).
double mean_event_type_f1(const Schema& schema, const std::vector<InstanceGraph>& graphs);

nlohmann::json metrics_to_json(const MetricsReport& report, const std::string& dataset, const std::string& method);

// Header plus one row per graph plus one aggregate row (graph_id "mean").
std::string metrics_to_csv(const MetricsReport& report, const std::string& dataset, const std::string& method);

struct ReferenceScore {
    std::string dataset, method;
    double event_type_f1, seq_f1_l2, seq_f1_l3;
};

// Published comparison scores for the IED datasets.
const std::vector<ReferenceScore>& reference_scores();
nlohmann::json reference_scores_json();

}  // namespace degm
