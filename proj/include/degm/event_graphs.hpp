#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "degm/common.hpp"

namespace degm {

inline constexpr std::string_view kPadName = "<PAD>";

// Closed vocabulary of event types. PAD is always the last entry.
class EventOntology {
public:
    EventOntology() = default;
    // `real_types` must not contain the PAD name; PAD is appended.
    explicit EventOntology(std::vector<std::string> real_types);

    // Total number of types including PAD (M).
    int size() const { return static_cast<int>(names_.size()); }
    int num_real_types() const { return size() - 1; }
    TypeId pad_index() const { return size() - 1; }
    bool is_pad(TypeId t) const { return t == pad_index(); }

    const std::string& name(TypeId t) const;
    std::optional<TypeId> find(std::string_view name) const;
    TypeId index_of(std::string_view name) const;  // throws DataError
    const std::vector<std::string>& names() const { return names_; }
    std::vector<std::string> real_names() const;

    bool operator==(const EventOntology&) const = default;

private:
    std::vector<std::string> names_;
};

using Edge = std::pair<int, int>;

enum class Split { train, val, test };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct InstanceGraph {
    std::vector<TypeId> node_types;
    std::vector<Edge> edges;
    std::string graph_id;
    Split split = Split::train;

    int num_nodes() const { return static_cast<int>(node_types.size()); }
    bool operator==(const InstanceGraph&) const = default;
};

// Checks node types, self-loops, duplicate edges, index ranges and acyclicity.
// Throws DataError naming the graph id.
void validate_graph(const InstanceGraph& g, const EventOntology& ontology);

// True when the edge set over `num_nodes` nodes contains a directed cycle.
bool has_cycle(int num_nodes, const std::vector<Edge>& edges);

struct SortedGraph {
    std::vector<TypeId> sequence;  // length m, PAD-padded
    std::vector<std::uint8_t> adjacency;  // m*m row-major, strictly upper triangular
    int real_count = 0;
    // order[k] is the original node index placed at position k (k < real_count).
    std::vector<int> order;

    int length() const { return static_cast<int>(sequence.size()); }
    bool edge(int i, int j) const { return adjacency[static_cast<std::size_t>(i) * sequence.size() + j] != 0; }

    bool operator==(const SortedGraph&) const = default;
};

// Kahn's algorithm. Without a seed, ties go to the smallest original index;
// with a seed, a uniformly random ready node is taken at each step.
SortedGraph topological_sort(const InstanceGraph& graph, int m, TypeId pad_index,
                             std::optional<std::uint64_t> seed = std::nullopt);

// Maps a sorted graph back to node types and edges in sorted positions.
InstanceGraph unsort(const SortedGraph& sorted);

// n sorted variants per input graph. Variant 0 uses the deterministic
// tie-break; the others use seeds derived from `seed`.
std::vector<SortedGraph> augment_by_resorting(const std::vector<InstanceGraph>& graphs, int n,
                                              std::uint64_t seed, int m, TypeId pad_index);

enum class OverflowPolicy { truncate, reject };

// Keeps the first m nodes of the deterministic topological order and drops
// edges that leave them. Graphs with at most m nodes are returned unchanged.
InstanceGraph truncate_graph(const InstanceGraph& graph, int m);

struct SyntheticCorpusConfig {
    int num_types = 5;
    int num_graphs = 20;
    int min_nodes = 4;
    int max_nodes = 8;
    double edge_density = 0.3;
    double train_ratio = 0.8;
    double val_ratio = 0.1;
};

struct SyntheticCorpus {
    EventOntology ontology;
    std::vector<InstanceGraph> graphs;
};

// Random DAGs: nodes get uniform types, each forward pair (in a hidden random
// order) receives an edge with probability `edge_density`; node indices are
// then shuffled so stored order is not topological.
SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusConfig& config, std::uint64_t seed);

std::vector<InstanceGraph> filter_split(const std::vector<InstanceGraph>& graphs, Split split);

}  // namespace degm
