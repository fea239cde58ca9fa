#include "degm/event_graphs.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

namespace degm {

EventOntology::EventOntology(std::vector<std::string> real_types) : names_(std::move(real_types)) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw DataError("ontology: empty event type name");
        if (n == kPadName) throw DataError("ontology: reserved name " + std::string(kPadName));
        if (!seen.insert(n).second) throw DataError("ontology: duplicate event type '" + n + "'");
    }
    names_.emplace_back(kPadName);
}

const std::string& EventOntology::name(TypeId t) const {
    if (t < 0 || t >= size()) throw DataError("ontology: type index " + std::to_string(t) + " out of range");
    return names_[static_cast<std::size_t>(t)];
}

std::optional<TypeId> EventOntology::find(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<TypeId>(it - names_.begin());
}

TypeId EventOntology::index_of(std::string_view name) const {
    auto t = find(name);
    if (!t) throw DataError("unknown event type '" + std::string(name) + "'");
    return *t;
}

std::vector<std::string> EventOntology::real_names() const {
    return {names_.begin(), names_.end() - 1};
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw DataError("unknown split '" + std::string(s) + "'");
}

bool has_cycle(int num_nodes, const std::vector<Edge>& edges) {
    std::vector<int> indegree(static_cast<std::size_t>(num_nodes), 0);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(num_nodes));
    for (auto [u, v] : edges) {
        out[static_cast<std::size_t>(u)].push_back(v);
        ++indegree[static_cast<std::size_t>(v)];
    }
    std::vector<int> ready;
    for (int i = 0; i < num_nodes; ++i)
        if (indegree[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
    int visited = 0;
    while (!ready.empty()) {
        int u = ready.back();
        ready.pop_back();
        ++visited;
        for (int v : out[static_cast<std::size_t>(u)])
            if (--indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    }
    return visited != num_nodes;
}

void validate_graph(const InstanceGraph& g, const EventOntology& ontology) {
    const std::string where = "graph '" + g.graph_id + "': ";
    for (TypeId t : g.node_types) {
        if (t < 0 || t >= ontology.size()) throw DataError(where + "type index " + std::to_string(t) + " out of range");
        if (ontology.is_pad(t)) throw DataError(where + "PAD type used as a node type");
    }
    const int n = g.num_nodes();
    std::set<Edge> seen;
    for (auto [u, v] : g.edges) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw DataError(where + "edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
        if (u == v) throw DataError(where + "self-loop on node " + std::to_string(u));
        if (!seen.insert({u, v}).second)
            throw DataError(where + "duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    if (has_cycle(n, g.edges)) throw DataError(where + "graph is cyclic");
}

SortedGraph topological_sort(const InstanceGraph& graph, int m, TypeId pad_index,
                             std::optional<std::uint64_t> seed) {
    const int n = graph.num_nodes();
    if (m < 1) throw ConfigError("topological_sort: m must be positive");
    if (n > m)
        throw DataError("graph '" + graph.graph_id + "': " + std::to_string(n) + " nodes exceed m=" +
                        std::to_string(m));

    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    for (auto [u, v] : graph.edges) {
        out[static_cast<std::size_t>(u)].push_back(v);
        ++indegree[static_cast<std::size_t>(v)];
    }

    std::optional<Rng> rng;
    if (seed) rng.emplace(*seed);

    // Ready set kept sorted ascending so both tie-break rules are well defined.
    std::vector<int> ready;
    for (int i = 0; i < n; ++i)
        if (indegree[static_cast<std::size_t>(i)] == 0) ready.push_back(i);

    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    while (!ready.empty()) {
        std::size_t pick = 0;
        if (rng) pick = std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(*rng);
        int u = ready[pick];
        ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
        order.push_back(u);
        for (int v : out[static_cast<std::size_t>(u)]) {
            if (--indegree[static_cast<std::size_t>(v)] == 0)
                ready.insert(std::lower_bound(ready.begin(), ready.end(), v), v);
        }
    }
    if (static_cast<int>(order.size()) != n) throw DataError("graph '" + graph.graph_id + "': graph is cyclic");

    std::vector<int> position(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) position[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k;

    SortedGraph sorted;
    sorted.real_count = n;
    sorted.order = order;
    sorted.sequence.assign(static_cast<std::size_t>(m), pad_index);
    sorted.adjacency.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0);
    for (int k = 0; k < n; ++k)
        sorted.sequence[static_cast<std::size_t>(k)] = graph.node_types[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    for (auto [u, v] : graph.edges) {
        auto i = static_cast<std::size_t>(position[static_cast<std::size_t>(u)]);
        auto j = static_cast<std::size_t>(position[static_cast<std::size_t>(v)]);
        sorted.adjacency[i * static_cast<std::size_t>(m) + j] = 1;
    }
    return sorted;
}

InstanceGraph unsort(const SortedGraph& sorted) {
    InstanceGraph g;
    g.node_types.assign(sorted.sequence.begin(), sorted.sequence.begin() + sorted.real_count);
    for (int i = 0; i < sorted.real_count; ++i)
        for (int j = 0; j < sorted.real_count; ++j)
            if (sorted.edge(i, j)) g.edges.emplace_back(i, j);
    return g;
}

std::vector<SortedGraph> augment_by_resorting(const std::vector<InstanceGraph>& graphs, int n,
                                              std::uint64_t seed, int m, TypeId pad_index) {
    if (n < 1) throw ConfigError("augment_by_resorting: n must be >= 1");
    std::vector<SortedGraph> out;
    out.reserve(graphs.size() * static_cast<std::size_t>(n));
    for (std::size_t g = 0; g < graphs.size(); ++g) {
        out.push_back(topological_sort(graphs[g], m, pad_index));
        for (int k = 1; k < n; ++k)
            out.push_back(topological_sort(graphs[g], m, pad_index, derive_seed(seed, g, static_cast<std::uint64_t>(k))));
    }
    return out;
}

InstanceGraph truncate_graph(const InstanceGraph& graph, int m) {
    if (graph.num_nodes() <= m) return graph;
    // Sort with room for every node, then keep the first m positions.
    SortedGraph full = topological_sort(graph, graph.num_nodes(), 0);
    std::vector<int> keep_pos(static_cast<std::size_t>(graph.num_nodes()), -1);
    for (int k = 0; k < m; ++k) keep_pos[static_cast<std::size_t>(full.order[static_cast<std::size_t>(k)])] = k;

    InstanceGraph out;
    out.graph_id = graph.graph_id;
    out.split = graph.split;
    // Surviving nodes keep their relative original index order.
    std::vector<int> survivors;
    for (int i = 0; i < graph.num_nodes(); ++i)
        if (keep_pos[static_cast<std::size_t>(i)] >= 0) survivors.push_back(i);
    std::vector<int> remap(static_cast<std::size_t>(graph.num_nodes()), -1);
    for (std::size_t k = 0; k < survivors.size(); ++k) {
        remap[static_cast<std::size_t>(survivors[k])] = static_cast<int>(k);
        out.node_types.push_back(graph.node_types[static_cast<std::size_t>(survivors[k])]);
    }
    for (auto [u, v] : graph.edges) {
        int a = remap[static_cast<std::size_t>(u)];
        int b = remap[static_cast<std::size_t>(v)];
        if (a >= 0 && b >= 0) out.edges.emplace_back(a, b);
    }
    return out;
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusConfig& config, std::uint64_t seed) {
    if (config.num_types < 1) throw ConfigError("synthetic corpus: num_types must be >= 1");
    if (config.num_graphs < 1) throw ConfigError("synthetic corpus: num_graphs must be >= 1");
    if (config.min_nodes < 1 || config.max_nodes < config.min_nodes)
        throw ConfigError("synthetic corpus: need 1 <= min_nodes <= max_nodes");
    if (!(config.edge_density >= 0.0 && config.edge_density <= 1.0))
        throw ConfigError("synthetic corpus: edge_density must lie in [0, 1]");
    if (config.train_ratio < 0 || config.val_ratio < 0 || config.train_ratio + config.val_ratio > 1.0)
        throw ConfigError("synthetic corpus: split ratios must be non-negative and sum to at most 1");

    std::vector<std::string> names;
    for (int t = 0; t < config.num_types; ++t) names.push_back("Type" + std::to_string(t));

    SyntheticCorpus corpus{EventOntology(std::move(names)), {}};
    Rng rng(seed);
    const int n_train = static_cast<int>(config.train_ratio * config.num_graphs + 0.5);
    const int n_val = std::min(config.num_graphs - n_train,
                               static_cast<int>(config.val_ratio * config.num_graphs + 0.5));

    for (int g = 0; g < config.num_graphs; ++g) {
        InstanceGraph graph;
        graph.graph_id = "synth-" + std::to_string(g);
        graph.split = g < n_train ? Split::train : (g < n_train + n_val ? Split::val : Split::test);
        int n = std::uniform_int_distribution<int>(config.min_nodes, config.max_nodes)(rng);
        std::uniform_int_distribution<int> type_dist(0, config.num_types - 1);
        for (int i = 0; i < n; ++i) graph.node_types.push_back(type_dist(rng));

        // Edges follow a hidden order; then relabel nodes randomly.
        std::vector<int> label(static_cast<std::size_t>(n));
        std::iota(label.begin(), label.end(), 0);
        std::shuffle(label.begin(), label.end(), rng);
        std::bernoulli_distribution coin(config.edge_density);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (coin(rng)) graph.edges.emplace_back(label[static_cast<std::size_t>(i)], label[static_cast<std::size_t>(j)]);

        std::vector<TypeId> relabeled(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) relabeled[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])] = graph.node_types[static_cast<std::size_t>(i)];
        graph.node_types = std::move(relabeled);
        corpus.graphs.push_back(std::move(graph));
    }
    return corpus;
}

std::vector<InstanceGraph> filter_split(const std::vector<InstanceGraph>& graphs, Split split) {
    std::vector<InstanceGraph> out;
    for (const auto& g : graphs)
        if (g.split == split) out.push_back(g);
    return out;
}

}  // namespace degm
