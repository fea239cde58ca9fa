#include "degm/baseline_fbs.hpp"

#include <algorithm>
#include <set>

namespace degm {

namespace {

bool reaches(const std::vector<std::vector<int>>& succ, int from, int to) {
    std::vector<char> seen(succ.size(), 0);
    std::vector<int> stack{from};
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (u == to) return true;
        if (seen[static_cast<std::size_t>(u)]) continue;
        seen[static_cast<std::size_t>(u)] = 1;
        for (int v : succ[static_cast<std::size_t>(u)]) stack.push_back(v);
    }
    return false;
}

}  // namespace

EdgeFrequencyTable count_frequencies(const std::vector<InstanceGraph>& train_graphs) {
    if (train_graphs.empty()) throw DataError("count_frequencies: empty training set");
    EdgeFrequencyTable table;
    for (const auto& g : train_graphs)
        for (auto [u, v] : g.edges)
            ++table.counts[{g.node_types[static_cast<std::size_t>(u)], g.node_types[static_cast<std::size_t>(v)]}];
    return table;
}

Schema fbs_schema(const EdgeFrequencyTable& table, std::uint64_t seed, const FbsOptions& options) {
    if (table.empty()) throw DataError("fbs_schema: empty frequency table");

    std::vector<std::pair<TypeId, TypeId>> pairs;
    std::vector<double> weights;
    std::set<TypeId> types;
    for (const auto& [key, count] : table.counts) {
        pairs.push_back(key);
        weights.push_back(static_cast<double>(count));
        types.insert(key.first);
        types.insert(key.second);
    }
    const std::vector<TypeId> node_types(types.begin(), types.end());
    auto node_of = [&](TypeId t) {
        return static_cast<int>(std::lower_bound(node_types.begin(), node_types.end(), t) - node_types.begin());
    };

    std::vector<std::vector<int>> succ(node_types.size());
    std::set<Edge> added;
    Rng rng(seed);
    std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
    const std::size_t max_draws = 10 * pairs.size();
    for (std::size_t k = 0; k < max_draws; ++k) {
        const auto [a, b] = pairs[draw(rng)];
        const int u = node_of(a), v = node_of(b);
        if (added.count({u, v})) continue;
        if (u == v || reaches(succ, v, u)) break;
        added.insert({u, v});
        succ[static_cast<std::size_t>(u)].push_back(v);
    }

    std::vector<char> keep(node_types.size(), 1);
    if (options.prune_isolated) {
        std::fill(keep.begin(), keep.end(), 0);
        for (auto [u, v] : added) keep[static_cast<std::size_t>(u)] = keep[static_cast<std::size_t>(v)] = 1;
    }

    InstanceGraph g;
    std::vector<int> index(node_types.size(), -1);
    for (std::size_t i = 0; i < node_types.size(); ++i)
        if (keep[i]) {
            index[i] = g.num_nodes();
            g.node_types.push_back(node_types[i]);
        }
    for (auto [u, v] : added) g.edges.emplace_back(index[static_cast<std::size_t>(u)], index[static_cast<std::size_t>(v)]);

    SortedGraph sorted = topological_sort(g, std::max(1, g.num_nodes()), 0);
    InstanceGraph forward = unsort(sorted);
    return {std::move(forward.node_types), std::move(forward.edges)};
}

}  // namespace degm
