#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "degm/schema.hpp"

namespace degm {

// Ordered (source type, target type) -> number of training edges.
struct EdgeFrequencyTable {
    std::map<std::pair<TypeId, TypeId>, long> counts;

    bool empty() const { return counts.empty(); }
    std::size_t size() const { return counts.size(); }
};

EdgeFrequencyTable count_frequencies(const std::vector<InstanceGraph>& train_graphs);

struct FbsOptions {
    bool prune_isolated = false;
};

// Frequency-based sampling: one node per type in the table, edges drawn in
// proportion to counts until a draw would close a cycle. Redrawing an edge
// already present is skipped; at most 10 * |table| draws are made. Nodes
// are emitted in deterministic topological order so edges run forward.
Schema fbs_schema(const EdgeFrequencyTable& table, std::uint64_t seed, const FbsOptions& options = {});

}  // namespace degm
