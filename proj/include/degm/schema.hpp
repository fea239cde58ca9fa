#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "degm/event_graphs.hpp"

namespace degm {

// Generated event skeleton: non-PAD typed nodes, edges (i, j) with i < j.
struct Schema {
    std::vector<TypeId> node_types;
    std::vector<Edge> edges;

    int num_nodes() const { return static_cast<int>(node_types.size()); }
    bool operator==(const Schema&) const = default;
};

// Throws DataError if the schema holds PAD nodes, self-loops or backward edges.
void validate_schema(const Schema& schema, const EventOntology& ontology);

// Non-owning view shared by schemas and instance graphs for metric code.
struct TypedGraphView {
    std::span<const TypeId> node_types;
    std::span<const Edge> edges;

    TypedGraphView(const Schema& s) : node_types(s.node_types), edges(s.edges) {}
    TypedGraphView(const InstanceGraph& g) : node_types(g.node_types), edges(g.edges) {}
};

// {"nodes": [names], "edges": [[i, j]], "provenance": {...}}
nlohmann::json schema_to_json(const Schema& schema, const EventOntology& ontology,
                              const nlohmann::json& provenance = nlohmann::json::object());
Schema schema_from_json(const nlohmann::json& doc, const EventOntology& ontology);

void save_schema(const std::filesystem::path& path, const Schema& schema, const EventOntology& ontology,
                 const nlohmann::json& provenance = nlohmann::json::object());
Schema load_schema(const std::filesystem::path& path, const EventOntology& ontology);

// Treats a schema as an instance graph (used to score a schema against itself).
InstanceGraph schema_as_graph(const Schema& schema, std::string graph_id, Split split);

}  // namespace degm
