#include "degm/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace degm {

void validate_schema(const Schema& schema, const EventOntology& ontology) {
    for (TypeId t : schema.node_types) {
        if (t < 0 || t >= ontology.size()) throw DataError("schema: type index out of range");
        if (ontology.is_pad(t)) throw DataError("schema: PAD node present");
    }
    std::set<Edge> seen;
    for (auto [u, v] : schema.edges) {
        if (u < 0 || v >= schema.num_nodes()) throw DataError("schema: edge index out of range");
        if (u >= v) throw DataError("schema: edge (" + std::to_string(u) + "," + std::to_string(v) + ") is not forward");
        if (!seen.insert({u, v}).second) throw DataError("schema: duplicate edge");
    }
}

nlohmann::json schema_to_json(const Schema& schema, const EventOntology& ontology, const nlohmann::json& provenance) {
    nlohmann::json doc;
    auto& nodes = doc["nodes"] = nlohmann::json::array();
    for (TypeId t : schema.node_types) nodes.push_back(ontology.name(t));
    auto& edges = doc["edges"] = nlohmann::json::array();
    for (auto [u, v] : schema.edges) edges.push_back({u, v});
    doc["provenance"] = provenance;
    return doc;
}

Schema schema_from_json(const nlohmann::json& doc, const EventOntology& ontology) {
    Schema s;
    try {
        for (const auto& n : doc.at("nodes")) s.node_types.push_back(ontology.index_of(n.get<std::string>()));
        for (const auto& e : doc.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw DataError("schema: edge must be a pair");
            s.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("schema: malformed document: ") + e.what());
    }
    validate_schema(s, ontology);
    return s;
}

void save_schema(const std::filesystem::path& path, const Schema& schema, const EventOntology& ontology,
                 const nlohmann::json& provenance) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write schema file " + path.string());
    out << schema_to_json(schema, ontology, provenance).dump(2) << '\n';
}

Schema load_schema(const std::filesystem::path& path, const EventOntology& ontology) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return schema_from_json(nlohmann::json::parse(buf.str()), ontology);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("schema file " + path.string() + ": " + e.what());
    }
}

InstanceGraph schema_as_graph(const Schema& schema, std::string graph_id, Split split) {
    return {schema.node_types, schema.edges, std::move(graph_id), split};
}

}  // namespace degm
