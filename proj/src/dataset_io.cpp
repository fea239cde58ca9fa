#include "degm/dataset_io.hpp"

#include <fstream>
#include <sstream>

namespace degm {

namespace {

SplitSummary summarize_subset(const std::vector<InstanceGraph>& graphs, const Split* split) {
    SplitSummary s;
    double nodes = 0, edges = 0;
    for (const auto& g : graphs) {
        if (split && g.split != *split) continue;
        ++s.num_graphs;
        nodes += g.num_nodes();
        edges += static_cast<double>(g.edges.size());
    }
    if (s.num_graphs > 0) {
        s.avg_nodes = nodes / s.num_graphs;
        s.avg_edges = edges / s.num_graphs;
    }
    return s;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw DataError("dataset file " + path.string() + " is empty");
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("dataset file " + path.string() + ": " + e.what());
    }
}

InstanceGraph parse_graph(const nlohmann::json& rec, std::size_t position, const EventOntology& ontology) {
    std::string id = "#" + std::to_string(position);
    try {
        if (!rec.is_object()) throw DataError("record is not an object");
        if (rec.contains("id")) id = rec.at("id").get<std::string>();
        InstanceGraph g;
        g.graph_id = id;
        g.split = parse_split(rec.at("split").get<std::string>());
        for (const auto& n : rec.at("nodes")) g.node_types.push_back(ontology.index_of(n.get<std::string>()));
        for (const auto& e : rec.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw DataError("edge must be a pair [i, j]");
            g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
        validate_graph(g, ontology);
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("graph '" + id + "': malformed record: " + e.what());
    } catch (const DataError& e) {
        const std::string msg = e.what();
        if (msg.rfind("graph '", 0) == 0) throw;
        throw DataError("graph '" + id + "': " + msg);
    }
}

Dataset parse_with(const nlohmann::json& doc, const EventOntology* expected) {
    if (!doc.is_object() || !doc.contains("ontology") || !doc.contains("graphs"))
        throw DataError("dataset document needs 'ontology' and 'graphs'");
    std::vector<std::string> names;
    try {
        names = doc.at("ontology").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("dataset ontology: ") + e.what());
    }
    EventOntology file_ontology(names);
    if (expected) {
        for (const auto& n : names)
            if (!expected->find(n)) throw DataError("dataset ontology type '" + n + "' not in the configured ontology");
    }
    Dataset ds{expected ? *expected : file_ontology, {}};
    const auto& graphs = doc.at("graphs");
    if (!graphs.is_array()) throw DataError("'graphs' must be an array");
    for (std::size_t i = 0; i < graphs.size(); ++i) ds.graphs.push_back(parse_graph(graphs[i], i, ds.ontology));
    return ds;
}

}  // namespace

DatasetSummary summarize(const std::vector<InstanceGraph>& graphs) {
    const Split tr = Split::train, va = Split::val, te = Split::test;
    return {summarize_subset(graphs, &tr), summarize_subset(graphs, &va), summarize_subset(graphs, &te),
            summarize_subset(graphs, nullptr)};
}

const std::vector<ReferenceStatistics>& reference_dataset_statistics() {
    static const std::vector<ReferenceStatistics> stats = {
        {"General-IED", 88, 11, 12, 90.8, 212.6},
        {"Car-IED", 75, 9, 10, 146.5, 345.7},
        {"Suicide-IED", 176, 22, 22, 117.4, 245.2},
    };
    return stats;
}

Dataset parse_dataset(const nlohmann::json& doc) { return parse_with(doc, nullptr); }

Dataset load_dataset(const std::filesystem::path& path, const DatasetAdapter& adapter) {
    auto doc = read_json_file(path);
    return parse_with(adapter ? adapter(doc) : doc, nullptr);
}

Dataset load_dataset(const std::filesystem::path& path, const EventOntology& ontology, const DatasetAdapter& adapter) {
    auto doc = read_json_file(path);
    return parse_with(adapter ? adapter(doc) : doc, &ontology);
}

nlohmann::json dataset_to_json(const Dataset& dataset) {
    nlohmann::json doc;
    doc["ontology"] = dataset.ontology.real_names();
    auto& graphs = doc["graphs"] = nlohmann::json::array();
    for (const auto& g : dataset.graphs) {
        nlohmann::json rec;
        rec["id"] = g.graph_id;
        rec["split"] = std::string(to_string(g.split));
        auto& nodes = rec["nodes"] = nlohmann::json::array();
        for (TypeId t : g.node_types) nodes.push_back(dataset.ontology.name(t));
        auto& edges = rec["edges"] = nlohmann::json::array();
        for (auto [u, v] : g.edges) edges.push_back({u, v});
        graphs.push_back(std::move(rec));
    }
    return doc;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file " + path.string());
    out << dataset_to_json(dataset).dump(1) << '\n';
}

}  // namespace degm
