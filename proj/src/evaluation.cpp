#include "degm/evaluation.hpp"

#include <iomanip>
#include <sstream>

namespace degm {

namespace {

std::vector<std::vector<int>> successors(TypedGraphView g) {
    std::vector<std::vector<int>> out(g.node_types.size());
    for (auto [u, v] : g.edges) out[static_cast<std::size_t>(u)].push_back(v);
    return out;
}

std::vector<std::vector<int>> reachable_sets(TypedGraphView g) {
    const auto succ = successors(g);
    const std::size_t n = succ.size();
    std::vector<std::vector<int>> reach(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack(succ[s].begin(), succ[s].end());
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            if (seen[static_cast<std::size_t>(v)]) continue;
            seen[static_cast<std::size_t>(v)] = 1;
            reach[s].push_back(v);
            for (int w : succ[static_cast<std::size_t>(v)]) stack.push_back(w);
        }
    }
    return reach;
}

}  // namespace

std::set<TypeId> type_set(TypedGraphView g) { return {g.node_types.begin(), g.node_types.end()}; }

std::set<std::vector<TypeId>> type_sequences(TypedGraphView g, int length, SequenceMode mode) {
    if (length != 2 && length != 3) throw ConfigError("event sequence length must be 2 or 3");
    auto type = [&](int i) { return g.node_types[static_cast<std::size_t>(i)]; };
    std::set<std::vector<TypeId>> out;
    if (length == 2) {
        for (auto [u, v] : g.edges) out.insert({type(u), type(v)});
        return out;
    }
    const auto next = mode == SequenceMode::direct_paths ? successors(g) : reachable_sets(g);
    for (std::size_t a = 0; a < next.size(); ++a)
        for (int b : next[a])
            for (int c : next[static_cast<std::size_t>(b)]) out.insert({type(static_cast<int>(a)), type(b), type(c)});
    return out;
}

double event_type_f1(TypedGraphView schema, TypedGraphView graph) {
    return set_f1(type_set(schema), type_set(graph));
}

double event_seq_f1(TypedGraphView schema, TypedGraphView graph, int length, SequenceMode mode) {
    return set_f1(type_sequences(schema, length, mode), type_sequences(graph, length, mode));
}

MetricsReport evaluate(const Schema& schema, const std::vector<InstanceGraph>& graphs, SequenceMode mode) {
    if (graphs.empty()) throw DataError("evaluate: empty graph set");
    MetricsReport r;
    for (const auto& g : graphs) {
        GraphScores s{g.graph_id, event_type_f1(schema, g), event_seq_f1(schema, g, 2, mode),
                      event_seq_f1(schema, g, 3, mode)};
        r.event_type_f1 += s.event_type_f1;
        r.seq_f1_l2 += s.seq_f1_l2;
        r.seq_f1_l3 += s.seq_f1_l3;
        r.per_graph.push_back(std::move(s));
    }
    const double n = static_cast<double>(graphs.size());
    r.event_type_f1 /= n;
    r.seq_f1_l2 /= n;
    r.seq_f1_l3 /= n;
    return r;
}

double mean_event_type_f1(const Schema& schema, const std::vector<InstanceGraph>& graphs) {
    if (graphs.empty()) throw DataError("mean_event_type_f1: empty graph set");
    const auto types = type_set(schema);
    double total = 0;
    for (const auto& g : graphs) total += set_f1(types, type_set(g));
    return total / static_cast<double>(graphs.size());
}

nlohmann::json metrics_to_json(const MetricsReport& report, const std::string& dataset, const std::string& method) {
    nlohmann::json j;
    j["dataset"] = dataset;
    j["method"] = method;
    j["event_type_f1"] = report.event_type_f1;
    j["seq_f1_l2"] = report.seq_f1_l2;
    j["seq_f1_l3"] = report.seq_f1_l3;
    auto& per = j["per_graph"] = nlohmann::json::array();
    for (const auto& s : report.per_graph)
        per.push_back({{"graph_id", s.graph_id},
                       {"event_type_f1", s.event_type_f1},
                       {"seq_f1_l2", s.seq_f1_l2},
                       {"seq_f1_l3", s.seq_f1_l3}});
    return j;
}

std::string metrics_to_csv(const MetricsReport& report, const std::string& dataset, const std::string& method) {
    std::ostringstream out;
    out << std::setprecision(6) << std::fixed;
    out << "dataset,method,graph_id,f1_type,f1_l2,f1_l3\n";
    for (const auto& s : report.per_graph)
        out << dataset << ',' << method << ',' << s.graph_id << ',' << s.event_type_f1 << ',' << s.seq_f1_l2 << ','
            << s.seq_f1_l3 << '\n';
    out << dataset << ',' << method << ",mean," << report.event_type_f1 << ',' << report.seq_f1_l2 << ','
        << report.seq_f1_l3 << '\n';
    return out.str();
}

const std::vector<ReferenceScore>& reference_scores() {
    static const std::vector<ReferenceScore> scores = {
        {"General-IED", "TEGM", 0.638, 0.181, 0.065},
        {"General-IED", "FBS", 0.617, 0.149, 0.064},
        {"General-IED", "DoubleGAE", 0.697, 0.273, 0.128},
        {"General-IED", "DEGM avg", 0.726, 0.361, 0.137},
        {"General-IED", "DEGM", 0.754, 0.413, 0.153},
        {"Car-IED", "TEGM", 0.588, 0.162, 0.044},
        {"Car-IED", "FBS", 0.542, 0.126, 0.038},
        {"Car-IED", "DoubleGAE", 0.674, 0.259, 0.081},
        {"Car-IED", "DEGM avg", 0.754, 0.413, 0.153},
        {"Car-IED", "DEGM", 0.795, 0.483, 0.357},
        {"Suicide-IED", "TEGM", 0.609, 0.174, 0.048},
        {"Suicide-IED", "FBS", 0.642, 0.164, 0.036},
        {"Suicide-IED", "DoubleGAE", 0.709, 0.290, 0.095},
        {"Suicide-IED", "DEGM avg", 0.744, 0.464, 0.195},
        {"Suicide-IED", "DEGM", 0.775, 0.534, 0.330},
    };
    return scores;
}

nlohmann::json reference_scores_json() {
    auto j = nlohmann::json::array();
    for (const auto& s : reference_scores())
        j.push_back({{"dataset", s.dataset},
                     {"method", s.method},
                     {"event_type_f1", s.event_type_f1},
                     {"seq_f1_l2", s.seq_f1_l2},
                     {"seq_f1_l3", s.seq_f1_l3}});
    return j;
}

}  // namespace degm
