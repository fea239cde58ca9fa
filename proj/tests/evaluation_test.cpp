#include "gtest/gtest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "degm/evaluation.hpp"
#include "test_util.hpp"

using namespace degm;
using degm::testing::make_graph;

namespace {

// Brute-force metrics over an adjacency matrix and explicit triples.
struct Oracle {
    std::set<TypeId> types;
    std::set<std::vector<TypeId>> l2, l3_direct, l3_reach;
};

Oracle oracle_of(const std::vector<TypeId>& types, const std::vector<Edge>& edges) {
    const std::size_t n = types.size();
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (auto [u, v] : edges) adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
    auto reach = adj;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
    Oracle o;
    o.types.insert(types.begin(), types.end());
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (adj[a][b]) o.l2.insert({types[a], types[b]});
            for (std::size_t c = 0; c < n; ++c) {
                if (adj[a][b] && adj[b][c]) o.l3_direct.insert({types[a], types[b], types[c]});
                if (reach[a][b] && reach[b][c]) o.l3_reach.insert({types[a], types[b], types[c]});
            }
        }
    return o;
}

template <typename T>
double f1_oracle(const std::set<T>& p, const std::set<T>& r) {
    if (p.empty() && r.empty()) return 1.0;
    std::vector<T> both;
    std::set_intersection(p.begin(), p.end(), r.begin(), r.end(), std::back_inserter(both));
    return 2.0 * static_cast<double>(both.size()) / static_cast<double>(p.size() + r.size());
}

InstanceGraph random_dag(std::mt19937_64& rng, int max_nodes, int num_types) {
    const int n = std::uniform_int_distribution<int>(0, max_nodes)(rng);
    std::uniform_int_distribution<int> type(0, num_types - 1);
    std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.0, 0.6)(rng));
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    InstanceGraph g;
    for (int i = 0; i < n; ++i) g.node_types.push_back(type(rng));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng)) g.edges.emplace_back(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    return g;
}

}  // namespace

TEST(SetF1, Conventions) {
    std::set<int> empty, a{1, 2}, b{2, 3};
    EXPECT_EQ(set_f1(empty, empty), 1.0);
    EXPECT_EQ(set_f1(empty, a), 0.0);
    EXPECT_EQ(set_f1(a, empty), 0.0);
    EXPECT_EQ(set_f1(a, a), 1.0);
    EXPECT_DOUBLE_EQ(set_f1(a, b), 0.5);
    EXPECT_EQ(set_f1(a, std::set<int>{7}), 0.0);
}

TEST(EventTypeF1, HalfExamples) {
    Schema s{{0, 1}, {}};
    EXPECT_DOUBLE_EQ(event_type_f1(s, make_graph({1, 2}, {})), 0.5);
    Schema one{{0}, {}};
    EXPECT_DOUBLE_EQ(event_type_f1(one, make_graph({0, 1, 2}, {})), 0.5);
}

TEST(EventSeqF1, HalfExamples) {
    // schema A->B, B->C; graph A->B, B->D
    Schema s{{0, 1, 2}, {{0, 1}, {1, 2}}};
    auto g = make_graph({0, 1, 3}, {{0, 1}, {1, 2}});
    EXPECT_DOUBLE_EQ(event_seq_f1(s, g, 2), 0.5);
    EXPECT_DOUBLE_EQ(event_seq_f1(s, g, 3), 0.0);
    auto chain = make_graph({0, 1, 2, 3}, {{0, 1}, {1, 2}, {2, 3}});
    // chain l=3 sequences: ABC, BCD
    EXPECT_DOUBLE_EQ(event_seq_f1(s, chain, 3), 2.0 * 1 / 3.0);
    EXPECT_THROW(event_seq_f1(s, g, 4), ConfigError);
}

TEST(TypeSequences, ReachableTriplesIncludeSkips) {
    auto chain = make_graph({0, 1, 2, 3}, {{0, 1}, {1, 2}, {2, 3}});
    auto direct = type_sequences(chain, 3);
    auto reach = type_sequences(chain, 3, SequenceMode::reachable_triples);
    EXPECT_EQ(direct.size(), 2u);
    EXPECT_EQ(reach.size(), 4u);  // ABC ABD ACD BCD
    EXPECT_TRUE(reach.count({0, 1, 3}));
    EXPECT_TRUE(std::includes(reach.begin(), reach.end(), direct.begin(), direct.end()));
}

TEST(TypeSequences, LengthTwoIsEdgeTypePairs) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 200; ++k) {
        auto g = random_dag(rng, 10, 4);
        std::set<std::vector<TypeId>> pairs;
        for (auto [u, v] : g.edges) pairs.insert({g.node_types[static_cast<std::size_t>(u)], g.node_types[static_cast<std::size_t>(v)]});
        EXPECT_EQ(type_sequences(g, 2), pairs);
        EXPECT_EQ(type_sequences(g, 2, SequenceMode::reachable_triples), pairs);
        // every l=3 sequence is built from l=2 steps
        for (const auto& s : type_sequences(g, 3)) {
            EXPECT_TRUE(pairs.count({s[0], s[1]}));
            EXPECT_TRUE(pairs.count({s[1], s[2]}));
        }
    }
}

TEST(Metrics, MatchBruteForceOnRandomPairs) {
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 1000; ++k) {
        auto a = random_dag(rng, 12, 5);
        auto b = random_dag(rng, 12, 5);
        Schema s{a.node_types, a.edges};
        Oracle oa = oracle_of(a.node_types, a.edges), ob = oracle_of(b.node_types, b.edges);
        ASSERT_DOUBLE_EQ(event_type_f1(s, b), f1_oracle(oa.types, ob.types)) << k;
        ASSERT_DOUBLE_EQ(event_seq_f1(s, b, 2), f1_oracle(oa.l2, ob.l2)) << k;
        ASSERT_DOUBLE_EQ(event_seq_f1(s, b, 3), f1_oracle(oa.l3_direct, ob.l3_direct)) << k;
        ASSERT_DOUBLE_EQ(event_seq_f1(s, b, 3, SequenceMode::reachable_triples), f1_oracle(oa.l3_reach, ob.l3_reach)) << k;
    }
}

TEST(Metrics, BoundedAndSymmetric) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 300; ++k) {
        auto a = random_dag(rng, 8, 4);
        auto b = random_dag(rng, 8, 4);
        for (int l : {2, 3}) {
            double ab = event_seq_f1(a, b, l), ba = event_seq_f1(b, a, l);
            EXPECT_GE(ab, 0.0);
            EXPECT_LE(ab, 1.0);
            EXPECT_DOUBLE_EQ(ab, ba);
        }
        EXPECT_EQ(event_seq_f1(a, a, 3), 1.0);
    }
}

TEST(Metrics, InvariantUnderReindexing) {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 200; ++k) {
        auto a = random_dag(rng, 9, 4);
        auto b = random_dag(rng, 9, 4);
        std::vector<int> perm(a.node_types.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        InstanceGraph p;
        p.node_types.resize(a.node_types.size());
        for (std::size_t i = 0; i < perm.size(); ++i) p.node_types[static_cast<std::size_t>(perm[i])] = a.node_types[i];
        for (auto [u, v] : a.edges) p.edges.emplace_back(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
        EXPECT_EQ(event_type_f1(a, b), event_type_f1(p, b));
        EXPECT_EQ(event_seq_f1(a, b, 2), event_seq_f1(p, b, 2));
        EXPECT_EQ(event_seq_f1(a, b, 3), event_seq_f1(p, b, 3));
    }
}

TEST(Evaluate, AveragesAndReports) {
    Schema s{{0, 1, 2}, {{0, 1}, {1, 2}}};
    std::vector<InstanceGraph> graphs = {make_graph({0, 1, 2}, {{0, 1}, {1, 2}}, "same"),
                                         make_graph({3}, {}, "other")};
    auto r = evaluate(s, graphs);
    ASSERT_EQ(r.per_graph.size(), 2u);
    EXPECT_EQ(r.per_graph[0].graph_id, "same");
    EXPECT_DOUBLE_EQ(r.event_type_f1, 0.5);
    EXPECT_DOUBLE_EQ(r.seq_f1_l2, 0.5);
    EXPECT_DOUBLE_EQ(r.seq_f1_l3, 0.5);
    EXPECT_DOUBLE_EQ(mean_event_type_f1(s, graphs), 0.5);
    EXPECT_THROW(evaluate(s, {}), DataError);

    auto j = metrics_to_json(r, "toy", "degm");
    EXPECT_EQ(j["dataset"], "toy");
    EXPECT_EQ(j["per_graph"].size(), 2u);

    std::istringstream csv(metrics_to_csv(r, "toy", "degm"));
    std::vector<std::string> lines;
    for (std::string line; std::getline(csv, line);) lines.push_back(line);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "dataset,method,graph_id,f1_type,f1_l2,f1_l3");
    EXPECT_EQ(lines[1].rfind("toy,degm,same,", 0), 0u);
    EXPECT_EQ(lines[3].rfind("toy,degm,mean,", 0), 0u);
}

TEST(ReferenceScores, PublishedValues) {
    const auto& ref = reference_scores();
    auto find = [&](const std::string& d, const std::string& m) {
        auto it = std::find_if(ref.begin(), ref.end(), [&](const auto& r) { return r.dataset == d && r.method == m; });
        EXPECT_NE(it, ref.end()) << d << " " << m;
        return *it;
    };
    auto gae = find("Suicide-IED", "DoubleGAE");
    EXPECT_DOUBLE_EQ(gae.event_type_f1, 0.709);
    EXPECT_DOUBLE_EQ(gae.seq_f1_l2, 0.290);
    EXPECT_DOUBLE_EQ(gae.seq_f1_l3, 0.095);
    auto ours = find("Suicide-IED", "DEGM");
    EXPECT_DOUBLE_EQ(ours.event_type_f1, 0.775);
    EXPECT_DOUBLE_EQ(ours.seq_f1_l2, 0.534);
    EXPECT_DOUBLE_EQ(ours.seq_f1_l3, 0.330);
    EXPECT_EQ(reference_scores_json().size(), ref.size());
}
