#include <random>

#include "doctest.h"
#include "novscope/citemetrics.hpp"
#include "novscope/error.hpp"
#include "oracles.hpp"

using namespace novscope;

namespace {

CitationGraph graph_of(const oracle::ToyGraph& g) { return CitationGraph(g.as_edges(), g.years()); }

}  // namespace

TEST_CASE("disruption toy graphs") {
    oracle::ToyGraph g;
    g.year = {{"F", 2000}, {"R1", 1995}, {"R2", 1996}, {"i1", 2001}, {"i2", 2002}, {"j1", 2003}, {"k1", 2004},
              {"late", 2010}, {"old", 1997}};
    g.edges = {{"F", "R1"}, {"F", "R2"}, {"i1", "F"}, {"i2", "F"}, {"j1", "F"}, {"j1", "R2"},
               {"k1", "R1"}, {"late", "F"}, {"old", "R1"}};
    auto cg = graph_of(g);
    auto c = disruption_counts(cg, "F", 5);
    CHECK(c.n_i == 2);
    CHECK(c.n_j == 1);
    CHECK(c.n_k == 1);
    CHECK(*disruption(cg, "F", 5) == doctest::Approx(0.25));
    CHECK(disruption(cg, "F", 5) == oracle::disruption(g, "F", 5));
    // window inclusive of focal_year + window
    CHECK(disruption_counts(cg, "F", 2).n_i == 2);
    CHECK(disruption_counts(cg, "F", 1).n_i == 1);
    CHECK(!disruption(cg, "R2", 0));
    CHECK_THROWS_AS(disruption(cg, "nobody", 5), ValidationError);
}

TEST_CASE("disruption boundaries: overshadowing and co-citation") {
    oracle::ToyGraph g;
    g.year = {{"F", 2000}, {"R", 1990}};
    g.edges = {{"F", "R"}};
    for (int i = 0; i < 4; ++i) {
        auto p = "c" + std::to_string(i);
        g.year[p] = 2001 + i;
        g.edges.insert({p, "F"});
    }
    CHECK(*disruption(graph_of(g), "F", 5) == 1.0);
    for (int i = 0; i < 4; ++i) g.edges.insert({"c" + std::to_string(i), "R"});
    CHECK(*disruption(graph_of(g), "F", 5) == -1.0);
}

TEST_CASE("two-step credit toy graph and threshold") {
    oracle::ToyGraph g;
    g.year = {{"F", 2000}, {"A", 2001}, {"B", 2001}};
    g.edges = {{"A", "F"}, {"B", "F"}};
    for (const char* p : {"C", "D", "E", "G", "H", "I"}) g.year[p] = 2003;
    for (const char* p : {"C", "D", "E"}) g.edges.insert({p, "A"});
    for (const char* p : {"G", "H", "I"}) g.edges.insert({p, "B"});
    g.edges.insert({"C", "F"});
    g.edges.insert({"G", "F"});
    // C and G cite F directly, so they are also in L1; they stay in L2 because they cite A or B.
    CHECK(*two_step_credit(graph_of(g), "F", 5) == doctest::Approx(2.0 / 6.0));
    CHECK(two_step_credit(graph_of(g), "F", 5) == oracle::two_step_credit(g, "F", 5));

    for (const char* p : {"D", "E", "H", "I"}) g.edges.insert({p, "F"});
    CHECK(*two_step_credit(graph_of(g), "F", 5) == 1.0);

    g.edges.erase({"I", "B"});
    g.edges.erase({"I", "F"});
    g.year.erase("I");
    CHECK(!two_step_credit(graph_of(g), "F", 5));
    CHECK(two_step_credit(graph_of(g), "F", 4));
}

TEST_CASE("metrics match the set oracles on random graphs") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 100; ++t) {
        auto g = oracle::random_graph(rng);
        auto cg = graph_of(g);
        for (const auto& [id, y] : g.year) {
            for (int w : {0, 3, 5}) {
                auto d = disruption(cg, id, w);
                CHECK(d == oracle::disruption(g, id, w));
                if (d) CHECK((*d >= -1.0 && *d <= 1.0));
            }
            for (int m : {0, 5})
                CHECK(two_step_credit(cg, id, m) == oracle::two_step_credit(g, id, m));
        }
    }
}

TEST_CASE("graph collapses duplicate edges and drops self citations") {
    std::vector<CitationEdge> edges{{"a", "b", 2001}, {"a", "b", 2001}, {"a", "a", 2001}};
    CitationGraph g(edges, {{"a", 2001}, {"b", 2000}});
    CHECK(g.num_edges() == 1);
    CHECK(g.cites(*g.node("a"), *g.node("b")));
    CHECK(!g.cites(*g.node("b"), *g.node("a")));
}

TEST_CASE("outside subject share") {
    std::vector<CitationEdge> edges{{"c1", "f", 2001}, {"c2", "f", 2001}, {"c3", "f", 2001}, {"c4", "f", 2001}};
    CitationGraph g(edges, {{"f", 2000}, {"c1", 2001}, {"c2", 2001}, {"c3", 2001}, {"c4", 2001}});
    SubjectMap s{{"f", {"X", "Y"}}, {"c1", {"Y"}}, {"c2", {"Z"}}, {"c3", {"X", "W"}}};
    CHECK(*outside_subject_share(g, "f", s) == doctest::Approx(1.0 / 3.0));
    s["c1"] = {"Q"};
    s["c3"] = {"W"};
    CHECK(*outside_subject_share(g, "f", s) == 1.0);
    s = {{"f", {"X"}}, {"c1", {"X"}}, {"c2", {"X", "Z"}}};
    CHECK(*outside_subject_share(g, "f", s) == 0.0);
    CHECK(!outside_subject_share(g, "f", {{"c1", {"X"}}}));
}

TEST_CASE("forward and past citations") {
    std::vector<CitationEdge> edges{{"c1", "f", 2001}, {"c2", "f", 2002}, {"c3", "f", 2003}, {"c0", "f", 2000}};
    CitationGraph g(edges, {{"f", 2000}, {"c0", 2000}, {"c1", 2001}, {"c2", 2002}, {"c3", 2003}, {"lonely", 2000}});
    CHECK(forward_citations(g, "f", 2) == 3);
    CHECK(forward_citations(g, "f", 0) == 1);
    CHECK(forward_citations(g, "lonely", 2) == 0);

    std::vector<CitationEdge> e2;
    for (int i = 0; i < 3; ++i) e2.push_back({"x" + std::to_string(i), "p1", 2003});
    for (int i = 0; i < 4; ++i) e2.push_back({"y" + std::to_string(i), "p2", 2004});
    e2.push_back({"z", "p2", 2005});
    std::unordered_map<std::string, int> years{{"p1", 2000}, {"p2", 2001}, {"z", 2005}};
    for (int i = 0; i < 3; ++i) years["x" + std::to_string(i)] = 2003;
    for (int i = 0; i < 4; ++i) years["y" + std::to_string(i)] = 2004;
    CitationGraph g2(e2, years);
    CHECK(past_citations(g2, {"p1", "p2"}, 2005) == 7);
    CHECK(past_citations(g2, {"p1", "p2"}, 2004) == 3);
    CHECK(past_citations(g2, {}, 2005) == 0);
}

TEST_CASE("metrics csv round trip") {
    std::vector<MetricsRow> rows{{"a", 0.5, std::nullopt, 0.25, 1.0, 3}, {"b,c", std::nullopt, -1.0, std::nullopt, std::nullopt, 0}};
    auto text = format_metrics_csv(rows);
    auto parsed = parse_metrics_csv(text);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[1].paper_id == "b,c");
    CHECK(parsed[0].disruption_5y == 0.5);
    CHECK(!parsed[0].disruption_3y);
    CHECK(parsed[0].cites_2y == 3);
    CHECK(format_metrics_csv(parsed) == text);
}
