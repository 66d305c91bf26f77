#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "graphene/graph.hpp"
#include "graphene/penman.hpp"
#include "graphene/synth.hpp"

#include "test_util.hpp"

using namespace graphene;

namespace {

LabeledGraph sentence_graph() {
    // "You told me to wash the dog"
    return LabeledGraph(
        {{"t", "tell-01"}, {"y", "you"}, {"w", "wash-01"}, {"i", "i"}, {"d", "dog"}},
        {{"t", "y", ":ARG0"},
         {"t", "w", ":ARG1"},
         {"t", "i", ":ARG2"},
         {"w", "i", ":ARG0"},
         {"w", "d", ":ARG1"}},
        "t");
}

} // namespace

TEST_CASE("minimal well-formed graph") {
    LabeledGraph g({{"1", "A"}, {"2", "B"}}, {{"1", "2", "X"}}, "1");
    REQUIRE(g.node_count() == 2);
    REQUIRE(g.edge_count() == 1);
    REQUIRE(g.rooted());
    REQUIRE(g.node(*g.root()).id == "1");
    REQUIRE(*g.edge_label(0, 1) == "X");
    REQUIRE(g.edge_label(1, 0) == nullptr);
}

TEST_CASE("construction rejects invalid inputs") {
    SECTION("duplicate ordered pair") {
        try {
            LabeledGraph({{"1", "A"}, {"2", "B"}}, {{"1", "2", "X"}, {"1", "2", "Y"}}, "1");
            FAIL("expected duplicate_edge");
        } catch (const Error& e) {
            REQUIRE(e.code() == errc::duplicate_edge);
            REQUIRE(std::string(e.what()).find("1") != std::string::npos);
            REQUIRE(std::string(e.what()).find("2") != std::string::npos);
        }
    }
    SECTION("dangling endpoint") {
        try {
            LabeledGraph({{"1", "A"}}, {{"1", "9", "X"}}, std::nullopt);
            FAIL("expected dangling_endpoint");
        } catch (const Error& e) {
            REQUIRE(e.code() == errc::dangling_endpoint);
            REQUIRE(std::string(e.what()).find("9") != std::string::npos);
        }
    }
    SECTION("empty labels") {
        REQUIRE_THROWS_AS(LabeledGraph({{"1", ""}}, {}, std::nullopt), Error);
        REQUIRE_THROWS_AS(LabeledGraph({{"1", "A"}, {"2", "B"}}, {{"1", "2", ""}}, std::nullopt),
                          Error);
    }
    SECTION("duplicate node id") {
        REQUIRE_THROWS_AS(LabeledGraph({{"1", "A"}, {"1", "B"}}, {}, std::nullopt), Error);
    }
    SECTION("unknown root") {
        REQUIRE_THROWS_AS(LabeledGraph({{"1", "A"}}, {}, "zz"), Error);
    }
    SECTION("constants are attached leaves") {
        // outgoing edge from a constant
        REQUIRE_THROWS_AS(
            LabeledGraph({{"1", "A"}, {"c", "-", true}}, {{"c", "1", ":x"}}, std::nullopt),
            Error);
        // free-floating constant
        REQUIRE_THROWS_AS(LabeledGraph({{"1", "A"}, {"c", "-", true}}, {}, std::nullopt), Error);
    }
}

TEST_CASE("hand-built sentence graph") {
    LabeledGraph g = sentence_graph();
    REQUIRE(g.node_count() == 5);
    REQUIRE(g.edge_count() == 5);
    REQUIRE(g.is_connected());

    // round-trip through PENMAN keeps the triples
    std::string text = serialize_penman(g);
    LabeledGraph back = parse_penman(text);
    REQUIRE(sorted_triples(back) == sorted_triples(g));
}

TEST_CASE("to_triples ordering and count") {
    SECTION("single unrooted node") {
        LabeledGraph g({{"1", "A"}}, {}, std::nullopt);
        auto ts = to_triples(g);
        REQUIRE(ts.size() == 1);
        REQUIRE(ts[0] == Triple{TripleKind::instance, "instance", "1", "A"});
    }
    SECTION("rooted two-node graph") {
        LabeledGraph g({{"1", "A"}, {"2", "B"}}, {{"1", "2", "X"}}, "1");
        auto ts = to_triples(g);
        REQUIRE(ts.size() == 4);
        REQUIRE(ts[0].kind == TripleKind::top);
        REQUIRE(ts[1] == Triple{TripleKind::instance, "instance", "1", "A"});
        REQUIRE(ts[2] == Triple{TripleKind::instance, "instance", "2", "B"});
        REQUIRE(ts[3] == Triple{TripleKind::relation, "X", "1", "2"});
    }
    SECTION("attributes come from constant leaves") {
        LabeledGraph g({{"1", "A"}, {"c", "-", true}}, {{"1", "c", ":polarity"}}, "1");
        auto ts = to_triples(g);
        REQUIRE(ts.size() == 3); // top + instance + attribute
        REQUIRE(ts[2] == Triple{TripleKind::attribute, ":polarity", "1", "-"});
        REQUIRE(g.triple_count() == 3);
    }
    SECTION("count invariant over random graphs") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            LabeledGraph g = random_gold(1 + static_cast<int>(seed % 15), 1.3, 10, 5, seed);
            REQUIRE(to_triples(g).size() == g.triple_count());
            REQUIRE(g.triple_count() == g.non_constant_count() + g.edge_count() + 1);
        }
    }
}

TEST_CASE("triples round-trip to an identical graph") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        LabeledGraph g = random_gold(1 + static_cast<int>(seed % 12), 1.2, 8, 4, seed);
        REQUIRE(to_triples(from_triples(to_triples(g))) == to_triples(g));
    }
    // and with attributes in the mix
    LabeledGraph g({{"1", "A"}, {"2", "B"}, {"c", "-", true}},
                   {{"1", "2", ":x"}, {"2", "c", ":polarity"}}, "1");
    REQUIRE(to_triples(from_triples(to_triples(g))) == to_triples(g));
}

TEST_CASE("no element ever carries two labels") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        LabeledGraph g = random_gold(2 + static_cast<int>(seed % 12), 1.4, 6, 3, seed);
        std::set<std::string> node_ids;
        for (const auto& n : g.nodes()) REQUIRE(node_ids.insert(n.id).second);
        std::set<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& e : g.edges()) REQUIRE(pairs.insert({e.src, e.dst}).second);
    }
}

TEST_CASE("connectivity") {
    SECTION("two isolated nodes") {
        LabeledGraph g({{"1", "A"}, {"2", "B"}}, {}, std::nullopt);
        REQUIRE_FALSE(g.is_connected());
    }
    SECTION("empty graph is connected by convention") {
        REQUIRE(LabeledGraph().is_connected());
    }
    SECTION("sentence graph") { REQUIRE(sentence_graph().is_connected()); }
    SECTION("size") {
        auto [n, e] = sentence_graph().size();
        REQUIRE(n == 5);
        REQUIRE(e == 5);
    }
}

TEST_CASE("cyclic inputs are accepted") {
    LabeledGraph g({{"1", "A"}, {"2", "B"}}, {{"1", "2", "X"}, {"2", "1", "Y"}}, "1");
    REQUIRE(g.edge_count() == 2);
    REQUIRE(g.is_connected());
}
