#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>

#include "graphene/ensemble.hpp"
#include "graphene/penman.hpp"
#include "graphene/smatch.hpp"
#include "graphene/synth.hpp"

#include "test_util.hpp"

using namespace graphene;

namespace {

const std::string kFixtures = GRAPHENE_FIXTURES_DIR;

LabeledGraph example_g1() {
    return LabeledGraph({{"1", "A"}, {"2", "D"}, {"3", "B"}},
                        {{"1", "2", "X"}, {"1", "3", "Y"}}, std::nullopt);
}
LabeledGraph example_g2() {
    return LabeledGraph({{"1", "C"}, {"2", "D"}, {"3", "A"}, {"4", "E"}},
                        {{"3", "2", "Z"}, {"3", "1", "Y"}, {"3", "4", "W"}}, std::nullopt);
}
LabeledGraph example_g3() {
    return LabeledGraph({{"1", "A"}, {"2", "D"}, {"3", "B"}},
                        {{"1", "2", "X"}, {"1", "3", "G"}}, std::nullopt);
}

int count_for(const std::map<std::string, int>& votes, const std::string& label) {
    auto it = votes.find(label);
    return it == votes.end() ? 0 : it->second;
}

} // namespace

TEST_CASE("default theta is the majority threshold") {
    REQUIRE(default_theta(3) == 2);
    REQUIRE(default_theta(1) == 1);
    REQUIRE(default_theta(7) == 4);
    REQUIRE(default_theta(4) == 2);
}

TEST_CASE("theta resolution") {
    EnsembleConfig c;
    c.theta_fraction = 0.5;
    REQUIRE(resolve_theta(c, 4) == 2);
    REQUIRE(resolve_theta(c, 7) == 4);
    c.theta_fraction = 0.3;
    REQUIRE(resolve_theta(c, 10) == 3);
    c.theta_fraction = 1.0;
    REQUIRE(resolve_theta(c, 5) == 5);
    c.theta = 3;
    REQUIRE(resolve_theta(c, 5) == 3);
    c.theta = 6;
    REQUIRE_THROWS_AS(resolve_theta(c, 5), Error);
}

TEST_CASE("vote initialization") {
    SECTION("running-example pivot") {
        LabeledGraph g1 = example_g1();
        VoteTable t = init_votes(g1);
        REQUIRE(t.contributors == 1);
        REQUIRE(*t.votes_for_node(g1, "1") == std::map<std::string, int>{{"A", 1}});
        REQUIRE(*t.votes_for_node(g1, "2") == std::map<std::string, int>{{"D", 1}});
        REQUIRE(*t.votes_for_node(g1, "3") == std::map<std::string, int>{{"B", 1}});
        REQUIRE(*t.votes_for_edge(g1, "1", "2") == std::map<std::string, int>{{"X", 1}});
        REQUIRE(*t.votes_for_edge(g1, "1", "3") == std::map<std::string, int>{{"Y", 1}});
    }
    SECTION("empty pivot") {
        VoteTable t = init_votes(LabeledGraph());
        REQUIRE(t.node_votes.empty());
        REQUIRE(t.edge_votes.empty());
        REQUIRE(t.contributors == 1);
    }
    SECTION("sizes follow the pivot") {
        LabeledGraph g = random_gold(9, 1.3, 6, 3, 4);
        VoteTable t = init_votes(g);
        REQUIRE(t.node_votes.size() == g.node_count());
        REQUIRE(t.edge_votes.size() == g.edge_count());
    }
}

TEST_CASE("polling votes") {
    LabeledGraph g1 = example_g1();
    SECTION("documented candidate labels appear") {
        LabeledGraph g2 = example_g2();
        VoteTable t = init_votes(g1);
        poll_votes(t, g1, g2, best_match(g1, g2));
        REQUIRE(t.contributors == 2);
        // vertex 3 (label B) mapped onto label C: new candidate
        REQUIRE(count_for(*t.votes_for_node(g1, "3"), "C") == 1);
        REQUIRE(count_for(*t.votes_for_node(g1, "3"), "B") == 1);
        // edge (1,2) gains candidate Z
        REQUIRE(count_for(*t.votes_for_edge(g1, "1", "2"), "Z") == 1);
        REQUIRE(count_for(*t.votes_for_edge(g1, "1", "2"), "X") == 1);
        // matched elements reinforced
        REQUIRE(count_for(*t.votes_for_node(g1, "1"), "A") == 2);
        REQUIRE(count_for(*t.votes_for_edge(g1, "1", "3"), "Y") == 2);
    }
    SECTION("an identical graph reinforces every label") {
        VoteTable t = init_votes(g1);
        poll_votes(t, g1, g1, best_match(g1, g1));
        for (std::size_t v = 0; v < g1.node_count(); ++v) {
            REQUIRE(t.node_votes[v].size() == 1);
            REQUIRE(t.node_votes[v].begin()->second == 2);
        }
        for (const auto& [pair, votes] : t.edge_votes) {
            REQUIRE(votes.size() == 1);
            REQUIRE(votes.begin()->second == 2);
        }
    }
    SECTION("nothing mapped changes only the contributor count") {
        VoteTable t = init_votes(g1);
        VoteTable before = t;
        poll_votes(t, g1, LabeledGraph(), best_match(g1, LabeledGraph()));
        REQUIRE(t.contributors == 2);
        REQUIRE(t.node_votes == before.node_votes);
        REQUIRE(t.edge_votes == before.edge_votes);
    }
}

TEST_CASE("filtering votes") {
    SECTION("theta 1 keeps the pivot shape with plurality labels") {
        LabeledGraph pivot({{"1", "A"}, {"2", "B"}}, {{"1", "2", "X"}}, std::nullopt);
        LabeledGraph other({{"1", "A"}, {"2", "Q"}}, {{"1", "2", "X"}}, std::nullopt);
        VoteTable t = init_votes(pivot);
        poll_votes(t, pivot, other, best_match(pivot, other));
        poll_votes(t, pivot, other, best_match(pivot, other));
        LabeledGraph out = filter_votes(t, pivot, 1, FilterMode::strict);
        REQUIRE(out.node_count() == 2);
        REQUIRE(out.edge_count() == 1);
        REQUIRE(out.node(*out.index_of("2")).label == "Q"); // plurality 2:1
        REQUIRE(out.node(*out.index_of("1")).label == "A");
    }
    SECTION("vote ties go to the pivot's own label") {
        LabeledGraph pivot({{"1", "A"}}, {}, std::nullopt);
        LabeledGraph other({{"1", "Z"}}, {}, std::nullopt);
        VoteTable t = init_votes(pivot);
        poll_votes(t, pivot, other, best_match(pivot, other));
        LabeledGraph out = filter_votes(t, pivot, 1, FilterMode::strict);
        REQUIRE(out.node(0).label == "A"); // A:1 vs Z:1
    }
    SECTION("majority recovery is exact") {
        LabeledGraph star = random_gold(10, 1.2, 8, 4, 314);
        NoiseSpec noise;
        noise.p_node_relabel = 0.3;
        noise.p_edge_relabel = 0.3;
        std::vector<LabeledGraph> coll{star, perturb(star, noise, 1), star,
                                       perturb(star, noise, 2), star};
        VoteTable t = init_votes(coll[0]);
        for (std::size_t j = 1; j < coll.size(); ++j)
            poll_votes(t, coll[0], coll[j], best_match(coll[0], coll[j]));
        LabeledGraph out = filter_votes(t, coll[0], 3, FilterMode::strict);
        REQUIRE(sorted_triples(out) == sorted_triples(star));
    }
}

TEST_CASE("running-example ensemble") {
    std::vector<LabeledGraph> coll{example_g1(), example_g2(), example_g3()};
    EnsembleConfig config;
    config.theta = 2;
    config.mode = FilterMode::strict;
    EnsembleResult res = ensemble(coll, config);
    // the figure's ensemble graph: g1 itself
    REQUIRE(sorted_triples(res.graph) == sorted_triples(example_g1()));
    REQUIRE(res.theta == 2);
    for (const auto& [id, v] : res.support.node_support) REQUIRE(v >= 2);
    for (const auto& [pair, v] : res.support.edge_support) REQUIRE(v >= 2);
    REQUIRE(is_theta_supported(res.graph, coll, 2, config.match));
    // selection optimality
    long long best = *std::max_element(res.per_pivot_supports.begin(),
                                       res.per_pivot_supports.end());
    REQUIRE(res.support.total == best);
    REQUIRE(res.per_pivot_supports.size() == 3);
}

TEST_CASE("root and edge labels corrected by majority vote") {
    std::vector<Corpus> corpora;
    for (const char* name : {"correction_pivot", "correction_m1", "correction_m2",
                             "correction_m3"})
        corpora.push_back(read_corpus(kFixtures + "/" + name + ".amr"));
    Corpus gold = read_corpus(kFixtures + "/correction_gold.amr");

    EnsembleRun run = ensemble_corpus(corpora, {}, 1);
    REQUIRE(run.output.entries.size() == 1);
    const LabeledGraph& out = run.output.entries[0].graph;

    REQUIRE(out.node(*out.root()).label == "contrast-01");
    auto z0 = *out.index_of("z0");
    auto z1 = *out.index_of("z1");
    auto z4 = *out.index_of("z4");
    REQUIRE(*out.edge_label(z0, z1) == ":ARG1");
    REQUIRE(*out.edge_label(z0, z4) == ":ARG2");
    // the polarity miss of one model does not survive the vote
    SmatchScore s = smatch(out, gold.entries[0].graph);
    REQUIRE(s.f1 == 1.0);
    REQUIRE(run.reports[0].pivot_index == 0);
}

TEST_CASE("consensus inputs are a fixed point") {
    LabeledGraph g = random_gold(8, 1.2, 6, 3, 2024);
    SECTION("identical copies, any theta") {
        for (int theta = 1; theta <= 3; ++theta) {
            EnsembleConfig config;
            config.theta = theta;
            config.mode = FilterMode::strict;
            EnsembleResult res = ensemble({g, g, g}, config);
            REQUIRE(sorted_triples(res.graph) == sorted_triples(g));
            for (const auto& [id, v] : res.support.node_support) REQUIRE(v == 3);
        }
    }
    SECTION("renamed isomorphic copies") {
        std::string text = serialize_penman(g);
        // rename variables by re-parsing with a prefix substitution
        std::string renamed = text;
        for (std::size_t pos = 0; (pos = renamed.find("(n", pos)) != std::string::npos;)
            renamed.replace(pos, 2, "(m");
        for (std::size_t pos = 0; (pos = renamed.find(" n", pos)) != std::string::npos;) {
            if (renamed[pos + 2] >= '0' && renamed[pos + 2] <= '9')
                renamed.replace(pos, 2, " m");
            else
                ++pos;
        }
        LabeledGraph h = parse_penman(renamed);
        REQUIRE(smatch(h, g).f1 == 1.0);
        EnsembleResult res = ensemble({g, h, g});
        REQUIRE(smatch(res.graph, g).f1 == 1.0);
    }
    SECTION("single input comes back unchanged") {
        EnsembleResult res = ensemble({g});
        REQUIRE(sorted_triples(res.graph) == sorted_triples(g));
    }
}

TEST_CASE("empty collection is an error") {
    try {
        ensemble({});
        FAIL("expected empty_collection");
    } catch (const Error& e) {
        REQUIRE(e.code() == errc::empty_collection);
    }
}

TEST_CASE("strict mode output is theta-supported") {
    for (int trial = 0; trial < 20; ++trial) {
        LabeledGraph gold = random_gold(10, 1.2, 30, 8, mix_seed(5000, trial));
        NoiseSpec noise;
        auto preds = simulate_predictions(gold, 5, noise, mix_seed(6000, trial));
        EnsembleConfig config;
        config.theta = 3;
        config.mode = FilterMode::strict;
        config.match.seed = trial;
        EnsembleResult res = ensemble(preds, config);
        INFO("trial " << trial);
        REQUIRE(is_theta_supported(res.graph, preds, 3, config.match));
    }
}

TEST_CASE("pivot containment") {
    LabeledGraph gold = random_gold(12, 1.3, 10, 5, 777);
    NoiseSpec noise;
    noise.p_edge_add = 0.3;
    auto preds = simulate_predictions(gold, 5, noise, 888);
    EnsembleConfig config;
    config.mode = FilterMode::strict;
    EnsembleResult res = ensemble(preds, config);
    const LabeledGraph& pivot = preds[res.pivot_index];
    for (const auto& n : res.graph.nodes()) REQUIRE(pivot.index_of(n.id).has_value());
    for (const auto& e : res.graph.edges()) {
        REQUIRE(pivot.index_of(res.graph.node(e.src).id).has_value());
        REQUIRE(pivot.index_of(res.graph.node(e.dst).id).has_value());
    }
}

TEST_CASE("raising theta only removes elements") {
    LabeledGraph gold = random_gold(10, 1.2, 8, 4, 123);
    NoiseSpec noise;
    auto preds = simulate_predictions(gold, 5, noise, 321);
    const LabeledGraph& pivot = preds[0];
    VoteTable table = init_votes(pivot);
    MatchOptions opts;
    for (std::size_t j = 1; j < preds.size(); ++j)
        poll_votes(table, pivot, preds[j], best_match(pivot, preds[j], opts));
    std::set<std::string> prev_nodes;
    std::set<std::pair<std::string, std::string>> prev_edges;
    for (int theta = 1; theta <= 5; ++theta) {
        LabeledGraph out = filter_votes(table, pivot, theta, FilterMode::strict);
        std::set<std::string> nodes;
        std::set<std::pair<std::string, std::string>> edges;
        for (const auto& n : out.nodes()) nodes.insert(n.id);
        for (const auto& e : out.edges())
            edges.insert({out.node(e.src).id, out.node(e.dst).id});
        if (theta > 1) {
            for (const auto& id : nodes) REQUIRE(prev_nodes.count(id));
            for (const auto& pr : edges) REQUIRE(prev_edges.count(pr));
        }
        prev_nodes = std::move(nodes);
        prev_edges = std::move(edges);
    }
}

TEST_CASE("valid-amr mode keeps the graph rooted and connected") {
    // node b falls below theta but is the only path from the root to c
    LabeledGraph pivot({{"a", "P"}, {"b", "Q"}, {"c", "R"}},
                       {{"a", "b", ":x"}, {"b", "c", ":y"}}, "a");
    LabeledGraph v1({{"a", "P"}, {"b", "S"}, {"c", "R"}},
                    {{"a", "b", ":x"}, {"b", "c", ":y"}}, "a");
    LabeledGraph v2({{"a", "P"}, {"b", "T"}, {"c", "R"}},
                    {{"a", "b", ":x"}, {"b", "c", ":y"}}, "a");
    std::vector<LabeledGraph> coll{pivot, v1, v2};

    VoteTable t = init_votes(pivot);
    for (std::size_t j = 1; j < coll.size(); ++j)
        poll_votes(t, pivot, coll[j], best_match(pivot, coll[j]));

    LabeledGraph strict = filter_votes(t, pivot, 2, FilterMode::strict);
    REQUIRE(strict.index_of("b") == std::nullopt);
    REQUIRE_FALSE(strict.is_connected());

    LabeledGraph amr = filter_votes(t, pivot, 2, FilterMode::valid_amr);
    REQUIRE(amr.index_of("b").has_value());
    REQUIRE(amr.is_connected());
    REQUIRE(amr.rooted());
    REQUIRE(amr.node(*amr.index_of("b")).label == "Q"); // tie of 1s, pivot label wins
    REQUIRE(amr.edge_count() == 2);
    REQUIRE_NOTHROW(serialize_penman(amr));
}

TEST_CASE("valid-amr mode always keeps the pivot root") {
    // every model disagrees with the pivot root label, still kept (relabeled)
    LabeledGraph pivot({{"a", "WRONG"}, {"b", "B"}}, {{"a", "b", ":x"}}, "a");
    LabeledGraph v({{"a", "RIGHT"}, {"b", "B"}}, {{"a", "b", ":x"}}, "a");
    EnsembleConfig config;
    config.theta = 3;
    config.mode = FilterMode::valid_amr;
    VoteTable t = init_votes(pivot);
    poll_votes(t, pivot, v, best_match(pivot, v));
    poll_votes(t, pivot, v, best_match(pivot, v));
    LabeledGraph out = filter_votes(t, pivot, 3, FilterMode::valid_amr);
    REQUIRE(out.rooted());
    REQUIRE(out.node(*out.root()).id == "a");
    REQUIRE(out.node(*out.root()).label == "RIGHT"); // 2 votes beat the pivot's 1
}

TEST_CASE("tie policy") {
    LabeledGraph g = random_gold(6, 1.2, 5, 3, 99);
    std::vector<LabeledGraph> coll{g, g, g};
    EnsembleConfig first;
    first.tie_policy = TiePolicy::first_pivot;
    EnsembleResult a = ensemble(coll, first);
    REQUIRE(a.pivot_index == 0); // all pivots tie, first wins

    EnsembleConfig rng;
    rng.tie_policy = TiePolicy::stable_rng;
    rng.match.seed = 42;
    EnsembleResult b = ensemble(coll, rng);
    EnsembleResult c = ensemble(coll, rng);
    REQUIRE(b.pivot_index == c.pivot_index); // stable under a fixed seed
}

TEST_CASE("corpus ensembling is deterministic across job counts") {
    std::vector<Corpus> corpora(3);
    NoiseSpec noise;
    for (int s = 0; s < 8; ++s) {
        LabeledGraph gold = random_gold(10, 1.2, 10, 5, mix_seed(31, s));
        for (int k = 0; k < 3; ++k) {
            CorpusEntry e;
            e.metadata = {{"id", "s" + std::to_string(s)}};
            e.graph = perturb(gold, noise, mix_seed(32 + k, s));
            e.ordinal = static_cast<std::size_t>(s);
            corpora[k].entries.push_back(std::move(e));
        }
    }
    EnsembleConfig config;
    config.match.seed = 7;
    EnsembleRun one = ensemble_corpus(corpora, config, 1);
    EnsembleRun four = ensemble_corpus(corpora, config, 4);
    REQUIRE(corpus_to_text(one.output) == corpus_to_text(four.output));
    for (std::size_t i = 0; i < one.reports.size(); ++i) {
        REQUIRE(one.reports[i].pivot_index == four.reports[i].pivot_index);
        REQUIRE(one.reports[i].per_pivot_supports == four.reports[i].per_pivot_supports);
        REQUIRE(one.reports[i].theta == four.reports[i].theta);
    }
}
