#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "graphene/align.hpp"
#include "graphene/error.hpp"
#include "graphene/graph.hpp"
#include "graphene/parallel.hpp"
#include "graphene/penman.hpp"

namespace graphene {

enum class FilterMode {
    strict,    // keep only elements whose winning label reaches theta
    valid_amr, // additionally keep the pivot root, pivot edges between
               // surviving nodes, and nodes needed to stay connected
};

enum class TiePolicy {
    first_pivot, // equal-support ensembles resolve to the earliest pivot
    stable_rng,  // seeded uniform choice among the maximizers
};

struct EnsembleConfig {
    int theta = 0;               // absolute threshold; 0 means use theta_fraction
    double theta_fraction = 0.5; // resolved per collection size m
    FilterMode mode = FilterMode::valid_amr;
    TiePolicy tie_policy = TiePolicy::first_pivot;
    MatchOptions match;
};

/// Smallest integer threshold that is at least half the votes: ceil(m/2).
inline int default_theta(int m) {
    return (m + 1) / 2;
}

inline int resolve_theta(const EnsembleConfig& config, int m) {
    if (m < 1) throw Error(errc::empty_collection, "ensemble of zero graphs");
    int theta;
    if (config.theta > 0) {
        theta = config.theta;
    } else {
        if (config.theta_fraction <= 0.0 || config.theta_fraction > 1.0)
            throw Error(errc::invalid_config, "theta fraction must be in (0, 1]");
        theta = static_cast<int>(
            std::ceil(config.theta_fraction * static_cast<double>(m) - 1e-9));
        theta = std::max(theta, 1);
    }
    if (theta < 1 || theta > m)
        throw Error(errc::invalid_config,
                    "theta " + std::to_string(theta) + " outside [1, " + std::to_string(m) + "]");
    return theta;
}

/*
 * Candidate-label vote counts for one pivot. node_votes is indexed by pivot
 * node; edge_votes is keyed by ordered pivot node pairs and may contain
 * pairs with no pivot edge (candidates drawn from other graphs' edges).
 */
struct VoteTable {
    std::vector<std::map<std::string, int>> node_votes;
    std::map<std::pair<std::size_t, std::size_t>, std::map<std::string, int>> edge_votes;
    int contributors = 0;

    const std::map<std::string, int>* votes_for_node(const LabeledGraph& pivot,
                                                     const std::string& id) const {
        auto i = pivot.index_of(id);
        return i ? &node_votes[*i] : nullptr;
    }
    const std::map<std::string, int>* votes_for_edge(const LabeledGraph& pivot,
                                                     const std::string& src,
                                                     const std::string& dst) const {
        auto s = pivot.index_of(src);
        auto d = pivot.index_of(dst);
        if (!s || !d) return nullptr;
        auto it = edge_votes.find({*s, *d});
        return it == edge_votes.end() ? nullptr : &it->second;
    }
};

/// One vote per pivot element for its own label.
inline VoteTable init_votes(const LabeledGraph& pivot) {
    VoteTable table;
    table.node_votes.resize(pivot.node_count());
    for (std::size_t v = 0; v < pivot.node_count(); ++v)
        table.node_votes[v][pivot.node(v).label] = 1;
    for (const auto& e : pivot.edges())
        table.edge_votes[{e.src, e.dst}][e.label] = 1;
    table.contributors = 1;
    return table;
}

/*
 * Draw votes from `other` through a pivot->other match: every mapped pivot
 * node votes for the label of its image (introducing a candidate when the
 * labels differ), and every edge of `other` whose endpoints are images of
 * pivot nodes votes for its label on that pivot pair, whether or not the
 * pivot has an edge there.
 */
inline void poll_votes(VoteTable& table, const LabeledGraph& pivot, const LabeledGraph& other,
                       const VertexMatch& match) {
    std::vector<int> rev(other.node_count(), -1);
    for (std::size_t v = 0; v < pivot.node_count(); ++v)
        if (match.mapping[v] >= 0) rev[match.mapping[v]] = static_cast<int>(v);
    for (std::size_t v = 0; v < pivot.node_count(); ++v) {
        int t = match.mapping[v];
        if (t >= 0) ++table.node_votes[v][other.node(static_cast<std::size_t>(t)).label];
    }
    for (const auto& e : other.edges()) {
        int u = rev[e.src], v = rev[e.dst];
        if (u < 0 || v < 0) continue;
        ++table.edge_votes[{static_cast<std::size_t>(u), static_cast<std::size_t>(v)}][e.label];
    }
    ++table.contributors;
}

namespace detail {

struct Winner {
    std::string label;
    int count = 0;
};

// Highest count wins; ties go to the pivot's own label when it is among
// the tied candidates, then to the lexicographically smallest label.
inline Winner pick_winner(const std::map<std::string, int>& votes,
                          const std::string* pivot_label) {
    Winner w;
    for (const auto& [label, count] : votes) {
        if (count > w.count) {
            w.label = label;
            w.count = count;
        } else if (count == w.count && pivot_label && label == *pivot_label &&
                   w.label != *pivot_label) {
            w.label = label;
        }
    }
    return w;
}

} // namespace detail

/*
 * Resolve votes into an ensemble graph. Strict mode keeps exactly the
 * elements whose winning label reaches theta. valid_amr mode guarantees a
 * rooted, connected output: the pivot root always survives, every pivot
 * edge between surviving nodes survives, and a below-threshold node is
 * retained when it lies on the pivot path connecting a survivor to the
 * root. Nodes the pivot itself cannot reach from its root are dropped.
 */
inline LabeledGraph filter_votes(const VoteTable& table, const LabeledGraph& pivot, int theta,
                                 FilterMode mode) {
    std::size_t n = pivot.node_count();
    std::vector<detail::Winner> node_winner(n);
    for (std::size_t v = 0; v < n; ++v)
        node_winner[v] = detail::pick_winner(table.node_votes[v], &pivot.node(v).label);

    std::vector<char> keep(n, 0);
    for (std::size_t v = 0; v < n; ++v) keep[v] = node_winner[v].count >= theta;

    if (mode == FilterMode::valid_amr && pivot.rooted()) {
        std::size_t root = *pivot.root();
        // BFS parents over the undirected pivot; retained nodes pull in
        // their whole path back to the root.
        std::vector<int> parent(n, -1);
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> queue{root};
        seen[root] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            std::size_t u = queue[head];
            auto visit = [&](std::size_t w) {
                if (!seen[w]) {
                    seen[w] = 1;
                    parent[w] = static_cast<int>(u);
                    queue.push_back(w);
                }
            };
            for (std::size_t e : pivot.out_edges(u)) visit(pivot.edge(e).dst);
            for (std::size_t e : pivot.in_edges(u)) visit(pivot.edge(e).src);
        }
        std::vector<char> final_keep(n, 0);
        final_keep[root] = 1;
        for (std::size_t v = 0; v < n; ++v) {
            if (!keep[v] || !seen[v]) continue;
            for (int w = static_cast<int>(v); w >= 0; w = parent[w]) {
                if (final_keep[w]) break;
                final_keep[w] = 1;
            }
        }
        keep = std::move(final_keep);
    }

    // Edge pass: winning label per voted pair between kept nodes. In
    // valid_amr mode pivot edges survive regardless of their count.
    std::vector<NodeSpec> nodes;
    std::vector<EdgeSpec> edges;
    for (std::size_t v = 0; v < n; ++v) {
        if (!keep[v]) continue;
        const auto& pn = pivot.node(v);
        nodes.push_back({pn.id, node_winner[v].label, pn.constant, pn.quoted});
    }
    for (const auto& [pair, votes] : table.edge_votes) {
        auto [u, v] = pair;
        if (!keep[u] || !keep[v]) continue;
        const std::string* pivot_label = pivot.edge_label(u, v);
        detail::Winner w = detail::pick_winner(votes, pivot_label);
        bool kept = w.count >= theta || (mode == FilterMode::valid_amr && pivot_label != nullptr);
        if (kept)
            edges.push_back({pivot.node(u).id, pivot.node(v).id, w.label});
    }

    // A constant that lost its incoming edges is no longer a valid leaf.
    std::vector<char> has_in(n, 0);
    for (const auto& e : edges) has_in[*pivot.index_of(e.dst)] = 1;
    std::vector<NodeSpec> pruned_nodes;
    for (const auto& ns : nodes) {
        if (ns.constant && !has_in[*pivot.index_of(ns.id)]) continue;
        pruned_nodes.push_back(ns);
    }
    if (pruned_nodes.size() != nodes.size()) {
        std::vector<char> kept_id(n, 0);
        for (const auto& ns : pruned_nodes) kept_id[*pivot.index_of(ns.id)] = 1;
        std::vector<EdgeSpec> pruned_edges;
        for (const auto& e : edges)
            if (kept_id[*pivot.index_of(e.src)] && kept_id[*pivot.index_of(e.dst)])
                pruned_edges.push_back(e);
        nodes = std::move(pruned_nodes);
        edges = std::move(pruned_edges);
    }

    std::optional<std::string> root;
    if (pivot.rooted() && keep[*pivot.root()]) root = pivot.node(*pivot.root()).id;
    return LabeledGraph(nodes, edges, root);
}

namespace detail {

/*
 * Enforce the strict-mode output guarantee: every surviving element's
 * support, recomputed with fresh matches against the inputs, reaches
 * theta. Vote counts certify support through the pivot's matches only;
 * on rare tie-heavy instances a best match of the filtered graph trades
 * a voted element away, so the element is dropped and support rechecked.
 * On exit `support` holds the final graph's support map.
 */
inline LabeledGraph prune_unsupported(LabeledGraph graph,
                                      const std::vector<LabeledGraph>& inputs, int theta,
                                      const MatchOptions& opts, SupportMap& support) {
    for (;;) {
        support = support_of(graph, inputs, opts);
        std::vector<char> keep_node(graph.node_count(), 1);
        bool changed = false;
        for (std::size_t v = 0; v < graph.node_count(); ++v) {
            if (support.node_support.at(graph.node(v).id) < theta) {
                keep_node[v] = 0;
                changed = true;
            }
        }
        std::vector<char> keep_edge(graph.edge_count(), 1);
        for (std::size_t e = 0; e < graph.edge_count(); ++e) {
            const auto& ed = graph.edge(e);
            if (!keep_node[ed.src] || !keep_node[ed.dst] ||
                support.edge_support.at({graph.node(ed.src).id, graph.node(ed.dst).id}) <
                    theta) {
                keep_edge[e] = 0;
                if (keep_node[ed.src] && keep_node[ed.dst]) changed = true;
            }
        }
        if (!changed) return graph;
        // constants with no surviving incoming edge go too
        std::vector<char> has_in(graph.node_count(), 0);
        for (std::size_t e = 0; e < graph.edge_count(); ++e)
            if (keep_edge[e]) has_in[graph.edge(e).dst] = 1;
        std::vector<NodeSpec> nodes;
        for (std::size_t v = 0; v < graph.node_count(); ++v) {
            const auto& n = graph.node(v);
            if (!keep_node[v]) continue;
            if (n.constant && !has_in[v]) {
                keep_node[v] = 0;
                continue;
            }
            nodes.push_back({n.id, n.label, n.constant, n.quoted});
        }
        std::vector<EdgeSpec> edges;
        for (std::size_t e = 0; e < graph.edge_count(); ++e) {
            const auto& ed = graph.edge(e);
            if (keep_edge[e] && keep_node[ed.src] && keep_node[ed.dst])
                edges.push_back(
                    {graph.node(ed.src).id, graph.node(ed.dst).id, ed.label});
        }
        std::optional<std::string> root;
        if (graph.rooted() && keep_node[*graph.root()])
            root = graph.node(*graph.root()).id;
        graph = LabeledGraph(nodes, edges, root);
    }
}

} // namespace detail

struct EnsembleResult {
    LabeledGraph graph;
    int pivot_index = 0;
    SupportMap support;
    std::vector<long long> per_pivot_supports;
    int theta = 0;
};

/*
 * The full pivot-vote-filter ensemble: build one candidate per pivot, then
 * return the candidate with the largest total support against the inputs.
 * Support for the final selection is recomputed with fresh matches, since
 * a filtered candidate usually differs from its pivot.
 */
inline EnsembleResult ensemble(const std::vector<LabeledGraph>& graphs,
                               const EnsembleConfig& config = {}) {
    if (graphs.empty()) throw Error(errc::empty_collection, "ensemble of zero graphs");
    int m = static_cast<int>(graphs.size());
    int theta = resolve_theta(config, m);

    std::vector<LabeledGraph> candidates(graphs.size());
    std::vector<SupportMap> supports(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        VoteTable table = init_votes(graphs[i]);
        for (std::size_t j = 0; j < graphs.size(); ++j) {
            if (j == i) continue;
            VertexMatch match = best_match(graphs[i], graphs[j], config.match);
            poll_votes(table, graphs[i], graphs[j], match);
        }
        candidates[i] = filter_votes(table, graphs[i], theta, config.mode);
        if (config.mode == FilterMode::strict)
            candidates[i] = detail::prune_unsupported(std::move(candidates[i]), graphs, theta,
                                                      config.match, supports[i]);
        else
            supports[i] = support_of(candidates[i], graphs, config.match);
    }

    std::vector<long long> totals;
    totals.reserve(supports.size());
    for (const auto& s : supports) totals.push_back(s.total);
    long long best = *std::max_element(totals.begin(), totals.end());
    std::size_t chosen = 0;
    if (config.tie_policy == TiePolicy::first_pivot) {
        while (totals[chosen] != best) ++chosen;
    } else {
        std::vector<std::size_t> argmax;
        for (std::size_t i = 0; i < totals.size(); ++i)
            if (totals[i] == best) argmax.push_back(i);
        std::mt19937_64 rng(mix_seed(config.match.seed, 0x71e5ULL));
        chosen = argmax[std::uniform_int_distribution<std::size_t>(0, argmax.size() - 1)(rng)];
    }

    EnsembleResult result;
    result.graph = std::move(candidates[chosen]);
    result.pivot_index = static_cast<int>(chosen);
    result.support = std::move(supports[chosen]);
    result.per_pivot_supports = std::move(totals);
    result.theta = theta;
    return result;
}

struct EntryReport {
    std::string id;
    std::size_t ordinal = 0;
    int pivot_index = 0;
    std::vector<long long> per_pivot_supports;
    int theta = 0;
    FilterMode mode = FilterMode::valid_amr;
    double elapsed_ms = 0.0;
};

struct EnsembleRun {
    Corpus output;
    std::vector<EntryReport> reports;
};

/*
 * Sentence-parallel ensembling of aligned prediction corpora. Entry i runs
 * with seed mix_seed(config seed, i), so output is byte-identical for any
 * job count. Output entries carry the first corpus's metadata.
 */
inline EnsembleRun ensemble_corpus(const std::vector<Corpus>& corpora,
                                   const EnsembleConfig& config = {}, int jobs = 1) {
    std::vector<const Corpus*> ptrs;
    for (const auto& c : corpora) ptrs.push_back(&c);
    auto rows = align_corpora(ptrs);
    EnsembleRun run;
    run.output.source = "<ensemble>";
    run.output.entries.resize(rows.size());
    run.reports.resize(rows.size());
    parallel_for(rows.size(), jobs, [&](std::size_t i) {
        auto start = std::chrono::steady_clock::now();
        std::vector<LabeledGraph> graphs;
        graphs.reserve(rows[i].size());
        for (const CorpusEntry* e : rows[i]) graphs.push_back(e->graph);
        EnsembleConfig local = config;
        local.match.seed = mix_seed(config.match.seed, i);
        EnsembleResult res = ensemble(graphs, local);
        auto stop = std::chrono::steady_clock::now();

        CorpusEntry out;
        out.metadata = rows[i][0]->metadata;
        out.graph = res.graph;
        out.ordinal = i;
        run.output.entries[i] = std::move(out);

        EntryReport rep;
        rep.id = rows[i][0]->id().value_or(std::to_string(i));
        rep.ordinal = i;
        rep.pivot_index = res.pivot_index;
        rep.per_pivot_supports = res.per_pivot_supports;
        rep.theta = res.theta;
        rep.mode = config.mode;
        rep.elapsed_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        run.reports[i] = std::move(rep);
    });
    return run;
}

} // namespace graphene
