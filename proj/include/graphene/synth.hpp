#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "graphene/error.hpp"
#include "graphene/graph.hpp"
#include "graphene/parallel.hpp"

namespace graphene {

/*
 * Error model standing in for parser noise: independent per-element label
 * flips, edge drops/additions and node drops, all probability-driven and
 * seed-reproducible. Perturbed graphs stay rooted and connected so they
 * serialize like real predictions.
 */
struct NoiseSpec {
    double p_node_relabel = 0.1;
    double p_edge_relabel = 0.1;
    double p_edge_delete = 0.05;
    double p_edge_add = 0.05;
    double p_node_delete = 0.0;
    int node_vocab = 50;
    int edge_vocab = 12;
    std::string node_prefix = "c";
    std::string edge_prefix = ":r";

    void validate() const {
        for (double p : {p_node_relabel, p_edge_relabel, p_edge_delete, p_edge_add,
                         p_node_delete})
            if (p < 0.0 || p > 1.0)
                throw Error(errc::invalid_config, "noise probability outside [0, 1]");
        if (node_vocab < 1 || edge_vocab < 1)
            throw Error(errc::invalid_config, "label vocabulary must be positive");
    }
};

namespace detail {

inline std::string vocab_label(const std::string& prefix, int k) {
    return prefix + std::to_string(k);
}

inline bool connected_without(const LabeledGraph& g, const std::vector<char>& node_alive,
                              const std::vector<char>& edge_alive, std::size_t root) {
    if (!node_alive[root]) return false;
    std::size_t target = 0;
    for (char a : node_alive) target += a;
    std::vector<char> seen(g.node_count(), 0);
    std::vector<std::size_t> stack{root};
    seen[root] = 1;
    std::size_t visited = 1;
    while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        auto step = [&](std::size_t e, std::size_t w) {
            if (edge_alive[e] && node_alive[w] && !seen[w]) {
                seen[w] = 1;
                ++visited;
                stack.push_back(w);
            }
        };
        for (std::size_t e : g.out_edges(u)) step(e, g.edge(e).dst);
        for (std::size_t e : g.in_edges(u)) step(e, g.edge(e).src);
    }
    return visited == target;
}

} // namespace detail

/// Rooted, connected, acyclic random graph: a random parent tree on nodes
/// n0..n{k-1} plus extra forward edges up to round(density * n) edges total.
/// Identical seeds give identical graphs.
inline LabeledGraph random_gold(int n_nodes, double density, int node_vocab, int edge_vocab,
                                std::uint64_t seed, const std::string& node_prefix = "c",
                                const std::string& edge_prefix = ":r") {
    if (n_nodes < 1) throw Error(errc::invalid_config, "need at least one node");
    if (node_vocab < 1 || edge_vocab < 1)
        throw Error(errc::invalid_config, "label vocabulary must be positive");
    std::mt19937_64 rng(seed);
    auto node_label = [&] {
        return detail::vocab_label(node_prefix,
                                   std::uniform_int_distribution<int>(0, node_vocab - 1)(rng));
    };
    auto edge_label = [&] {
        return detail::vocab_label(edge_prefix,
                                   std::uniform_int_distribution<int>(0, edge_vocab - 1)(rng));
    };
    std::vector<NodeSpec> nodes;
    for (int i = 0; i < n_nodes; ++i)
        nodes.push_back({"n" + std::to_string(i), node_label(), false, false});
    std::vector<EdgeSpec> edges;
    std::unordered_set<std::uint64_t> present;
    for (int i = 1; i < n_nodes; ++i) {
        int parent = std::uniform_int_distribution<int>(0, i - 1)(rng);
        present.insert(LabeledGraph::pair_key(parent, i));
        edges.push_back({nodes[parent].id, nodes[i].id, edge_label()});
    }
    long long want = std::llround(density * n_nodes);
    long long extra = std::max<long long>(0, want - (n_nodes - 1));
    // extra edges run low index -> high index, which keeps the graph acyclic
    int attempts = 0;
    while (extra > 0 && n_nodes > 2 && attempts < 1000) {
        ++attempts;
        int u = std::uniform_int_distribution<int>(0, n_nodes - 2)(rng);
        int v = std::uniform_int_distribution<int>(u + 1, n_nodes - 1)(rng);
        if (!present.insert(LabeledGraph::pair_key(u, v)).second) continue;
        edges.push_back({nodes[u].id, nodes[v].id, edge_label()});
        --extra;
    }
    return LabeledGraph(nodes, edges, nodes[0].id);
}

/*
 * Apply noise to a gold graph. Order: relabel nodes, relabel edges, delete
 * nodes (dropping everything the root can no longer reach), delete
 * non-bridge edges, add new edges between surviving nodes. Constants are
 * never relabeled and a constant that loses its incoming edge goes with it.
 */
inline LabeledGraph perturb(const LabeledGraph& gold, const NoiseSpec& spec,
                            std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    auto flip = [&](double p) {
        return p > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
    };
    auto node_label = [&] {
        return detail::vocab_label(
            spec.node_prefix, std::uniform_int_distribution<int>(0, spec.node_vocab - 1)(rng));
    };
    auto edge_label = [&] {
        return detail::vocab_label(
            spec.edge_prefix, std::uniform_int_distribution<int>(0, spec.edge_vocab - 1)(rng));
    };

    std::vector<std::string> labels(gold.node_count());
    for (std::size_t v = 0; v < gold.node_count(); ++v) {
        labels[v] = gold.node(v).label;
        if (!gold.node(v).constant && flip(spec.p_node_relabel)) labels[v] = node_label();
    }
    std::vector<std::string> edge_labels(gold.edge_count());
    for (std::size_t e = 0; e < gold.edge_count(); ++e) {
        edge_labels[e] = gold.edge(e).label;
        if (flip(spec.p_edge_relabel)) edge_labels[e] = edge_label();
    }

    std::size_t root = gold.rooted() ? *gold.root() : 0;
    std::vector<char> node_alive(gold.node_count(), 1);
    std::vector<char> edge_alive(gold.edge_count(), 1);
    for (std::size_t v = 0; v < gold.node_count(); ++v)
        if (v != root && flip(spec.p_node_delete)) node_alive[v] = 0;
    for (std::size_t e = 0; e < gold.edge_count(); ++e) {
        const auto& ed = gold.edge(e);
        if (!node_alive[ed.src] || !node_alive[ed.dst]) edge_alive[e] = 0;
    }
    // drop whatever node deletion cut off from the root
    {
        std::vector<char> seen(gold.node_count(), 0);
        std::vector<std::size_t> stack{root};
        seen[root] = 1;
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            auto step = [&](std::size_t e, std::size_t w) {
                if (edge_alive[e] && node_alive[w] && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            };
            for (std::size_t e : gold.out_edges(u)) step(e, gold.edge(e).dst);
            for (std::size_t e : gold.in_edges(u)) step(e, gold.edge(e).src);
        }
        for (std::size_t v = 0; v < gold.node_count(); ++v)
            if (!seen[v]) node_alive[v] = 0;
        for (std::size_t e = 0; e < gold.edge_count(); ++e) {
            const auto& ed = gold.edge(e);
            if (!node_alive[ed.src] || !node_alive[ed.dst]) edge_alive[e] = 0;
        }
    }
    for (std::size_t e = 0; e < gold.edge_count(); ++e) {
        if (!edge_alive[e] || !flip(spec.p_edge_delete)) continue;
        edge_alive[e] = 0;
        if (gold.node(gold.edge(e).dst).constant) {
            node_alive[gold.edge(e).dst] = 0; // orphaned attribute value
        } else if (!detail::connected_without(gold, node_alive, edge_alive, root)) {
            edge_alive[e] = 1; // bridge, keep it
        }
    }

    std::vector<std::size_t> alive_nonconst;
    for (std::size_t v = 0; v < gold.node_count(); ++v)
        if (node_alive[v] && !gold.node(v).constant) alive_nonconst.push_back(v);

    std::unordered_set<std::uint64_t> present;
    for (std::size_t e = 0; e < gold.edge_count(); ++e)
        if (edge_alive[e])
            present.insert(LabeledGraph::pair_key(gold.edge(e).src, gold.edge(e).dst));

    std::vector<EdgeSpec> added;
    long long extra = 0;
    for (std::size_t e = 0; e < gold.edge_count(); ++e)
        if (flip(spec.p_edge_add)) ++extra;
    int attempts = 0;
    while (extra > 0 && alive_nonconst.size() >= 2 && attempts < 1000) {
        ++attempts;
        std::size_t u = alive_nonconst[std::uniform_int_distribution<std::size_t>(
            0, alive_nonconst.size() - 1)(rng)];
        std::size_t v = alive_nonconst[std::uniform_int_distribution<std::size_t>(
            0, alive_nonconst.size() - 1)(rng)];
        if (u == v) continue;
        if (present.count(LabeledGraph::pair_key(u, v)) ||
            present.count(LabeledGraph::pair_key(v, u)))
            continue;
        present.insert(LabeledGraph::pair_key(u, v));
        added.push_back({gold.node(u).id, gold.node(v).id, edge_label()});
        --extra;
    }

    std::vector<NodeSpec> nodes;
    for (std::size_t v = 0; v < gold.node_count(); ++v) {
        if (!node_alive[v]) continue;
        const auto& n = gold.node(v);
        nodes.push_back({n.id, labels[v], n.constant, n.quoted});
    }
    std::vector<EdgeSpec> edges;
    for (std::size_t e = 0; e < gold.edge_count(); ++e) {
        if (!edge_alive[e]) continue;
        const auto& ed = gold.edge(e);
        edges.push_back({gold.node(ed.src).id, gold.node(ed.dst).id, edge_labels[e]});
    }
    for (auto& e : added) edges.push_back(std::move(e));

    std::optional<std::string> new_root;
    if (gold.rooted()) new_root = gold.node(root).id;
    return LabeledGraph(nodes, edges, new_root);
}

/// m simulated model predictions for one gold graph. Independent errors by
/// default; correlated=true reuses one error stream for all models, the
/// negative control under which ensembling cannot help.
inline std::vector<LabeledGraph> simulate_predictions(const LabeledGraph& gold, int models,
                                                      const NoiseSpec& spec, std::uint64_t seed,
                                                      bool correlated = false) {
    std::vector<LabeledGraph> out;
    out.reserve(models);
    for (int k = 0; k < models; ++k)
        out.push_back(perturb(gold, spec, correlated ? seed : mix_seed(seed, k)));
    return out;
}

} // namespace graphene
