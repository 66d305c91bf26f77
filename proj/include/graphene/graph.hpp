#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphene/error.hpp"

namespace graphene {

/// Input description of one node. Constants are leaf values (polarity "-",
/// quantities, wiki strings) modeled as labeled nodes with constant=true.
struct NodeSpec {
    std::string id;
    std::string label;
    bool constant = false;
    bool quoted = false; // constant was written as a quoted string
};

/// Input description of one directed labeled edge, endpoints by node id.
struct EdgeSpec {
    std::string src;
    std::string dst;
    std::string label;
};

enum class TripleKind { top, instance, relation, attribute };

struct Triple {
    TripleKind kind;
    std::string rel;    // "TOP" / "instance" / edge label
    std::string first;  // node id (top, instance) or source id
    std::string second; // label (top, instance), target id, or constant value

    bool operator==(const Triple&) const = default;
    auto operator<=>(const Triple&) const = default;
};

/*
 * Rooted, node-labeled, edge-labeled directed graph. Immutable after
 * construction; the constructor validates every invariant:
 *   - node ids unique and non-empty, labels non-empty
 *   - edge endpoints resolve, at most one edge per ordered pair
 *   - root (when set) is a member node
 *   - constant nodes have in-degree >= 1 and out-degree 0
 * Cycles are accepted; nothing in the model requires acyclicity.
 */
class LabeledGraph {
public:
    struct Node {
        std::string id;
        std::string label;
        bool constant = false;
        bool quoted = false;
    };
    struct Edge {
        std::size_t src;
        std::size_t dst;
        std::string label;
    };

    LabeledGraph() = default;

    LabeledGraph(const std::vector<NodeSpec>& nodes,
                 const std::vector<EdgeSpec>& edges,
                 const std::optional<std::string>& root = std::nullopt) {
        nodes_.reserve(nodes.size());
        for (const auto& n : nodes) {
            if (n.id.empty())
                throw Error(errc::empty_label, "node with empty id");
            if (n.label.empty())
                throw Error(errc::empty_label, "empty label on node '" + n.id + "'");
            if (index_.count(n.id))
                throw Error(errc::duplicate_node, "duplicate node id '" + n.id + "'");
            index_.emplace(n.id, nodes_.size());
            nodes_.push_back({n.id, n.label, n.constant, n.quoted});
        }
        out_.resize(nodes_.size());
        in_.resize(nodes_.size());
        edges_.reserve(edges.size());
        for (const auto& e : edges) {
            auto s = index_.find(e.src);
            auto d = index_.find(e.dst);
            if (s == index_.end())
                throw Error(errc::dangling_endpoint,
                            "edge (" + e.src + ", " + e.dst + ") references unknown node '" + e.src + "'");
            if (d == index_.end())
                throw Error(errc::dangling_endpoint,
                            "edge (" + e.src + ", " + e.dst + ") references unknown node '" + e.dst + "'");
            if (e.label.empty())
                throw Error(errc::empty_label, "empty label on edge (" + e.src + ", " + e.dst + ")");
            std::uint64_t key = pair_key(s->second, d->second);
            if (edge_index_.count(key))
                throw Error(errc::duplicate_edge,
                            "duplicate edge (" + e.src + ", " + e.dst + ")");
            edge_index_.emplace(key, edges_.size());
            out_[s->second].push_back(edges_.size());
            in_[d->second].push_back(edges_.size());
            edges_.push_back({s->second, d->second, e.label});
        }
        if (root) {
            auto r = index_.find(*root);
            if (r == index_.end())
                throw Error(errc::dangling_endpoint, "root '" + *root + "' is not a node");
            root_ = r->second;
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!nodes_[i].constant) continue;
            if (!out_[i].empty())
                throw Error(errc::invalid_constant,
                            "constant node '" + nodes_[i].id + "' has outgoing edges");
            if (in_[i].empty())
                throw Error(errc::invalid_constant,
                            "constant node '" + nodes_[i].id + "' has no incoming edge");
        }
    }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool empty() const { return nodes_.empty(); }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Node& node(std::size_t i) const { return nodes_[i]; }
    const Edge& edge(std::size_t i) const { return edges_[i]; }

    std::optional<std::size_t> index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> root() const { return root_; }
    bool rooted() const { return root_.has_value(); }

    /// Edge indices leaving / entering a node, in insertion order.
    const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_[node]; }
    const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_[node]; }

    std::optional<std::size_t> edge_between(std::size_t src, std::size_t dst) const {
        auto it = edge_index_.find(pair_key(src, dst));
        if (it == edge_index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string* edge_label(std::size_t src, std::size_t dst) const {
        auto e = edge_between(src, dst);
        return e ? &edges_[*e].label : nullptr;
    }

    /// Connectivity of the undirected view. The empty graph counts as
    /// connected by convention.
    bool is_connected() const {
        if (nodes_.empty()) return true;
        std::vector<char> seen(nodes_.size(), 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t visited = 1;
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t e : out_[u]) {
                std::size_t w = edges_[e].dst;
                if (!seen[w]) { seen[w] = 1; ++visited; stack.push_back(w); }
            }
            for (std::size_t e : in_[u]) {
                std::size_t w = edges_[e].src;
                if (!seen[w]) { seen[w] = 1; ++visited; stack.push_back(w); }
            }
        }
        return visited == nodes_.size();
    }

    std::pair<std::size_t, std::size_t> size() const {
        return {nodes_.size(), edges_.size()};
    }

    std::size_t non_constant_count() const {
        std::size_t n = 0;
        for (const auto& node : nodes_)
            if (!node.constant) ++n;
        return n;
    }

    /// Triple count used by Smatch: instances + relations/attributes (+ top).
    std::size_t triple_count() const {
        return non_constant_count() + edges_.size() + (root_ ? 1 : 0);
    }

    static std::uint64_t pair_key(std::size_t src, std::size_t dst) {
        return (static_cast<std::uint64_t>(src) << 32) | static_cast<std::uint64_t>(dst);
    }

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::uint64_t, std::size_t> edge_index_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
    std::optional<std::size_t> root_;
};

inline std::string make_constant_id(const std::string& src, const std::string& rel,
                                    const std::string& value) {
    return src + "|" + rel + "|" + value;
}

/// Deterministic triple listing: top (if rooted), instances in node order,
/// then relations/attributes in edge order.
inline std::vector<Triple> to_triples(const LabeledGraph& g) {
    std::vector<Triple> out;
    out.reserve(g.triple_count());
    if (g.rooted()) {
        const auto& r = g.node(*g.root());
        out.push_back({TripleKind::top, "TOP", r.id, r.label});
    }
    for (const auto& n : g.nodes())
        if (!n.constant)
            out.push_back({TripleKind::instance, "instance", n.id, n.label});
    for (const auto& e : g.edges()) {
        const auto& dst = g.node(e.dst);
        if (dst.constant)
            out.push_back({TripleKind::attribute, e.label, g.node(e.src).id, dst.label});
        else
            out.push_back({TripleKind::relation, e.label, g.node(e.src).id, dst.id});
    }
    return out;
}

/// Inverse of to_triples. Constant node ids are re-synthesized from
/// (source, relation, value), the same scheme the PENMAN parser uses.
inline LabeledGraph from_triples(const std::vector<Triple>& triples) {
    std::vector<NodeSpec> nodes;
    std::vector<EdgeSpec> edges;
    std::optional<std::string> root;
    for (const auto& t : triples) {
        switch (t.kind) {
            case TripleKind::top:
                root = t.first;
                break;
            case TripleKind::instance:
                nodes.push_back({t.first, t.second, false, false});
                break;
            case TripleKind::relation:
                edges.push_back({t.first, t.second, t.rel});
                break;
            case TripleKind::attribute: {
                std::string cid = make_constant_id(t.first, t.rel, t.second);
                nodes.push_back({cid, t.second, true, false});
                edges.push_back({t.first, cid, t.rel});
                break;
            }
        }
    }
    return LabeledGraph(nodes, edges, root);
}

} // namespace graphene
