#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "graphene/error.hpp"
#include "graphene/graph.hpp"
#include "graphene/parallel.hpp"

namespace graphene {

struct MatchOptions {
    int restarts = 5;        // restart 0 is the greedy label seed, the rest are random
    int max_iterations = 0;  // per-restart climb cap; 0 = run to a local optimum
    bool match_root = true;  // count a root-to-root, label-equal bonus (Smatch TOP)
    std::uint64_t seed = 0;
};

/*
 * Partial injective node mapping from g1 into g2 plus per-element match
 * flags: node_matched[v] is 1 iff v is mapped and labels agree,
 * edge_matched[e] is 1 iff both endpoints are mapped and the image pair
 * carries the same label in g2. score sums all flags (+1 root bonus).
 */
struct VertexMatch {
    std::vector<int> mapping;       // g1 node index -> g2 node index, -1 unmapped
    std::vector<char> node_matched; // s(v) per g1 node
    std::vector<char> edge_matched; // s(e) per g1 edge
    bool root_matched = false;
    long long score = 0;
};

namespace detail {

inline bool kind_compatible(const LabeledGraph::Node& a, const LabeledGraph::Node& b) {
    if (a.constant != b.constant) return false;
    if (a.constant) return a.label == b.label; // constants only match their own value
    return true;
}

inline bool root_bonus(const LabeledGraph& g1, const LabeledGraph& g2,
                       const std::vector<int>& phi, bool match_root) {
    if (!match_root || !g1.rooted() || !g2.rooted()) return false;
    std::size_t r1 = *g1.root(), r2 = *g2.root();
    return phi[r1] == static_cast<int>(r2) && g1.node(r1).label == g2.node(r2).label;
}

inline bool edge_hit(const LabeledGraph& g2, const std::vector<int>& phi,
                     const LabeledGraph::Edge& e) {
    int a = phi[e.src], b = phi[e.dst];
    if (a < 0 || b < 0) return false;
    const std::string* l = g2.edge_label(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    return l && *l == e.label;
}

inline VertexMatch evaluate(const LabeledGraph& g1, const LabeledGraph& g2,
                            std::vector<int> phi, const MatchOptions& opts) {
    VertexMatch m;
    m.mapping = std::move(phi);
    m.node_matched.assign(g1.node_count(), 0);
    m.edge_matched.assign(g1.edge_count(), 0);
    for (std::size_t v = 0; v < g1.node_count(); ++v) {
        int t = m.mapping[v];
        if (t >= 0 && g1.node(v).label == g2.node(static_cast<std::size_t>(t)).label)
            m.node_matched[v] = 1;
    }
    for (std::size_t e = 0; e < g1.edge_count(); ++e)
        m.edge_matched[e] = edge_hit(g2, m.mapping, g1.edge(e)) ? 1 : 0;
    m.root_matched = root_bonus(g1, g2, m.mapping, opts.match_root);
    m.score = std::accumulate(m.node_matched.begin(), m.node_matched.end(), 0LL) +
              std::accumulate(m.edge_matched.begin(), m.edge_matched.end(), 0LL) +
              (m.root_matched ? 1 : 0);
    return m;
}

/*
 * Local search over one mapping: best-improvement steps drawn from two move
 * families, remapping a single node to a free target (or unmapping it) and
 * swapping the images of two nodes. Ties between equal-gain moves go to the
 * first move in scan order, so the climb is deterministic.
 */
class Climber {
public:
    Climber(const LabeledGraph& g1, const LabeledGraph& g2, const MatchOptions& opts)
        : g1_(g1), g2_(g2), opts_(opts), n2_(g2.node_count()) {
        for (std::size_t t = 0; t < n2_; ++t)
            if (!g2_.node(t).constant) nonconst_targets_.push_back(t);
        for (std::size_t t = 0; t < n2_; ++t)
            if (g2_.node(t).constant)
                const_targets_[g2_.node(t).label].push_back(t);

        // label interning makes the move scan pure integer work
        std::unordered_map<std::string, int> codes;
        auto intern = [&codes](const std::string& s) {
            return codes.emplace(s, static_cast<int>(codes.size())).first->second;
        };
        for (const auto& n : g1_.nodes()) {
            node_code1_.push_back(intern(n.label));
            const1_.push_back(n.constant);
        }
        for (const auto& n : g2_.nodes()) {
            node_code2_.push_back(intern(n.label));
            const2_.push_back(n.constant);
        }
        codes.clear();
        for (const auto& e : g1_.edges())
            edges1_.push_back({static_cast<int>(e.src), static_cast<int>(e.dst),
                               intern(e.label)});
        edge_code_lookup_ = codes;
        dense_ = n2_ > 0 && n2_ <= 2048;
        if (dense_) {
            g2_code_.assign(n2_ * n2_, -1);
            for (const auto& e : g2_.edges())
                g2_code_[e.src * n2_ + e.dst] = intern(e.label);
        }
        if (opts_.match_root && g1_.rooted() && g2_.rooted()) {
            root1_ = static_cast<int>(*g1_.root());
            root2_ = static_cast<int>(*g2_.root());
            root_label_eq_ = node_code1_[root1_] == node_code2_[root2_];
        }
    }

    const std::vector<std::size_t>& targets(std::size_t u) const {
        const auto& n = g1_.node(u);
        if (!n.constant) return nonconst_targets_;
        static const std::vector<std::size_t> none;
        auto it = const_targets_.find(n.label);
        return it == const_targets_.end() ? none : it->second;
    }

    long long climb(std::vector<int>& phi) {
        std::vector<int> rev(g2_.node_count(), -1);
        for (std::size_t u = 0; u < phi.size(); ++u)
            if (phi[u] >= 0) rev[phi[u]] = static_cast<int>(u);
        long long score = evaluate(g1_, g2_, phi, opts_).score;
        int iterations = 0;
        for (;;) {
            if (opts_.max_iterations > 0 && iterations >= opts_.max_iterations) break;
            ++iterations;
            long long best_gain = 0;
            std::size_t best_u = 0, best_w = 0;
            int best_t = -1;
            bool best_is_swap = false, found = false;
            for (std::size_t u = 0; u < g1_.node_count(); ++u) {
                // remap to a free target, or unmap
                for (std::size_t t : targets(u)) {
                    if (rev[t] >= 0 || static_cast<int>(t) == phi[u]) continue;
                    long long gain = remap_gain(phi, u, static_cast<int>(t));
                    if (gain > best_gain) {
                        best_gain = gain; best_u = u; best_t = static_cast<int>(t);
                        best_is_swap = false; found = true;
                    }
                }
                if (phi[u] >= 0) {
                    long long gain = remap_gain(phi, u, -1);
                    if (gain > best_gain) {
                        best_gain = gain; best_u = u; best_t = -1;
                        best_is_swap = false; found = true;
                    }
                }
            }
            for (std::size_t u = 0; u + 1 < g1_.node_count(); ++u) {
                for (std::size_t w = u + 1; w < g1_.node_count(); ++w) {
                    if (phi[u] < 0 && phi[w] < 0) continue;
                    if (!swap_allowed(u, w, phi)) continue;
                    long long gain = swap_gain(phi, u, w);
                    if (gain > best_gain) {
                        best_gain = gain; best_u = u; best_w = w;
                        best_is_swap = true; found = true;
                    }
                }
            }
            if (!found) break;
            if (best_is_swap) {
                std::swap(phi[best_u], phi[best_w]);
                if (phi[best_u] >= 0) rev[phi[best_u]] = static_cast<int>(best_u);
                if (phi[best_w] >= 0) rev[phi[best_w]] = static_cast<int>(best_w);
            } else {
                if (phi[best_u] >= 0) rev[phi[best_u]] = -1;
                phi[best_u] = best_t;
                if (best_t >= 0) rev[best_t] = static_cast<int>(best_u);
            }
            score += best_gain;
        }
        return score;
    }

private:
    struct CodedEdge {
        int src;
        int dst;
        int code;
    };

    int edge_code2(int a, int b) const {
        if (dense_) return g2_code_[static_cast<std::size_t>(a) * n2_ + b];
        const std::string* l = g2_.edge_label(a, b);
        if (!l) return -1;
        auto it = edge_code_lookup_.find(*l);
        return it == edge_code_lookup_.end() ? -1 : it->second;
    }

    bool compatible(std::size_t u, int t) const {
        if (t < 0) return true;
        if (const1_[u] != const2_[t]) return false;
        return !const1_[u] || node_code1_[u] == node_code2_[t];
    }

    bool swap_allowed(std::size_t u, std::size_t w, const std::vector<int>& phi) const {
        return compatible(u, phi[w]) && compatible(w, phi[u]);
    }

    long long node_flag(std::size_t u, int t) const {
        return t >= 0 && node_code1_[u] == node_code2_[t] ? 1 : 0;
    }

    long long edge_flag(const CodedEdge& e, const std::vector<int>& phi) const {
        int a = phi[e.src], b = phi[e.dst];
        return a >= 0 && b >= 0 && edge_code2(a, b) == e.code ? 1 : 0;
    }

    long long local_score(const std::vector<int>& phi, std::size_t u, std::size_t w,
                          bool pair_move) const {
        long long s = node_flag(u, phi[u]);
        if (pair_move) s += node_flag(w, phi[w]);
        for (std::size_t e : g1_.out_edges(u)) s += edge_flag(edges1_[e], phi);
        for (std::size_t e : g1_.in_edges(u))
            if (edges1_[e].src != static_cast<int>(u)) s += edge_flag(edges1_[e], phi);
        if (pair_move) {
            int ui = static_cast<int>(u), wi = static_cast<int>(w);
            for (std::size_t e : g1_.out_edges(w)) {
                const auto& ed = edges1_[e];
                if (ed.dst == ui || ed.src == ui) continue; // counted above
                s += edge_flag(ed, phi);
            }
            for (std::size_t e : g1_.in_edges(w)) {
                const auto& ed = edges1_[e];
                if (ed.src == wi) continue;
                if (ed.src == ui || ed.dst == ui) continue;
                s += edge_flag(ed, phi);
            }
        }
        if (root1_ >= 0 && (root1_ == static_cast<int>(u) ||
                            (pair_move && root1_ == static_cast<int>(w))))
            s += (root_label_eq_ && phi[root1_] == root2_) ? 1 : 0;
        return s;
    }

    long long remap_gain(std::vector<int>& phi, std::size_t u, int t) {
        long long before = local_score(phi, u, u, false);
        int old = phi[u];
        phi[u] = t;
        long long after = local_score(phi, u, u, false);
        phi[u] = old;
        return after - before;
    }

    long long swap_gain(std::vector<int>& phi, std::size_t u, std::size_t w) {
        long long before = local_score(phi, u, w, true);
        std::swap(phi[u], phi[w]);
        long long after = local_score(phi, u, w, true);
        std::swap(phi[u], phi[w]);
        return after - before;
    }

    const LabeledGraph& g1_;
    const LabeledGraph& g2_;
    const MatchOptions& opts_;
    std::size_t n2_;
    std::vector<std::size_t> nonconst_targets_;
    std::map<std::string, std::vector<std::size_t>> const_targets_;
    std::vector<int> node_code1_, node_code2_;
    std::vector<char> const1_, const2_;
    std::vector<CodedEdge> edges1_;
    std::unordered_map<std::string, int> edge_code_lookup_;
    std::vector<int> g2_code_;
    bool dense_ = false;
    int root1_ = -1, root2_ = -1;
    bool root_label_eq_ = false;
};

/// Greedy seed: pair equal labels first (first free target in index order),
/// then complete the mapping with the remaining free compatible targets.
/// Completing even zero-gain pairs matters: a mapped node with a different
/// label is what later produces candidate-label votes.
inline std::vector<int> greedy_seed(const LabeledGraph& g1, const LabeledGraph& g2) {
    std::vector<int> phi(g1.node_count(), -1);
    std::vector<char> used(g2.node_count(), 0);
    for (std::size_t u = 0; u < g1.node_count(); ++u) {
        const auto& n = g1.node(u);
        for (std::size_t t = 0; t < g2.node_count(); ++t) {
            if (used[t]) continue;
            const auto& c = g2.node(t);
            if (c.constant != n.constant || c.label != n.label) continue;
            phi[u] = static_cast<int>(t);
            used[t] = 1;
            break;
        }
    }
    for (std::size_t u = 0; u < g1.node_count(); ++u) {
        if (phi[u] >= 0 || g1.node(u).constant) continue;
        for (std::size_t t = 0; t < g2.node_count(); ++t) {
            if (used[t] || g2.node(t).constant) continue;
            phi[u] = static_cast<int>(t);
            used[t] = 1;
            break;
        }
    }
    return phi;
}

inline std::vector<int> random_seed(const LabeledGraph& g1, const LabeledGraph& g2,
                                    std::mt19937_64& rng) {
    std::vector<int> phi(g1.node_count(), -1);
    std::vector<char> used(g2.node_count(), 0);
    std::vector<std::size_t> order(g1.node_count());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> pool;
    for (std::size_t u : order) {
        pool.clear();
        const auto& n = g1.node(u);
        for (std::size_t t = 0; t < g2.node_count(); ++t) {
            if (used[t]) continue;
            if (kind_compatible(n, g2.node(t))) pool.push_back(t);
        }
        if (pool.empty()) continue;
        std::size_t pick = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
        phi[u] = static_cast<int>(pick);
        used[pick] = 1;
    }
    return phi;
}

} // namespace detail

/// Hill-climbing best vertex match, best of `restarts` initializations.
/// Deterministic for a fixed seed; equal-score restarts keep the earliest.
inline VertexMatch best_match(const LabeledGraph& g1, const LabeledGraph& g2,
                              const MatchOptions& opts = {}) {
    if (g1.empty() || g2.empty())
        return detail::evaluate(g1, g2, std::vector<int>(g1.node_count(), -1), opts);
    detail::Climber climber(g1, g2, opts);
    int restarts = std::max(1, opts.restarts);
    std::vector<int> best;
    long long best_score = -1;
    for (int r = 0; r < restarts; ++r) {
        std::vector<int> phi;
        if (r == 0) {
            phi = detail::greedy_seed(g1, g2);
        } else {
            std::mt19937_64 rng(mix_seed(opts.seed, static_cast<std::uint64_t>(r)));
            phi = detail::random_seed(g1, g2, rng);
        }
        long long score = climber.climb(phi);
        if (score > best_score) {
            best_score = score;
            best = std::move(phi);
        }
    }
    return detail::evaluate(g1, g2, std::move(best), opts);
}

namespace detail {

struct BruteForceState {
    const LabeledGraph& g1;
    const LabeledGraph& g2;
    const MatchOptions& opts;
    std::vector<int> phi;
    std::vector<char> used;
    std::vector<long long> potential_suffix; // optimistic score from node u on
    std::vector<std::vector<std::size_t>> edges_closed_at; // edges decided once node u assigned
    std::vector<int> best;
    long long best_score = -1;

    BruteForceState(const LabeledGraph& a, const LabeledGraph& b, const MatchOptions& o)
        : g1(a), g2(b), opts(o),
          phi(a.node_count(), -1), used(b.node_count(), 0),
          edges_closed_at(a.node_count()) {
        for (std::size_t e = 0; e < g1.edge_count(); ++e) {
            const auto& ed = g1.edge(e);
            edges_closed_at[std::max(ed.src, ed.dst)].push_back(e);
        }
        potential_suffix.assign(g1.node_count() + 1, 0);
        for (std::size_t u = g1.node_count(); u-- > 0;) {
            long long p = potential_suffix[u + 1] + 1 +
                          static_cast<long long>(edges_closed_at[u].size());
            if (opts.match_root && g1.rooted() && g2.rooted() && *g1.root() == u) p += 1;
            potential_suffix[u] = p;
        }
    }

    void search(std::size_t u, long long score) {
        if (score + potential_suffix[u] <= best_score) return;
        if (u == g1.node_count()) {
            if (score > best_score) {
                best_score = score;
                best = phi;
            }
            return;
        }
        const auto& n = g1.node(u);
        for (std::size_t t = 0; t < g2.node_count(); ++t) {
            if (used[t] || !kind_compatible(n, g2.node(t))) continue;
            phi[u] = static_cast<int>(t);
            used[t] = 1;
            search(u + 1, score + gained(u));
            used[t] = 0;
            phi[u] = -1;
        }
        search(u + 1, score + gained_unmapped(u));
    }

    long long gained(std::size_t u) {
        long long s = g1.node(u).label == g2.node(static_cast<std::size_t>(phi[u])).label ? 1 : 0;
        for (std::size_t e : edges_closed_at[u])
            s += edge_hit(g2, phi, g1.edge(e)) ? 1 : 0;
        if (opts.match_root && g1.rooted() && g2.rooted() && *g1.root() == u)
            s += root_bonus(g1, g2, phi, true) ? 1 : 0;
        return s;
    }

    long long gained_unmapped(std::size_t u) {
        long long s = 0;
        for (std::size_t e : edges_closed_at[u])
            s += edge_hit(g2, phi, g1.edge(e)) ? 1 : 0;
        return s;
    }
};

} // namespace detail

constexpr std::size_t kBruteForceNodeLimit = 8;

/// Exact maximum-score match by enumeration of all partial injections.
/// Guarded: the smaller graph must have at most kBruteForceNodeLimit nodes.
inline VertexMatch brute_force_match(const LabeledGraph& g1, const LabeledGraph& g2,
                                     const MatchOptions& opts = {}) {
    std::size_t smaller = std::min(g1.node_count(), g2.node_count());
    if (smaller > kBruteForceNodeLimit)
        throw Error(errc::too_large,
                    "brute_force_match limited to " + std::to_string(kBruteForceNodeLimit) +
                        " nodes on the smaller side, got " + std::to_string(smaller));
    if (g1.node_count() <= g2.node_count()) {
        detail::BruteForceState st(g1, g2, opts);
        st.search(0, 0);
        return detail::evaluate(g1, g2, std::move(st.best), opts);
    }
    // enumerate the smaller side and invert the mapping
    detail::BruteForceState st(g2, g1, opts);
    st.search(0, 0);
    std::vector<int> phi(g1.node_count(), -1);
    for (std::size_t v = 0; v < st.best.size(); ++v)
        if (st.best[v] >= 0) phi[st.best[v]] = static_cast<int>(v);
    return detail::evaluate(g1, g2, std::move(phi), opts);
}

/*
 * Per-element support of g against a collection: for each graph in G the
 * best match contributes its per-element flags. A graph equal to g (the
 * pivot case) contributes 1 everywhere via its identity self-match.
 */
struct SupportMap {
    std::map<std::string, int> node_support;
    std::map<std::pair<std::string, std::string>, int> edge_support;
    long long total = 0;
};

inline SupportMap support_of(const LabeledGraph& g, const std::vector<LabeledGraph>& collection,
                             const MatchOptions& opts = {}) {
    SupportMap out;
    for (const auto& n : g.nodes()) out.node_support[n.id] = 0;
    for (const auto& e : g.edges())
        out.edge_support[{g.node(e.src).id, g.node(e.dst).id}] = 0;
    for (const auto& other : collection) {
        VertexMatch m = best_match(g, other, opts);
        for (std::size_t v = 0; v < g.node_count(); ++v)
            if (m.node_matched[v]) ++out.node_support[g.node(v).id];
        for (std::size_t e = 0; e < g.edge_count(); ++e)
            if (m.edge_matched[e]) {
                const auto& ed = g.edge(e);
                ++out.edge_support[{g.node(ed.src).id, g.node(ed.dst).id}];
            }
    }
    for (const auto& [id, s] : out.node_support) out.total += s;
    for (const auto& [pair, s] : out.edge_support) out.total += s;
    return out;
}

inline bool is_theta_supported(const LabeledGraph& g, const std::vector<LabeledGraph>& collection,
                               int theta, const MatchOptions& opts = {}) {
    if (theta <= 0) return true;
    SupportMap s = support_of(g, collection, opts);
    for (const auto& [id, v] : s.node_support)
        if (v < theta) return false;
    for (const auto& [pair, v] : s.edge_support)
        if (v < theta) return false;
    return true;
}

/// Smatch-style matched triple count for a computed match: instance matches
/// (non-constant nodes), relation/attribute matches (edges), and the TOP
/// bonus. Constant node flags are tracked for support but are not triples.
inline long long matched_triple_count(const LabeledGraph& g1, const VertexMatch& m) {
    long long s = m.root_matched ? 1 : 0;
    for (std::size_t v = 0; v < g1.node_count(); ++v)
        if (m.node_matched[v] && !g1.node(v).constant) ++s;
    for (std::size_t e = 0; e < g1.edge_count(); ++e)
        if (m.edge_matched[e]) ++s;
    return s;
}

} // namespace graphene
