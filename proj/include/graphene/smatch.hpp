#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "graphene/align.hpp"
#include "graphene/error.hpp"
#include "graphene/graph.hpp"
#include "graphene/parallel.hpp"
#include "graphene/penman.hpp"

namespace graphene {

struct SmatchScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long matched = 0;
    long long pred_triples = 0;
    long long gold_triples = 0;
};

/// Assemble a score from raw counts; zero denominators score 0.
inline SmatchScore smatch_from_counts(long long matched, long long pred, long long gold) {
    SmatchScore s;
    s.matched = matched;
    s.pred_triples = pred;
    s.gold_triples = gold;
    s.precision = pred > 0 ? static_cast<double>(matched) / static_cast<double>(pred) : 0.0;
    s.recall = gold > 0 ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
    double pr = s.precision + s.recall;
    s.f1 = pr > 0.0 ? 2.0 * s.precision * s.recall / pr : 0.0;
    return s;
}

namespace detail {

inline LabeledGraph strip_edge_labels(const LabeledGraph& g) {
    std::vector<NodeSpec> nodes;
    for (const auto& n : g.nodes()) nodes.push_back({n.id, n.label, n.constant, n.quoted});
    std::vector<EdgeSpec> edges;
    for (const auto& e : g.edges())
        edges.push_back({g.node(e.src).id, g.node(e.dst).id, ":rel"});
    std::optional<std::string> root;
    if (g.rooted()) root = g.node(*g.root()).id;
    return LabeledGraph(nodes, edges, root);
}

} // namespace detail

/// Smatch P/R/F1 over best-aligned triples (instance, relation, attribute,
/// top). Zero denominators score 0 by convention.
inline SmatchScore smatch(const LabeledGraph& pred, const LabeledGraph& gold,
                          const MatchOptions& opts = {}) {
    VertexMatch m = best_match(pred, gold, opts);
    return smatch_from_counts(matched_triple_count(pred, m),
                              static_cast<long long>(pred.triple_count()),
                              static_cast<long long>(gold.triple_count()));
}

/// Smatch after replacing every edge label with one sentinel.
inline SmatchScore smatch_unlabeled(const LabeledGraph& pred, const LabeledGraph& gold,
                                    const MatchOptions& opts = {}) {
    return smatch(detail::strip_edge_labels(pred), detail::strip_edge_labels(gold), opts);
}

/// Corpus micro-average: matched/pred/gold counts are summed across aligned
/// entries before forming P/R/F1.
inline SmatchScore corpus_smatch(const Corpus& preds, const Corpus& golds,
                                 const MatchOptions& opts = {}, int jobs = 1) {
    auto rows = align_corpora({&preds, &golds});
    std::vector<SmatchScore> scores(rows.size());
    parallel_for(rows.size(), jobs, [&](std::size_t i) {
        scores[i] = smatch(rows[i][0]->graph, rows[i][1]->graph, opts);
    });
    long long matched = 0, pred = 0, gold = 0;
    for (const auto& s : scores) {
        matched += s.matched;
        pred += s.pred_triples;
        gold += s.gold_triples;
    }
    return smatch_from_counts(matched, pred, gold);
}

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Pearson correlation with a two-sided t-test p-value.
inline Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw Error(errc::length_mismatch, "pearson: series lengths differ");
    std::size_t n = xs.size();
    if (n < 3)
        throw Error(errc::degenerate_variance, "pearson: need at least 3 points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += xs[i]; my += ys[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw Error(errc::degenerate_variance, "pearson: a series is constant");
    Correlation c;
    c.n = n;
    c.r = sxy / std::sqrt(sxx * syy);
    if (c.r >= 1.0 || c.r <= -1.0) {
        c.p_value = 0.0;
        return c;
    }
    double dof = static_cast<double>(n - 2);
    double t = c.r * std::sqrt(dof / (1.0 - c.r * c.r));
    boost::math::students_t dist(dof);
    c.p_value = 2.0 * boost::math::cdf(dist, -std::fabs(t));
    return c;
}

struct SupportSmatchPoint {
    std::string id;
    double normalized_support = 0.0;
    long long support_total = 0;
    double smatch_f1 = 0.0;
};

struct SupportSmatchResult {
    Correlation correlation;
    std::vector<SupportSmatchPoint> points;
};

/*
 * Per-sentence normalized total support (support against the ensemble
 * inputs divided by the prediction's triple count) against per-sentence
 * Smatch F1 vs gold.
 */
inline SupportSmatchResult support_smatch_correlation(const Corpus& preds, const Corpus& golds,
                                                      const std::vector<Corpus>& inputs,
                                                      const MatchOptions& opts = {},
                                                      int jobs = 1) {
    std::vector<const Corpus*> all{&preds, &golds};
    for (const auto& c : inputs) all.push_back(&c);
    auto rows = align_corpora(all);
    SupportSmatchResult out;
    out.points.resize(rows.size());
    parallel_for(rows.size(), jobs, [&](std::size_t i) {
        const LabeledGraph& pred = rows[i][0]->graph;
        const LabeledGraph& gold = rows[i][1]->graph;
        std::vector<LabeledGraph> collection;
        for (std::size_t k = 2; k < rows[i].size(); ++k)
            collection.push_back(rows[i][k]->graph);
        SupportMap sup = support_of(pred, collection, opts);
        SupportSmatchPoint& pt = out.points[i];
        pt.id = rows[i][0]->id().value_or(std::to_string(rows[i][0]->ordinal));
        pt.support_total = sup.total;
        pt.normalized_support = pred.triple_count() > 0
                                    ? static_cast<double>(sup.total) /
                                          static_cast<double>(pred.triple_count())
                                    : 0.0;
        pt.smatch_f1 = smatch(pred, gold, opts).f1;
    });
    std::vector<double> xs, ys;
    xs.reserve(out.points.size());
    ys.reserve(out.points.size());
    for (const auto& pt : out.points) {
        xs.push_back(pt.normalized_support);
        ys.push_back(pt.smatch_f1);
    }
    out.correlation = pearson(xs, ys);
    return out;
}

} // namespace graphene
