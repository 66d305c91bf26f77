#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "graphene/ensemble.hpp"
#include "graphene/graph.hpp"
#include "graphene/penman.hpp"
#include "graphene/smatch.hpp"

namespace graphene {

using json = nlohmann::ordered_json;

inline json triples_json(const LabeledGraph& g) {
    json arr = json::array();
    for (const auto& t : to_triples(g)) {
        const char* kind = t.kind == TripleKind::top        ? "top"
                           : t.kind == TripleKind::instance ? "instance"
                           : t.kind == TripleKind::relation ? "relation"
                                                            : "attribute";
        arr.push_back(json::array({kind, t.rel, t.first, t.second}));
    }
    return arr;
}

/// Corpus export for downstream tooling: one object per entry with id,
/// sentence, canonical PENMAN text and the triple view.
inline json corpus_json(const Corpus& corpus, const PenmanOptions& opts = {}) {
    json arr = json::array();
    for (const auto& entry : corpus.entries) {
        json obj;
        obj["id"] = entry.id().value_or(std::to_string(entry.ordinal));
        obj["snt"] = entry.meta("snt").value_or("");
        obj["penman"] = serialize_penman(entry.graph, opts);
        obj["triples"] = triples_json(entry.graph);
        arr.push_back(std::move(obj));
    }
    return arr;
}

inline json score_json(const SmatchScore& s) {
    return json{{"precision", s.precision},
                {"recall", s.recall},
                {"f1", s.f1},
                {"matched", s.matched},
                {"pred_triples", s.pred_triples},
                {"gold_triples", s.gold_triples}};
}

inline json score_report_json(const SmatchScore& overall,
                              const std::vector<std::pair<std::string, SmatchScore>>& per_sentence) {
    json report;
    report["overall"] = score_json(overall);
    double macro = 0.0;
    json rows = json::array();
    for (const auto& [id, s] : per_sentence) {
        json row = score_json(s);
        row["id"] = id;
        rows.push_back(std::move(row));
        macro += s.f1;
    }
    if (!per_sentence.empty()) macro /= static_cast<double>(per_sentence.size());
    report["macro_f1"] = macro;
    report["per_sentence"] = std::move(rows);
    return report;
}

inline const char* mode_name(FilterMode mode) {
    return mode == FilterMode::strict ? "strict" : "valid_amr";
}

inline json ensemble_report_json(const std::vector<EntryReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) {
        arr.push_back(json{{"id", r.id},
                           {"ordinal", r.ordinal},
                           {"pivot_index", r.pivot_index},
                           {"per_pivot_supports", r.per_pivot_supports},
                           {"theta", r.theta},
                           {"mode", mode_name(r.mode)},
                           {"elapsed_ms", r.elapsed_ms}});
    }
    return arr;
}

inline json stats_report_json(const SupportSmatchResult& result,
                              const std::vector<EntryReport>& reports, int models) {
    json report;
    report["correlation"] = json{{"pearson_r", result.correlation.r},
                                 {"p_value", result.correlation.p_value},
                                 {"n", result.correlation.n}};
    std::vector<long long> pivot_counts(models, 0);
    for (const auto& r : reports)
        if (r.pivot_index >= 0 && r.pivot_index < models) ++pivot_counts[r.pivot_index];
    report["pivot_counts"] = pivot_counts;
    json rows = json::array();
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const auto& pt = result.points[i];
        json row{{"id", pt.id},
                 {"normalized_support", pt.normalized_support},
                 {"support_total", pt.support_total},
                 {"smatch_f1", pt.smatch_f1}};
        if (i < reports.size()) row["pivot_index"] = reports[i].pivot_index;
        rows.push_back(std::move(row));
    }
    report["per_sentence"] = std::move(rows);
    return report;
}

} // namespace graphene
