// Command-line surface for ensembling, scoring and synthesizing labeled
// graph (AMR) prediction corpora.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphene/align.hpp"
#include "graphene/ensemble.hpp"
#include "graphene/penman.hpp"
#include "graphene/report.hpp"
#include "graphene/smatch.hpp"
#include "graphene/synth.hpp"

namespace {

constexpr int kExitParseError = 1;
constexpr int kExitAlignError = 2;

int default_jobs() {
    if (const char* env = std::getenv("GRAPHENE_JOBS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

int exit_code_for(const graphene::Error& e) {
    switch (e.code()) {
        case graphene::errc::id_mismatch:
        case graphene::errc::length_mismatch:
            return kExitAlignError;
        default:
            return kExitParseError;
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw graphene::Error(graphene::errc::io_error, "cannot write '" + path + "'");
    out << text;
}

void write_json(const std::string& path, const graphene::json& j) {
    write_text(path, j.dump(2) + "\n");
}

// --theta accepts a fraction in (0,1) or an absolute integer count.
void apply_theta(graphene::EnsembleConfig& config, double theta) {
    if (theta <= 0.0) throw graphene::Error(graphene::errc::invalid_config, "theta must be > 0");
    if (theta < 1.0) {
        config.theta = 0;
        config.theta_fraction = theta;
    } else {
        config.theta = static_cast<int>(theta);
        if (static_cast<double>(config.theta) != theta)
            throw graphene::Error(graphene::errc::invalid_config,
                                  "absolute theta must be an integer");
    }
}

struct EnsembleArgs {
    std::vector<std::string> inputs;
    std::string out;
    std::string report;
    double theta = 0.5;
    std::string mode = "valid-amr";
    std::string tie = "first";
    int restarts = 5;
    std::uint64_t seed = 0;
    int jobs = default_jobs();
};

int run_ensemble(const EnsembleArgs& args) {
    graphene::EnsembleConfig config;
    apply_theta(config, args.theta);
    config.mode = args.mode == "strict" ? graphene::FilterMode::strict
                                        : graphene::FilterMode::valid_amr;
    config.tie_policy = args.tie == "rng" ? graphene::TiePolicy::stable_rng
                                          : graphene::TiePolicy::first_pivot;
    config.match.restarts = args.restarts;
    config.match.seed = args.seed;

    std::vector<graphene::Corpus> corpora;
    corpora.reserve(args.inputs.size());
    for (const auto& path : args.inputs) corpora.push_back(graphene::read_corpus(path));
    graphene::EnsembleRun run = graphene::ensemble_corpus(corpora, config, args.jobs);

    if (!args.out.empty())
        graphene::write_corpus(args.out, run.output);
    else
        std::cout << graphene::corpus_to_text(run.output);
    if (!args.report.empty())
        write_json(args.report, graphene::ensemble_report_json(run.reports));
    std::cerr << "ensembled " << run.output.entries.size() << " entries from "
              << corpora.size() << " models\n";
    return 0;
}

struct ScoreArgs {
    std::string pred;
    std::string gold;
    std::string report;
    bool unlabeled = false;
    int restarts = 5;
    std::uint64_t seed = 0;
    int jobs = default_jobs();
};

int run_score(const ScoreArgs& args) {
    graphene::MatchOptions opts;
    opts.restarts = args.restarts;
    opts.seed = args.seed;
    graphene::Corpus pred = graphene::read_corpus(args.pred);
    graphene::Corpus gold = graphene::read_corpus(args.gold);

    auto rows = graphene::align_corpora({&pred, &gold});
    std::vector<std::pair<std::string, graphene::SmatchScore>> per_sentence(rows.size());
    graphene::parallel_for(rows.size(), args.jobs, [&](std::size_t i) {
        const auto& p = rows[i][0]->graph;
        const auto& g = rows[i][1]->graph;
        graphene::SmatchScore s = args.unlabeled ? graphene::smatch_unlabeled(p, g, opts)
                                                 : graphene::smatch(p, g, opts);
        per_sentence[i] = {rows[i][0]->id().value_or(std::to_string(i)), s};
    });
    long long matched = 0, pt = 0, gt = 0;
    for (const auto& [id, s] : per_sentence) {
        matched += s.matched;
        pt += s.pred_triples;
        gt += s.gold_triples;
    }
    graphene::SmatchScore overall = graphene::smatch_from_counts(matched, pt, gt);

    std::cout << std::fixed << std::setprecision(4);
    std::cout << "Precision " << overall.precision << "\n";
    std::cout << "Recall " << overall.recall << "\n";
    std::cout << "F1 " << overall.f1 << "\n";
    if (!args.report.empty())
        write_json(args.report, graphene::score_report_json(overall, per_sentence));
    return 0;
}

struct MatchArgs {
    std::string first;
    std::string second;
    std::size_t index = 0;
    int restarts = 5;
    std::uint64_t seed = 0;
    bool brute = false;
};

int run_match(const MatchArgs& args) {
    graphene::Corpus a = graphene::read_corpus(args.first);
    graphene::Corpus b = graphene::read_corpus(args.second);
    if (args.index >= a.entries.size() || args.index >= b.entries.size())
        throw graphene::Error(graphene::errc::length_mismatch, "entry index out of range");
    const graphene::LabeledGraph& g1 = a.entries[args.index].graph;
    const graphene::LabeledGraph& g2 = b.entries[args.index].graph;
    graphene::MatchOptions opts;
    opts.restarts = args.restarts;
    opts.seed = args.seed;
    graphene::VertexMatch m = args.brute ? graphene::brute_force_match(g1, g2, opts)
                                         : graphene::best_match(g1, g2, opts);
    for (std::size_t v = 0; v < g1.node_count(); ++v) {
        if (m.mapping[v] < 0) continue;
        std::cout << g1.node(v).id << " -> " << g2.node(m.mapping[v]).id << "\n";
    }
    std::cout << "score " << m.score << "\n";
    return 0;
}

struct StatsArgs {
    std::vector<std::string> inputs;
    std::string gold;
    std::string report;
    double theta = 0.5;
    std::string mode = "valid-amr";
    int restarts = 5;
    std::uint64_t seed = 0;
    int jobs = default_jobs();
};

int run_stats(const StatsArgs& args) {
    graphene::EnsembleConfig config;
    apply_theta(config, args.theta);
    config.mode = args.mode == "strict" ? graphene::FilterMode::strict
                                        : graphene::FilterMode::valid_amr;
    config.match.restarts = args.restarts;
    config.match.seed = args.seed;

    std::vector<graphene::Corpus> corpora;
    for (const auto& path : args.inputs) corpora.push_back(graphene::read_corpus(path));
    graphene::Corpus gold = graphene::read_corpus(args.gold);

    graphene::EnsembleRun run = graphene::ensemble_corpus(corpora, config, args.jobs);
    graphene::SupportSmatchResult result = graphene::support_smatch_correlation(
        run.output, gold, corpora, config.match, args.jobs);

    std::cout << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const auto& pt = result.points[i];
        std::cout << pt.id << " support " << pt.normalized_support << " smatch "
                  << pt.smatch_f1 << " pivot " << run.reports[i].pivot_index << "\n";
    }
    std::cout << "pearson_r " << result.correlation.r << "\n";
    std::cout << "p_value " << std::setprecision(6) << result.correlation.p_value << "\n";
    std::vector<long long> pivot_counts(corpora.size(), 0);
    for (const auto& r : run.reports) ++pivot_counts[r.pivot_index];
    std::cout << "pivot_counts";
    for (std::size_t i = 0; i < pivot_counts.size(); ++i)
        std::cout << " " << i << ":" << pivot_counts[i];
    std::cout << "\n";
    if (!args.report.empty())
        write_json(args.report,
                   graphene::stats_report_json(result, run.reports,
                                               static_cast<int>(corpora.size())));
    return 0;
}

struct SynthArgs {
    std::string out_dir;
    int sentences = 100;
    int models = 5;
    int nodes = 20;
    double density = 1.2;
    std::uint64_t seed = 1;
    graphene::NoiseSpec noise;
    bool correlated = false;
};

int run_synth(const SynthArgs& args) {
    args.noise.validate();
    std::filesystem::create_directories(args.out_dir);
    graphene::Corpus gold;
    gold.source = "synth";
    std::vector<graphene::Corpus> models(args.models);
    for (int s = 0; s < args.sentences; ++s) {
        std::uint64_t sentence_seed = graphene::mix_seed(args.seed, s);
        graphene::LabeledGraph g = graphene::random_gold(
            args.nodes, args.density, args.noise.node_vocab, args.noise.edge_vocab,
            sentence_seed, args.noise.node_prefix, args.noise.edge_prefix);
        std::string id = "synth-" + std::to_string(s);
        gold.entries.push_back({{{"id", id}}, g, static_cast<std::size_t>(s)});
        auto preds = graphene::simulate_predictions(g, args.models, args.noise,
                                                    graphene::mix_seed(sentence_seed, 0x9d),
                                                    args.correlated);
        for (int k = 0; k < args.models; ++k)
            models[k].entries.push_back(
                {{{"id", id}}, preds[k], static_cast<std::size_t>(s)});
    }
    auto path = [&](const std::string& name) {
        return (std::filesystem::path(args.out_dir) / name).string();
    };
    graphene::write_corpus(path("gold.amr"), gold);
    for (int k = 0; k < args.models; ++k)
        graphene::write_corpus(path("model_" + std::to_string(k) + ".amr"), models[k]);
    std::cerr << "wrote gold + " << args.models << " model corpora ("
              << args.sentences << " sentences) to " << args.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ensemble, score and synthesize labeled-graph (AMR) predictions"};
    app.require_subcommand(1);

    EnsembleArgs ens;
    CLI::App* cmd_ensemble = app.add_subcommand(
        "ensemble", "Combine prediction corpora into one ensemble corpus");
    cmd_ensemble->add_option("inputs", ens.inputs, "prediction PENMAN files")
        ->required()
        ->expected(-1);
    cmd_ensemble->add_option("--theta", ens.theta,
                             "support threshold: fraction in (0,1) or absolute count");
    cmd_ensemble->add_option("--mode", ens.mode, "valid-amr | strict")
        ->check(CLI::IsMember({"valid-amr", "strict"}));
    cmd_ensemble->add_option("--tie", ens.tie, "first | rng")
        ->check(CLI::IsMember({"first", "rng"}));
    cmd_ensemble->add_option("--restarts", ens.restarts, "matcher restarts");
    cmd_ensemble->add_option("--seed", ens.seed, "RNG seed");
    cmd_ensemble->add_option("--jobs", ens.jobs, "worker threads (env GRAPHENE_JOBS)");
    cmd_ensemble->add_option("--out", ens.out, "output PENMAN file (default stdout)");
    cmd_ensemble->add_option("--report", ens.report, "per-entry JSON report");

    ScoreArgs score;
    CLI::App* cmd_score = app.add_subcommand("score", "Smatch a prediction corpus against gold");
    cmd_score->add_option("pred", score.pred, "prediction PENMAN file")->required();
    cmd_score->add_option("gold", score.gold, "gold PENMAN file")->required();
    cmd_score->add_flag("--unlabeled", score.unlabeled, "ignore edge labels");
    cmd_score->add_option("--restarts", score.restarts, "matcher restarts");
    cmd_score->add_option("--seed", score.seed, "RNG seed");
    cmd_score->add_option("--jobs", score.jobs, "worker threads");
    cmd_score->add_option("--report", score.report, "JSON report path");

    MatchArgs match;
    CLI::App* cmd_match = app.add_subcommand("match", "Print the best vertex match of two graphs");
    cmd_match->add_option("first", match.first, "first PENMAN file")->required();
    cmd_match->add_option("second", match.second, "second PENMAN file")->required();
    cmd_match->add_option("--index", match.index, "entry index within the files");
    cmd_match->add_option("--restarts", match.restarts, "matcher restarts");
    cmd_match->add_option("--seed", match.seed, "RNG seed");
    cmd_match->add_flag("--brute", match.brute, "exact enumeration (small graphs only)");

    StatsArgs stats;
    CLI::App* cmd_stats = app.add_subcommand(
        "stats", "Support/Smatch correlation and pivot selection statistics");
    cmd_stats->add_option("inputs", stats.inputs, "prediction PENMAN files")
        ->required()
        ->expected(-1);
    cmd_stats->add_option("--gold", stats.gold, "gold PENMAN file")->required();
    cmd_stats->add_option("--theta", stats.theta, "support threshold");
    cmd_stats->add_option("--mode", stats.mode, "valid-amr | strict")
        ->check(CLI::IsMember({"valid-amr", "strict"}));
    cmd_stats->add_option("--restarts", stats.restarts, "matcher restarts");
    cmd_stats->add_option("--seed", stats.seed, "RNG seed");
    cmd_stats->add_option("--jobs", stats.jobs, "worker threads");
    cmd_stats->add_option("--report", stats.report, "JSON report path");

    SynthArgs synth;
    CLI::App* cmd_synth = app.add_subcommand(
        "synth", "Generate a synthetic gold corpus plus noisy model predictions");
    cmd_synth->add_option("--out-dir", synth.out_dir, "output directory")->required();
    cmd_synth->add_option("--sentences", synth.sentences, "number of sentences");
    cmd_synth->add_option("--models", synth.models, "number of simulated models");
    cmd_synth->add_option("--nodes", synth.nodes, "nodes per gold graph");
    cmd_synth->add_option("--density", synth.density, "edges per node");
    cmd_synth->add_option("--seed", synth.seed, "RNG seed");
    cmd_synth->add_option("--node-vocab", synth.noise.node_vocab, "node label vocabulary size");
    cmd_synth->add_option("--edge-vocab", synth.noise.edge_vocab, "edge label vocabulary size");
    cmd_synth->add_option("--p-node-relabel", synth.noise.p_node_relabel, "node relabel probability");
    cmd_synth->add_option("--p-edge-relabel", synth.noise.p_edge_relabel, "edge relabel probability");
    cmd_synth->add_option("--p-edge-delete", synth.noise.p_edge_delete, "edge delete probability");
    cmd_synth->add_option("--p-edge-add", synth.noise.p_edge_add, "edge add probability");
    cmd_synth->add_option("--p-node-delete", synth.noise.p_node_delete, "node delete probability");
    cmd_synth->add_flag("--correlated", synth.correlated,
                        "share one error stream across models (negative control)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_ensemble->parsed()) return run_ensemble(ens);
        if (cmd_score->parsed()) return run_score(score);
        if (cmd_match->parsed()) return run_match(match);
        if (cmd_stats->parsed()) return run_stats(stats);
        if (cmd_synth->parsed()) return run_synth(synth);
    } catch (const graphene::Error& e) {
        std::cerr << "error (" << graphene::errc_name(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
