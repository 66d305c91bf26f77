#pragma once

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "graphene/error.hpp"
#include "graphene/graph.hpp"

namespace graphene {

struct PenmanOptions {
    // AMR mode: roles ending in "-of" (except :consist-of and :prep-*) are
    // stored as the reversed base relation.
    bool normalize_inverse = true;
};

namespace detail {

struct Token {
    enum Type { lparen, rparen, slash, atom, string, eof } type = eof;
    std::string text;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_space();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= text_.size()) {
            t.type = Token::eof;
            return t;
        }
        char c = text_[pos_];
        if (c == '(') { advance(); t.type = Token::lparen; t.text = "("; return t; }
        if (c == ')') { advance(); t.type = Token::rparen; t.text = ")"; return t; }
        if (c == '/') { advance(); t.type = Token::slash; t.text = "/"; return t; }
        if (c == '"') {
            advance();
            std::string value;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
                    advance();
                    value.push_back(text_[pos_]);
                } else {
                    value.push_back(text_[pos_]);
                }
                advance();
            }
            if (pos_ >= text_.size())
                throw Error(errc::syntax_error, where(t) + ": unterminated string");
            advance(); // closing quote
            t.type = Token::string;
            t.text = std::move(value);
            return t;
        }
        std::string value;
        while (pos_ < text_.size() && !is_delim(text_[pos_])) {
            value.push_back(text_[pos_]);
            advance();
        }
        t.type = Token::atom;
        t.text = std::move(value);
        return t;
    }

    static std::string where(const Token& t) {
        return "line " + std::to_string(t.line) + " col " + std::to_string(t.col);
    }

private:
    static bool is_delim(char c) {
        return c == '(' || c == ')' || c == '/' || c == '"' || c == ' ' || c == '\t' ||
               c == '\r' || c == '\n';
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c != ' ' && c != '\t' && c != '\r' && c != '\n') break;
            advance();
        }
    }

    void advance() {
        if (text_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

inline bool inverse_role(const std::string& role) {
    if (role.size() < 4 || role.compare(role.size() - 3, 3, "-of") != 0) return false;
    if (role == ":consist-of") return false;
    if (role.rfind(":prep-", 0) == 0) return false;
    return true;
}

// One relation occurrence in text order; target resolved after the full
// expression is read, since a bare token is a re-entrant reference only
// when the variable is declared somewhere in the graph.
struct PendingEdge {
    std::string src;
    std::string role;
    enum Kind { node, bare, constant } kind;
    std::string target;
    bool quoted = false;
    Token at;
};

class Parser {
public:
    Parser(std::string_view text, const PenmanOptions& opts) : lex_(text), opts_(opts) {
        cur_ = lex_.next();
    }

    LabeledGraph parse() {
        std::string root = parse_node();
        if (cur_.type != Token::eof)
            throw Error(errc::syntax_error,
                        Lexer::where(cur_) + ": trailing content after graph");
        return build(root);
    }

private:
    const Token& expect(Token::Type type, const char* what) {
        if (cur_.type != type)
            throw Error(errc::syntax_error,
                        Lexer::where(cur_) + ": expected " + what + ", got '" + cur_.text + "'");
        return cur_;
    }

    void bump() { cur_ = lex_.next(); }

    std::string parse_node() {
        expect(Token::lparen, "'('");
        bump();
        Token var_tok = expect(Token::atom, "variable");
        std::string var = var_tok.text;
        if (var.empty() || var[0] == ':')
            throw Error(errc::syntax_error, Lexer::where(var_tok) + ": invalid variable name");
        bump();
        expect(Token::slash, "'/'");
        bump();
        Token concept_tok = expect(Token::atom, "concept");
        if (concept_tok.text.empty() || concept_tok.text[0] == ':')
            throw Error(errc::syntax_error, Lexer::where(concept_tok) + ": invalid concept");
        if (declared_.count(var))
            throw Error(errc::duplicate_concept,
                        Lexer::where(var_tok) + ": variable '" + var +
                            "' already carries a concept");
        declared_.insert(var);
        node_order_.push_back({var, concept_tok.text});
        bump();
        while (cur_.type == Token::atom && !cur_.text.empty() && cur_.text[0] == ':') {
            std::string role = cur_.text;
            if (role.size() == 1)
                throw Error(errc::syntax_error, Lexer::where(cur_) + ": empty role name");
            Token role_tok = cur_;
            bump();
            if (cur_.type == Token::lparen) {
                // reserve the slot first so edges stay in text order
                std::size_t slot = edges_.size();
                edges_.push_back({var, role, PendingEdge::node, "", false, cur_});
                edges_[slot].target = parse_node();
            } else if (cur_.type == Token::string) {
                edges_.push_back({var, role, PendingEdge::constant, cur_.text, true, cur_});
                bump();
            } else if (cur_.type == Token::atom && (cur_.text.empty() || cur_.text[0] != ':')) {
                edges_.push_back({var, role, PendingEdge::bare, cur_.text, false, cur_});
                bump();
            } else {
                throw Error(errc::syntax_error,
                            Lexer::where(role_tok) + ": role '" + role + "' has no value");
            }
        }
        expect(Token::rparen, "')' or role");
        bump();
        return var;
    }

    LabeledGraph build(const std::string& root) {
        std::vector<NodeSpec> nodes;
        nodes.reserve(node_order_.size());
        for (auto& [var, concept_label] : node_order_)
            nodes.push_back({var, concept_label, false, false});
        std::vector<EdgeSpec> edges;
        edges.reserve(edges_.size());
        for (const auto& pe : edges_) {
            bool is_ref = pe.kind == PendingEdge::node ||
                          (pe.kind == PendingEdge::bare && declared_.count(pe.target));
            if (is_ref) {
                if (opts_.normalize_inverse && inverse_role(pe.role))
                    edges.push_back({pe.target, pe.src, pe.role.substr(0, pe.role.size() - 3)});
                else
                    edges.push_back({pe.src, pe.target, pe.role});
            } else {
                std::string cid = make_constant_id(pe.src, pe.role, pe.target);
                nodes.push_back({cid, pe.target, true, pe.quoted});
                edges.push_back({pe.src, cid, pe.role});
            }
        }
        try {
            return LabeledGraph(nodes, edges, root);
        } catch (const Error& e) {
            throw Error(e.code(), std::string("while building graph: ") + e.what());
        }
    }

    Lexer lex_;
    PenmanOptions opts_;
    Token cur_;
    std::unordered_set<std::string> declared_;
    std::vector<std::pair<std::string, std::string>> node_order_;
    std::vector<PendingEdge> edges_;
};

} // namespace detail

/// Parse one PENMAN expression into a graph. The outermost variable becomes
/// the root; repeated variables produce shared (re-entrant) nodes; bare
/// tokens that are not declared variables become constant leaf nodes.
inline LabeledGraph parse_penman(std::string_view text, const PenmanOptions& opts = {}) {
    detail::Parser parser(text, opts);
    return parser.parse();
}

namespace detail {

inline bool needs_quotes(const std::string& s) {
    if (s.empty()) return true;
    for (char c : s)
        if (c == ' ' || c == '\t' || c == '\n' || c == '(' || c == ')' || c == '/' ||
            c == '"' || c == ':')
            return true;
    return false;
}

inline std::string constant_token(const LabeledGraph::Node& n) {
    if (n.quoted || needs_quotes(n.label)) {
        std::string out = "\"";
        for (char c : n.label) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        out.push_back('"');
        return out;
    }
    return n.label;
}

inline std::string role_token(const std::string& label, bool invert) {
    std::string role = label;
    if (!role.empty() && role[0] != ':') role.insert(role.begin(), ':');
    if (invert) role += "-of";
    return role;
}

inline bool valid_variable(const std::string& id) {
    if (id.empty() || id[0] == ':') return false;
    for (char c : id)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '(' || c == ')' ||
            c == '/' || c == '"')
            return false;
    return true;
}

class Serializer {
public:
    Serializer(const LabeledGraph& g) : g_(g), visited_(g.node_count(), 0),
                                        used_(g.edge_count(), 0) {
        // original ids are kept; an id that cannot serve as a variable
        // token gets a generated name, first concept letter plus a counter
        names_.resize(g_.node_count());
        std::unordered_set<std::string> taken;
        for (const auto& n : g_.nodes())
            if (valid_variable(n.id)) taken.insert(n.id);
        for (std::size_t v = 0; v < g_.node_count(); ++v) {
            const auto& n = g_.node(v);
            if (n.constant) continue;
            if (valid_variable(n.id)) {
                names_[v] = n.id;
                continue;
            }
            char letter = 'v';
            for (char c : n.label)
                if (std::isalpha(static_cast<unsigned char>(c))) {
                    letter = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                    break;
                }
            for (int k = 0;; ++k) {
                std::string candidate = std::string(1, letter) + std::to_string(k);
                if (taken.insert(candidate).second) {
                    names_[v] = candidate;
                    break;
                }
            }
        }
    }

    std::string run() {
        std::string out;
        emit_node(*g_.root(), 0, out);
        return out;
    }

private:
    void emit_node(std::size_t u, int depth, std::string& out) {
        visited_[u] = 1;
        const auto& n = g_.node(u);
        out += "(" + names_[u] + " / " + n.label;
        for (std::size_t e : g_.out_edges(u)) {
            if (used_[e]) continue;
            used_[e] = 1;
            const auto& ed = g_.edge(e);
            const auto& dst = g_.node(ed.dst);
            indent(depth + 1, out);
            out += role_token(ed.label, false) + " ";
            if (dst.constant) {
                out += constant_token(dst);
            } else if (visited_[ed.dst]) {
                out += names_[ed.dst];
            } else {
                emit_node(ed.dst, depth + 1, out);
            }
        }
        for (std::size_t e : g_.in_edges(u)) {
            if (used_[e]) continue;
            const auto& ed = g_.edge(e);
            if (ed.src == u || visited_[ed.src]) continue; // consumed by its source later
            used_[e] = 1;
            indent(depth + 1, out);
            out += role_token(ed.label, true) + " ";
            emit_node(ed.src, depth + 1, out);
        }
        out += ")";
    }

    void indent(int depth, std::string& out) {
        out += "\n";
        out.append(static_cast<std::size_t>(depth) * 4, ' ');
    }

    const LabeledGraph& g_;
    std::vector<char> visited_;
    std::vector<char> used_;
    std::vector<std::string> names_;
};

} // namespace detail

/// Serialize a rooted, connected graph to canonical PENMAN text. Edges are
/// emitted in insertion order; an edge is inverted (role + "-of") only when
/// a node is reachable from the root no other way. parse(serialize(g)) is
/// isomorphic to g (Smatch 1.0) and a second serialization is byte-stable.
inline std::string serialize_penman(const LabeledGraph& g, const PenmanOptions& = {}) {
    if (!g.rooted())
        throw Error(errc::not_rooted, "cannot serialize a graph without a root");
    if (g.node(*g.root()).constant)
        throw Error(errc::not_rooted, "root is a constant node");
    if (!g.is_connected())
        throw Error(errc::disconnected, "cannot serialize a disconnected graph");
    detail::Serializer s(g);
    return s.run();
}

struct CorpusEntry {
    std::vector<std::pair<std::string, std::string>> metadata; // "# ::key value" lines in order
    LabeledGraph graph;
    std::size_t ordinal = 0;

    std::optional<std::string> meta(const std::string& key) const {
        for (const auto& [k, v] : metadata)
            if (k == key) return v;
        return std::nullopt;
    }
    std::optional<std::string> id() const { return meta("id"); }
};

struct Corpus {
    std::vector<CorpusEntry> entries;
    std::string source;
    std::vector<std::pair<std::size_t, std::string>> skipped; // non-strict parse failures

    std::size_t size() const { return entries.size(); }
};

struct ReadOptions {
    PenmanOptions penman;
    bool strict = true; // abort on a bad entry instead of skipping it
};

namespace detail {

struct RawBlock {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::string text;
    std::size_t ordinal;
};

inline std::vector<RawBlock> split_blocks(std::string_view text) {
    std::vector<RawBlock> blocks;
    RawBlock cur;
    cur.ordinal = 0;
    bool in_block = false;
    std::size_t start = 0;
    auto flush = [&]() {
        if (!in_block) return;
        blocks.push_back(cur);
        cur = RawBlock{};
        cur.ordinal = blocks.size();
        in_block = false;
    };
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string_view line = text.substr(
            start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        bool blank = line.find_first_not_of(" \t") == std::string_view::npos;
        if (blank) {
            flush();
        } else if (line.rfind("# ::", 0) == 0) {
            in_block = true;
            std::string_view rest = line.substr(4);
            std::size_t sp = rest.find_first_of(" \t");
            std::string key(rest.substr(0, sp));
            std::string value;
            if (sp != std::string_view::npos)
                value = std::string(rest.substr(rest.find_first_not_of(" \t", sp)));
            cur.metadata.emplace_back(std::move(key), std::move(value));
        } else if (!line.empty() && line[0] == '#') {
            // plain comment, ignore
        } else {
            in_block = true;
            cur.text.append(line);
            cur.text.push_back('\n');
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    flush();
    return blocks;
}

} // namespace detail

/// Parse a blank-line-separated corpus of PENMAN blocks, each optionally
/// preceded by "# ::key value" metadata lines.
inline Corpus read_corpus_text(std::string_view text, const std::string& source = "<string>",
                               const ReadOptions& opts = {}) {
    Corpus corpus;
    corpus.source = source;
    for (auto& block : detail::split_blocks(text)) {
        std::string entry_id = "?";
        for (const auto& [k, v] : block.metadata)
            if (k == "id") entry_id = v;
        std::unordered_set<std::string> keys;
        try {
            for (const auto& [k, v] : block.metadata)
                if (!keys.insert(k).second)
                    throw Error(errc::syntax_error, "duplicate metadata key '" + k + "'");
            if (block.text.empty())
                throw Error(errc::syntax_error, "metadata block without a graph");
            CorpusEntry entry{block.metadata, parse_penman(block.text, opts.penman),
                              corpus.entries.size()};
            corpus.entries.push_back(std::move(entry));
        } catch (const Error& e) {
            std::string msg = source + ": entry #" + std::to_string(block.ordinal) +
                              " (id=" + entry_id + "): " + e.what();
            if (opts.strict) throw Error(e.code(), msg);
            corpus.skipped.emplace_back(block.ordinal, msg);
        }
    }
    return corpus;
}

inline Corpus read_corpus(const std::string& path, const ReadOptions& opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::io_error, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_corpus_text(buf.str(), path, opts);
}

inline std::string corpus_to_text(const Corpus& corpus, const PenmanOptions& opts = {}) {
    std::string out;
    for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
        const auto& entry = corpus.entries[i];
        for (const auto& [k, v] : entry.metadata) {
            out += "# ::" + k;
            if (!v.empty()) out += " " + v;
            out += "\n";
        }
        out += serialize_penman(entry.graph, opts);
        out += "\n";
        if (i + 1 < corpus.entries.size()) out += "\n";
    }
    return out;
}

inline void write_corpus(const std::string& path, const Corpus& corpus,
                         const PenmanOptions& opts = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io_error, "cannot open '" + path + "' for writing");
    out << corpus_to_text(corpus, opts);
    if (!out) throw Error(errc::io_error, "write to '" + path + "' failed");
}

/*
 * Alignment of parallel corpora. When every entry of every corpus carries a
 * ::id, entries are aligned by id in the order of the first corpus and any
 * mismatch is a hard error; otherwise alignment is by ordinal and lengths
 * must agree. Silent misalignment would corrupt every downstream vote.
 */
inline std::vector<std::vector<const CorpusEntry*>>
align_corpora(const std::vector<const Corpus*>& corpora) {
    if (corpora.empty()) throw Error(errc::empty_collection, "no corpora to align");
    bool all_ids = true;
    for (const Corpus* c : corpora)
        for (const auto& e : c->entries)
            if (!e.id()) { all_ids = false; break; }
    std::vector<std::vector<const CorpusEntry*>> rows;
    if (all_ids) {
        std::vector<std::unordered_map<std::string, const CorpusEntry*>> maps;
        for (const Corpus* c : corpora) {
            std::unordered_map<std::string, const CorpusEntry*> m;
            for (const auto& e : c->entries) {
                if (!m.emplace(*e.id(), &e).second)
                    throw Error(errc::id_mismatch,
                                c->source + ": duplicate ::id '" + *e.id() + "'");
            }
            if (m.size() != corpora[0]->entries.size())
                throw Error(errc::length_mismatch,
                            c->source + ": has " + std::to_string(m.size()) +
                                " entries, expected " +
                                std::to_string(corpora[0]->entries.size()));
            maps.push_back(std::move(m));
        }
        for (const auto& e : corpora[0]->entries) {
            std::vector<const CorpusEntry*> row;
            row.push_back(&e);
            for (std::size_t k = 1; k < corpora.size(); ++k) {
                auto it = maps[k].find(*e.id());
                if (it == maps[k].end())
                    throw Error(errc::id_mismatch,
                                corpora[k]->source + ": missing ::id '" + *e.id() + "'");
                row.push_back(it->second);
            }
            rows.push_back(std::move(row));
        }
    } else {
        for (const Corpus* c : corpora)
            if (c->entries.size() != corpora[0]->entries.size())
                throw Error(errc::length_mismatch,
                            c->source + ": has " + std::to_string(c->entries.size()) +
                                " entries, expected " +
                                std::to_string(corpora[0]->entries.size()));
        for (std::size_t i = 0; i < corpora[0]->entries.size(); ++i) {
            std::vector<const CorpusEntry*> row;
            for (const Corpus* c : corpora) row.push_back(&c->entries[i]);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace graphene
