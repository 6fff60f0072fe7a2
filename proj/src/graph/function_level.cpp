// Function-level graphs: AST, control flow and reaching-definition data flow.

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "repograph/graph/builder.hpp"
#include "syntax_util.hpp"

namespace repograph {

using syntax::kNone;
using syntax::NodeIndex;
using syntax::SyntaxKind;
using syntax::SyntaxTree;

namespace {

using detail::is_capitalized_callee;
using detail::param_name;
using detail::type_names;

std::size_t header_end_of(const syntax::SyntaxNode& n) {
    return n.header_end != 0 ? n.header_end : n.span.end;
}

std::string header_text(const SyntaxTree& t, NodeIndex i) {
    const auto& n = t.at(i);
    const auto end = header_end_of(n);
    return std::string(t.source().substr(n.span.begin, end - n.span.begin));
}

std::uint32_t header_line_end(const SyntaxTree& t, NodeIndex i) {
    const auto& n = t.at(i);
    if (n.header_end == 0) return n.span.line_end;
    const auto text = t.source().substr(n.span.begin, n.header_end - n.span.begin);
    return n.span.line_begin +
           static_cast<std::uint32_t>(std::count(text.begin(), text.end(), '\n'));
}

// ---------------------------------------------------------------------------------------
// Control flow

struct Cfg {
    static constexpr int kEntry = 0;
    static constexpr int kExit = 1;

    struct Block {
        std::vector<NodeIndex> stmts;
    };
    struct Edge {
        int from;
        int to;
        std::string label;
    };

    std::vector<Block> blocks{Block{}, Block{}};
    std::vector<Edge> edges;
};

class CfgBuilder {
public:
    explicit CfgBuilder(const SyntaxTree& t) : t_(t) {}

    Cfg build(const std::vector<NodeIndex>& body) {
        pending_ = {{Cfg::kEntry, ""}};
        seq(body);
        close();
        connect_pending(Cfg::kExit);
        return std::move(cfg_);
    }

private:
    struct Pending {
        int block;
        std::string label;
    };
    struct Loop {
        int header;
        std::vector<Pending> breaks;
    };

    bool reachable() const { return open_ != -1 || !pending_.empty(); }

    int new_block() {
        cfg_.blocks.emplace_back();
        return static_cast<int>(cfg_.blocks.size() - 1);
    }

    void connect_pending(int to) {
        for (auto& p : pending_) cfg_.edges.push_back({p.block, to, std::move(p.label)});
        pending_.clear();
    }

    void place(NodeIndex s) {
        if (open_ == -1) {
            open_ = new_block();
            connect_pending(open_);
        }
        cfg_.blocks[static_cast<std::size_t>(open_)].stmts.push_back(s);
    }

    void close() {
        if (open_ != -1) {
            pending_.push_back({open_, ""});
            open_ = -1;
        }
    }

    void jump(int to, std::string label) {
        cfg_.edges.push_back({open_, to, std::move(label)});
        open_ = -1;
    }

    void seq(const std::vector<NodeIndex>& stmts) {
        for (auto s : stmts) {
            if (!reachable()) break;
            stmt(s);
        }
    }

    void stmt(NodeIndex s) {
        const auto& n = t_.at(s);
        switch (n.kind) {
            case SyntaxKind::Pass:
                return;
            case SyntaxKind::Return:
            case SyntaxKind::Raise:
                place(s);
                jump(Cfg::kExit, n.kind == SyntaxKind::Return ? "return" : "raise");
                return;
            case SyntaxKind::Break:
                place(s);
                if (loops_.empty()) {
                    jump(Cfg::kExit, "break");
                } else {
                    loops_.back().breaks.push_back({open_, "break"});
                    open_ = -1;
                }
                return;
            case SyntaxKind::Continue:
                place(s);
                jump(loops_.empty() ? Cfg::kExit : loops_.back().header, "continue");
                return;
            case SyntaxKind::If: {
                place(s);
                const int head = open_;
                open_ = -1;
                pending_ = {{head, "True"}};
                seq(n.body);
                close();
                auto then_pending = std::move(pending_);
                pending_ = {{head, "False"}};
                seq(n.orelse);
                close();
                for (auto& p : then_pending) pending_.push_back(std::move(p));
                return;
            }
            case SyntaxKind::While:
            case SyntaxKind::For: {
                close();
                place(s);
                const int head = open_;
                open_ = -1;
                loops_.push_back({head, {}});
                pending_ = {{head, "True"}};
                seq(n.body);
                close();
                connect_pending(head);
                auto loop = std::move(loops_.back());
                loops_.pop_back();
                pending_ = {{head, "False"}};
                seq(n.orelse);
                close();
                for (auto& p : loop.breaks) pending_.push_back(std::move(p));
                return;
            }
            case SyntaxKind::Try: {
                place(s);
                const int head = open_;
                open_ = -1;
                pending_ = {{head, "try"}};
                seq(n.body);
                close();
                auto body_pending = std::move(pending_);
                std::vector<Pending> handler_pending;
                for (auto h : n.handlers) {
                    pending_ = {{head, "except"}};
                    place(h);
                    seq(t_.at(h).body);
                    close();
                    for (auto& p : pending_) handler_pending.push_back(std::move(p));
                }
                pending_ = std::move(body_pending);
                seq(n.orelse);
                close();
                for (auto& p : handler_pending) pending_.push_back(std::move(p));
                seq(n.finalbody);
                close();
                return;
            }
            case SyntaxKind::With:
                place(s);
                seq(n.body);
                return;
            default:
                place(s);
                return;
        }
    }

    const SyntaxTree& t_;
    Cfg cfg_;
    int open_ = -1;
    std::vector<Pending> pending_;
    std::vector<Loop> loops_;
};

// ---------------------------------------------------------------------------------------
// Definitions and uses

struct Occurrence {
    bool is_def = false;
    std::string name;
    NodeIndex node = kNone;
};

/// Extracts def/use occurrences in evaluation order. When `locals` is null every
/// name counts (used to discover the local set).
class EffectCollector {
public:
    EffectCollector(const SyntaxTree& t, const std::set<std::string>* locals)
        : t_(t), locals_(locals) {}

    std::vector<Occurrence> statement(NodeIndex s) {
        out_.clear();
        const auto& n = t_.at(s);
        switch (n.kind) {
            case SyntaxKind::Assign:
                use(n.value, {});
                for (auto tgt : n.targets) target(tgt, {});
                break;
            case SyntaxKind::AugAssign: {
                const auto tgt = n.targets.front();
                if (t_.at(tgt).kind == SyntaxKind::Name) {
                    add(false, t_.at(tgt).name, tgt);
                    use(n.value, {});
                    add(true, t_.at(tgt).name, tgt);
                } else {
                    use(tgt, {});
                    use(n.value, {});
                }
                break;
            }
            case SyntaxKind::AnnAssign:
                if (n.value != kNone) {
                    use(n.value, {});
                    target(n.targets.front(), {});
                } else if (t_.at(n.targets.front()).kind != SyntaxKind::Name) {
                    use(n.targets.front(), {});
                }
                break;
            case SyntaxKind::ExprStmt:
            case SyntaxKind::Return:
                use(n.value, {});
                break;
            case SyntaxKind::Raise:
                use(n.value, {});
                for (auto a : n.args) use(a, {});
                break;
            case SyntaxKind::Assert:
                use(n.test, {});
                use(n.value, {});
                break;
            case SyntaxKind::Delete:
                for (auto tgt : n.targets) use(tgt, {});
                break;
            case SyntaxKind::If:
            case SyntaxKind::While:
                use(n.test, {});
                break;
            case SyntaxKind::For:
                use(n.value, {});
                for (auto tgt : n.targets) target(tgt, {});
                break;
            case SyntaxKind::With:
                for (auto item : n.args) {
                    use(t_.at(item).value, {});
                    for (auto tgt : t_.at(item).targets) target(tgt, {});
                }
                break;
            case SyntaxKind::ExceptHandler:
                use(n.test, {});
                if (!n.name.empty()) add(true, n.name, s);
                break;
            case SyntaxKind::Import:
                for (auto a : n.args) {
                    const auto& alias = t_.at(a);
                    const auto local = alias.text.empty()
                                           ? alias.name.substr(0, alias.name.find('.'))
                                           : alias.text;
                    add(true, local, a);
                }
                break;
            case SyntaxKind::ImportFrom:
                for (auto a : n.args) {
                    const auto& alias = t_.at(a);
                    if (alias.name == "*") continue;
                    add(true, alias.text.empty() ? alias.name : alias.text, a);
                }
                break;
            case SyntaxKind::FunctionDef:
                for (auto d : n.decorators) use(d, {});
                for (auto p : n.args) use(t_.at(p).value, {});
                add(true, n.name, s);
                break;
            case SyntaxKind::ClassDef:
                for (auto d : n.decorators) use(d, {});
                for (auto b : n.args) use(b, {});
                add(true, n.name, s);
                break;
            default:
                break;
        }
        return std::move(out_);
    }

private:
    bool is_local(const std::string& name) const {
        return locals_ == nullptr || locals_->count(name) != 0;
    }

    void add(bool is_def, const std::string& name, NodeIndex node) {
        if (is_local(name)) out_.push_back({is_def, name, node});
    }

    void target(NodeIndex i, const std::set<std::string>& shadow) {
        if (i == kNone) return;
        const auto& n = t_.at(i);
        switch (n.kind) {
            case SyntaxKind::Name:
                if (!shadow.count(n.name)) add(true, n.name, i);
                return;
            case SyntaxKind::Tuple:
            case SyntaxKind::List:
                for (auto a : n.args) target(a, shadow);
                return;
            case SyntaxKind::Starred:
                target(n.value, shadow);
                return;
            default:
                use(i, shadow);
                return;
        }
    }

    void use(NodeIndex i, const std::set<std::string>& shadow) {
        if (i == kNone) return;
        const auto& n = t_.at(i);
        switch (n.kind) {
            case SyntaxKind::Name:
                if (!shadow.count(n.name)) add(false, n.name, i);
                return;
            case SyntaxKind::NamedExpr:
                use(n.value, shadow);
                for (auto tgt : n.targets) target(tgt, shadow);
                return;
            case SyntaxKind::Lambda: {
                auto inner = shadow;
                for (auto p : n.args) {
                    use(t_.at(p).value, shadow);
                    auto name = t_.at(p).name;
                    name.erase(0, name.find_first_not_of('*'));
                    inner.insert(name);
                }
                use(n.value, inner);
                return;
            }
            case SyntaxKind::ListComp:
            case SyntaxKind::SetComp:
            case SyntaxKind::DictComp:
            case SyntaxKind::GeneratorExp: {
                auto inner = shadow;
                bool first = true;
                for (auto a : n.args) {
                    if (t_.at(a).kind != SyntaxKind::Comprehension) continue;
                    const auto& comp = t_.at(a);
                    use(comp.value, first ? shadow : inner);
                    first = false;
                    for (auto tgt : comp.targets) bound_names(tgt, inner);
                }
                for (auto a : n.args) {
                    if (t_.at(a).kind == SyntaxKind::Comprehension) {
                        for (auto cond : t_.at(a).args) use(cond, inner);
                    } else {
                        use(a, inner);
                    }
                }
                return;
            }
            default:
                for (auto c : n.children) use(c, shadow);
                return;
        }
    }

    void bound_names(NodeIndex i, std::set<std::string>& names) {
        const auto& n = t_.at(i);
        if (n.kind == SyntaxKind::Name) names.insert(n.name);
        for (auto c : n.children) bound_names(c, names);
    }

    const SyntaxTree& t_;
    const std::set<std::string>* locals_;
    std::vector<Occurrence> out_;
};

void collect_statements(const SyntaxTree& t, const std::vector<NodeIndex>& stmts,
                        std::vector<NodeIndex>& out) {
    for (auto s : stmts) {
        out.push_back(s);
        const auto& n = t.at(s);
        if (n.kind == SyntaxKind::FunctionDef || n.kind == SyntaxKind::ClassDef) continue;
        collect_statements(t, n.body, out);
        for (auto h : n.handlers) {
            out.push_back(h);
            collect_statements(t, t.at(h).body, out);
        }
        collect_statements(t, n.orelse, out);
        collect_statements(t, n.finalbody, out);
    }
}

int nesting_depth(const SyntaxTree& t, const std::vector<NodeIndex>& stmts, int depth) {
    int best = depth;
    for (auto s : stmts) {
        const auto& n = t.at(s);
        switch (n.kind) {
            case SyntaxKind::If: {
                best = std::max(best, nesting_depth(t, n.body, depth + 1));
                // an `elif` continues the same chain rather than nesting deeper
                const bool elif = n.orelse.size() == 1 && t.at(n.orelse[0]).kind == SyntaxKind::If &&
                                  t.source().substr(t.at(n.orelse[0]).span.begin, 4) == "elif";
                best = std::max(best, nesting_depth(t, n.orelse, elif ? depth : depth + 1));
                break;
            }
            case SyntaxKind::While:
            case SyntaxKind::For:
            case SyntaxKind::With:
                best = std::max(best, nesting_depth(t, n.body, depth + 1));
                best = std::max(best, nesting_depth(t, n.orelse, depth + 1));
                break;
            case SyntaxKind::Try:
                best = std::max(best, nesting_depth(t, n.body, depth + 1));
                for (auto h : n.handlers) {
                    best = std::max(best, nesting_depth(t, t.at(h).body, depth + 1));
                }
                best = std::max(best, nesting_depth(t, n.orelse, depth + 1));
                best = std::max(best, nesting_depth(t, n.finalbody, depth + 1));
                break;
            default:
                break;
        }
    }
    return best;
}

class FunctionGraphBuilder {
public:
    FunctionGraphBuilder(const SyntaxTree& t, NodeIndex root, const std::string& ns,
                         const std::string& path, NodeId fn, const FunctionLevelOptions& opts)
        : t_(t), root_(root), ns_(ns), path_(path), opts_(opts) {
        frag_.function_id = fn;
    }

    FunctionFragment run() {
        emit_ast();
        const auto& r = t_.at(root_);
        const bool is_def = r.kind == SyntaxKind::FunctionDef;

        Cfg cfg = CfgBuilder(t_).build(r.body);
        frag_.features.cyclomatic_complexity =
            static_cast<std::uint32_t>(static_cast<long>(cfg.edges.size()) -
                                       static_cast<long>(cfg.blocks.size()) + 2);
        frag_.features.nesting_depth = static_cast<std::uint32_t>(nesting_depth(t_, r.body, 0));

        block_ids_ = emit_cfg(cfg);
        frag_.cfg_entry = block_ids_[Cfg::kEntry];
        frag_.cfg_exit = block_ids_[Cfg::kExit];
        if (opts_.emit_dfg) emit_dfg(cfg, is_def);
        if (opts_.emit_variables) emit_variables(is_def);
        frag_.graph.canonicalize();
        return std::move(frag_);
    }

private:
    NodeId ast_id(NodeIndex i) const {
        const auto& s = t_.at(i).span;
        return NodeId::derive(ns_, std::string("ast.") + syntax::kind_name(t_.at(i).kind),
                              s.begin, s.end);
    }

    void emit_ast() {
        // iterative DFS: expression trees can be deep
        std::vector<NodeIndex> stack{root_};
        frag_.ast_root = ast_id(root_);
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            const auto& n = t_.at(i);
            const auto id = ast_id(i);
            GraphNode g;
            g.id = id;
            g.node_type = syntax::is_statement(n.kind) ? NodeType::Statement : NodeType::Expression;
            g.graph_type = GraphType::Ast;
            g.kind = std::string("ast.") + syntax::kind_name(n.kind);
            g.name = n.name;
            g.code_text = std::string(t_.text_of(i));
            g.file_path = path_;
            g.line_span = {n.span.line_begin, n.span.line_end};
            frag_.graph.add_node(std::move(g));
            // nested functions own their subtree
            if (i != root_ && n.kind == SyntaxKind::FunctionDef) continue;
            for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
                frag_.graph.add_edge({id, ast_id(*it), EdgeType::AstChild, 1.0, std::nullopt});
                stack.push_back(*it);
            }
        }
    }

    std::vector<NodeId> emit_cfg(const Cfg& cfg) {
        const auto& r = t_.at(root_);
        std::vector<NodeId> ids(cfg.blocks.size());
        for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
            GraphNode g;
            g.node_type = NodeType::CfgBlock;
            g.graph_type = GraphType::Cfg;
            g.file_path = path_;
            if (b == Cfg::kEntry || b == Cfg::kExit) {
                g.kind = b == Cfg::kEntry ? "cfg.entry" : "cfg.exit";
                g.name = b == Cfg::kEntry ? "entry" : "exit";
                g.id = NodeId::derive(ns_, g.kind, r.span.begin, r.span.end);
                g.line_span = {r.span.line_begin, r.span.line_begin};
            } else {
                const auto& stmts = cfg.blocks[b].stmts;
                const auto first = stmts.front();
                const auto last = stmts.back();
                g.kind = "cfg.block";
                g.id = NodeId::derive(ns_, g.kind, t_.at(first).span.begin,
                                      header_end_of(t_.at(last)));
                g.line_span = {t_.at(first).span.line_begin, header_line_end(t_, last)};
                for (std::size_t k = 0; k < stmts.size(); ++k) {
                    if (k) g.code_text += '\n';
                    g.code_text += header_text(t_, stmts[k]);
                }
            }
            ids[b] = g.id;
            if (opts_.emit_cfg) frag_.graph.add_node(std::move(g));
        }
        if (!opts_.emit_cfg) return ids;
        for (const auto& e : cfg.edges) {
            frag_.graph.add_edge({ids[static_cast<std::size_t>(e.from)],
                                  ids[static_cast<std::size_t>(e.to)], EdgeType::ControlFlow, 1.0,
                                  e.label.empty() ? std::nullopt
                                                  : std::optional<std::string>(e.label)});
        }
        frag_.cross_edges.push_back(
            {frag_.ast_root, ids[Cfg::kEntry], EdgeType::AstToCfg, 1.0, std::nullopt});
        for (std::size_t b = 2; b < cfg.blocks.size(); ++b) {
            for (auto s : cfg.blocks[b].stmts) {
                frag_.cross_edges.push_back(
                    {ast_id(s), ids[b], EdgeType::AstToCfg, 1.0, std::nullopt});
            }
        }
        return ids;
    }

    NodeId occurrence_id(const Occurrence& o) const {
        const auto& s = t_.at(o.node).span;
        return NodeId::derive(ns_, (o.is_def ? "dfg.def:" : "dfg.use:") + o.name, s.begin, s.end);
    }

    void emit_dfg(const Cfg& cfg, bool is_def) {
        const auto& r = t_.at(root_);

        // Local names: everything bound in the body, minus global/nonlocal declarations.
        std::vector<NodeIndex> all_stmts;
        collect_statements(t_, r.body, all_stmts);
        std::set<std::string> locals;
        std::set<std::string> declared_outer;
        if (is_def) {
            for (auto p : r.args) locals.insert(param_name(t_, p));
        }
        EffectCollector discover(t_, nullptr);
        for (auto s : all_stmts) {
            const auto& n = t_.at(s);
            if (n.kind == SyntaxKind::Global || n.kind == SyntaxKind::Nonlocal) {
                for (auto tgt : n.targets) declared_outer.insert(t_.at(tgt).name);
            }
            for (const auto& o : discover.statement(s)) {
                if (o.is_def) locals.insert(o.name);
            }
        }
        for (const auto& name : declared_outer) locals.erase(name);

        // Occurrences per block, in order.
        EffectCollector effects(t_, &locals);
        std::vector<std::vector<Occurrence>> block_occ(cfg.blocks.size());
        if (is_def) {
            for (auto p : r.args) {
                block_occ[Cfg::kEntry].push_back({true, param_name(t_, p), p});
            }
        }
        for (std::size_t b = 2; b < cfg.blocks.size(); ++b) {
            for (auto s : cfg.blocks[b].stmts) {
                for (auto& o : effects.statement(s)) block_occ[b].push_back(std::move(o));
            }
        }

        // Enumerate definitions.
        struct Def {
            std::string name;
            NodeId id;
        };
        std::vector<Def> defs;
        std::vector<std::vector<std::size_t>> block_defs(cfg.blocks.size());
        for (std::size_t b = 0; b < block_occ.size(); ++b) {
            for (const auto& o : block_occ[b]) {
                if (!o.is_def) continue;
                block_defs[b].push_back(defs.size());
                defs.push_back({o.name, occurrence_id(o)});
            }
        }
        const std::size_t D = defs.size();
        using Bits = std::vector<bool>;
        auto kill_name = [&](Bits& bits, const std::string& name) {
            for (std::size_t d = 0; d < D; ++d) {
                if (bits[d] && defs[d].name == name) bits[d] = false;
            }
        };

        // Transfer per block.
        std::vector<Bits> gen(cfg.blocks.size(), Bits(D, false));
        std::vector<std::set<std::string>> killed(cfg.blocks.size());
        for (std::size_t b = 0; b < block_occ.size(); ++b) {
            std::size_t k = 0;
            for (const auto& o : block_occ[b]) {
                if (!o.is_def) continue;
                kill_name(gen[b], o.name);
                killed[b].insert(o.name);
                gen[b][block_defs[b][k++]] = true;
            }
        }
        std::vector<std::vector<int>> preds(cfg.blocks.size());
        for (const auto& e : cfg.edges) preds[static_cast<std::size_t>(e.to)].push_back(e.from);
        std::vector<Bits> in(cfg.blocks.size(), Bits(D, false)), out(cfg.blocks.size(), Bits(D, false));
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
                Bits new_in(D, false);
                for (int p : preds[b]) {
                    for (std::size_t d = 0; d < D; ++d) {
                        if (out[static_cast<std::size_t>(p)][d]) new_in[d] = true;
                    }
                }
                Bits new_out = new_in;
                for (const auto& name : killed[b]) kill_name(new_out, name);
                for (std::size_t d = 0; d < D; ++d) {
                    if (gen[b][d]) new_out[d] = true;
                }
                if (new_in != in[b] || new_out != out[b]) {
                    in[b] = std::move(new_in);
                    out[b] = std::move(new_out);
                    changed = true;
                }
            }
        }

        // Nodes and edges.
        std::map<std::string, NodeId> var_ids;
        auto var_node = [&](const std::string& name) {
            auto it = var_ids.find(name);
            if (it != var_ids.end()) return it->second;
            GraphNode g;
            g.kind = "dfg.var";
            g.id = NodeId::derive(ns_, g.kind + ":" + name, r.span.begin, r.span.end);
            g.node_type = NodeType::DfgValue;
            g.graph_type = GraphType::Dfg;
            g.name = name;
            g.code_text = name;
            g.file_path = path_;
            g.line_span = {r.span.line_begin, r.span.line_begin};
            const auto id = g.id;
            frag_.graph.add_node(std::move(g));
            var_ids.emplace(name, id);
            return id;
        };
        for (std::size_t b = 0; b < block_occ.size(); ++b) {
            Bits reach = in[b];
            std::size_t k = 0;
            for (const auto& o : block_occ[b]) {
                const auto& syn = t_.at(o.node);
                GraphNode g;
                g.id = occurrence_id(o);
                g.kind = o.is_def ? "dfg.def" : "dfg.use";
                g.node_type = NodeType::DfgValue;
                g.graph_type = GraphType::Dfg;
                g.name = o.name;
                g.code_text = o.name;
                g.file_path = path_;
                g.line_span = {syn.span.line_begin, syn.span.line_begin};
                const auto occ = g.id;
                frag_.graph.add_node(std::move(g));
                const auto var = var_node(o.name);
                frag_.cross_edges.push_back({block_ids_[b], occ, EdgeType::CfgToDfg, 1.0, std::nullopt});
                if (o.is_def) {
                    frag_.graph.add_edge({occ, var, EdgeType::Defines, 1.0, std::nullopt});
                    kill_name(reach, o.name);
                    reach[block_defs[b][k++]] = true;
                } else {
                    frag_.graph.add_edge({occ, var, EdgeType::Uses, 1.0, std::nullopt});
                    for (std::size_t d = 0; d < D; ++d) {
                        if (reach[d] && defs[d].name == o.name) {
                            frag_.graph.add_edge({defs[d].id, occ, EdgeType::DataFlow, 1.0, std::nullopt});
                        }
                    }
                }
            }
        }
        dfg_vars_ = std::move(var_ids);
    }

    void add_variable(const std::string& name, NodeIndex at, std::string semantic_type,
                      std::vector<std::string> refs, std::set<std::string>& seen) {
        if (!seen.insert(name).second) return;
        const auto& s = t_.at(at).span;
        GraphNode g;
        g.kind = "var.local";
        g.id = NodeId::derive(ns_, "var:" + name, s.begin, s.end);
        g.node_type = NodeType::Variable;
        g.graph_type = GraphType::TypeDep;
        g.name = name;
        g.code_text = std::string(t_.text_of(at));
        g.file_path = path_;
        g.line_span = {s.line_begin, s.line_end};
        g.semantic_type = std::move(semantic_type);
        const auto id = g.id;
        frag_.graph.add_node(std::move(g));
        frag_.variable_type_refs.emplace_back(id, std::move(refs));
        if (auto it = dfg_vars_.find(name); it != dfg_vars_.end()) {
            frag_.cross_edges.push_back({id, it->second, EdgeType::TypeAlignsDataflow, 1.0, std::nullopt});
        }
    }

    void emit_variables(bool is_def) {
        const auto& r = t_.at(root_);
        std::set<std::string> seen;
        if (is_def) {
            for (auto p : r.args) {
                const auto& pn = t_.at(p);
                if (pn.annotation == kNone) continue;
                std::vector<std::string> refs;
                type_names(t_, pn.annotation, refs);
                add_variable(param_name(t_, p), p, std::string(t_.text_of(pn.annotation)),
                             std::move(refs), seen);
            }
        }
        std::vector<NodeIndex> all_stmts;
        collect_statements(t_, r.body, all_stmts);
        for (auto s : all_stmts) {
            const auto& n = t_.at(s);
            if (n.kind == SyntaxKind::AnnAssign && t_.at(n.targets.front()).kind == SyntaxKind::Name) {
                std::vector<std::string> refs;
                type_names(t_, n.annotation, refs);
                add_variable(t_.at(n.targets.front()).name, n.targets.front(),
                             std::string(t_.text_of(n.annotation)), std::move(refs), seen);
            } else if (n.kind == SyntaxKind::Assign && n.targets.size() == 1 &&
                       t_.at(n.targets.front()).kind == SyntaxKind::Name &&
                       is_capitalized_callee(t_, n.value)) {
                const auto callee = t_.at(n.value).value;
                std::vector<std::string> refs;
                type_names(t_, callee, refs);
                add_variable(t_.at(n.targets.front()).name, n.targets.front(),
                             std::string(t_.text_of(callee)), std::move(refs), seen);
            }
        }
    }

    const SyntaxTree& t_;
    NodeIndex root_;
    const std::string& ns_;
    const std::string& path_;
    FunctionLevelOptions opts_;
    FunctionFragment frag_;
    std::vector<NodeId> block_ids_;
    std::map<std::string, NodeId> dfg_vars_;
};

}  // namespace

FunctionFragment build_function_level(const SyntaxTree& tree, NodeIndex root,
                                      const std::string& id_namespace,
                                      const std::string& file_path, NodeId function_id,
                                      const FunctionLevelOptions& options) {
    return FunctionGraphBuilder(tree, root, id_namespace, file_path, function_id, options).run();
}

std::string function_signature(const SyntaxTree& tree, NodeIndex def) {
    const auto& n = tree.at(def);
    std::string sig = n.text == "async" ? "async def " : "def ";
    sig += n.name + "(";
    for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) sig += ", ";
        sig += std::string(tree.text_of(n.args[i]));
    }
    sig += ")";
    if (n.annotation != kNone) sig += " -> " + std::string(tree.text_of(n.annotation));
    // keep signatures single-line
    std::string flat;
    bool space = false;
    for (char c : sig) {
        if (c == '\n' || c == '\r' || c == '\t' || c == ' ') {
            space = true;
            continue;
        }
        if (space && !flat.empty() && flat.back() != '(' && c != ')') flat += ' ';
        space = false;
        flat += c;
    }
    return flat;
}

}  // namespace repograph
