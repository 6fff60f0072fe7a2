#include <algorithm>
#include <cctype>
#include <string>

#include "repograph/frontend/frontend.hpp"
#include "repograph/frontend/python_lexer.hpp"

namespace repograph {

using syntax::kNone;
using syntax::NodeIndex;
using syntax::SyntaxError;
using syntax::SyntaxKind;
using syntax::SyntaxNode;
using python::Token;
using python::TokenKind;

namespace {

class Parser {
public:
    Parser(std::string_view src, std::vector<Token> toks) : src_(src), toks_(std::move(toks)) {}

    syntax::SyntaxTree run() {
        SyntaxNode mod;
        mod.kind = SyntaxKind::Module;
        mod.span = {0, src_.size(), 1, 1, 1};
        std::vector<NodeIndex> body;
        while (cur().kind != TokenKind::EndMarker) {
            if (cur().kind == TokenKind::Newline) {
                take();
                continue;
            }
            parse_statement(body);
        }
        mod.body = std::move(body);
        mod.span.line_end = last_line_ == 0 ? 1 : last_line_;
        const auto root = tree_.add(std::move(mod));
        tree_.set_root(root);
        tree_.finalize();
        return std::move(tree_);
    }

private:
    // ---- token helpers -------------------------------------------------------------

    const Token& cur() const { return toks_[i_]; }
    const Token& peek(std::size_t k = 1) const {
        return toks_[std::min(i_ + k, toks_.size() - 1)];
    }

    bool is_op(std::string_view op) const {
        return cur().kind == TokenKind::Op && cur().text == op;
    }
    bool is_kw(std::string_view kw) const {
        return cur().kind == TokenKind::Name && cur().text == kw;
    }

    const Token& take() {
        const Token& t = toks_[i_];
        if (t.kind != TokenKind::Newline && t.kind != TokenKind::Indent &&
            t.kind != TokenKind::Dedent && t.kind != TokenKind::EndMarker) {
            last_end_ = t.end;
            last_line_ = line_of_end(t);
        }
        if (i_ + 1 < toks_.size()) ++i_;
        return t;
    }

    std::uint32_t line_of_end(const Token& t) const {
        auto line = t.line;
        for (char ch : t.text) {
            if (ch == '\n') ++line;
        }
        return line;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        std::string got;
        switch (cur().kind) {
            case TokenKind::Newline: got = "NEWLINE"; break;
            case TokenKind::Indent: got = "INDENT"; break;
            case TokenKind::Dedent: got = "DEDENT"; break;
            case TokenKind::EndMarker: got = "EOF"; break;
            default: got = "'" + std::string(cur().text) + "'";
        }
        throw SyntaxError(msg + ", got " + got, cur().line, cur().col);
    }

    void expect_op(std::string_view op) {
        if (!is_op(op)) fail("expected '" + std::string(op) + "'");
        take();
    }
    void expect_kw(std::string_view kw) {
        if (!is_kw(kw)) fail("expected '" + std::string(kw) + "'");
        take();
    }
    void expect_newline() {
        if (cur().kind == TokenKind::Newline) {
            take();
            return;
        }
        if (cur().kind == TokenKind::EndMarker) return;
        fail("expected end of statement");
    }

    std::string expect_name() {
        if (cur().kind != TokenKind::Name || python::is_keyword(cur().text)) fail("expected name");
        return std::string(take().text);
    }

    // ---- node helpers --------------------------------------------------------------

    SyntaxNode begin_node(SyntaxKind kind, const Token& first) const {
        SyntaxNode n;
        n.kind = kind;
        n.span.begin = first.begin;
        n.span.line_begin = first.line;
        n.span.col_begin = first.col;
        return n;
    }

    NodeIndex finish(SyntaxNode n) {
        n.span.end = std::max(last_end_, n.span.begin);
        n.span.line_end = std::max(last_line_, n.span.line_begin);
        return tree_.add(std::move(n));
    }

    // Wraps an existing node's start position.
    SyntaxNode begin_at(SyntaxKind kind, NodeIndex first) const {
        SyntaxNode n;
        n.kind = kind;
        const auto& s = tree_.at(first).span;
        n.span.begin = s.begin;
        n.span.line_begin = s.line_begin;
        n.span.col_begin = s.col_begin;
        return n;
    }

    // ---- statements ----------------------------------------------------------------

    void parse_statement(std::vector<NodeIndex>& out) {
        if (cur().kind == TokenKind::Indent) fail("unexpected indent");
        if (cur().kind == TokenKind::Dedent) fail("unexpected dedent");
        if (is_op("@")) {
            out.push_back(parse_decorated());
            return;
        }
        if (is_kw("def")) {
            out.push_back(parse_funcdef(cur(), {}));
            return;
        }
        if (is_kw("async") && peek().kind == TokenKind::Name &&
            (peek().text == "def" || peek().text == "for" || peek().text == "with")) {
            const Token& first = cur();
            take();
            if (is_kw("def")) out.push_back(parse_funcdef(first, {}));
            else if (is_kw("for")) out.push_back(parse_for(first));
            else out.push_back(parse_with(first));
            return;
        }
        if (is_kw("class")) {
            out.push_back(parse_classdef(cur(), {}));
            return;
        }
        if (is_kw("if")) {
            out.push_back(parse_if());
            return;
        }
        if (is_kw("while")) {
            out.push_back(parse_while());
            return;
        }
        if (is_kw("for")) {
            out.push_back(parse_for(cur()));
            return;
        }
        if (is_kw("try")) {
            out.push_back(parse_try());
            return;
        }
        if (is_kw("with")) {
            out.push_back(parse_with(cur()));
            return;
        }
        parse_simple_line(out);
    }

    void parse_simple_line(std::vector<NodeIndex>& out) {
        out.push_back(parse_small_statement());
        while (is_op(";")) {
            take();
            if (cur().kind == TokenKind::Newline || cur().kind == TokenKind::EndMarker) break;
            out.push_back(parse_small_statement());
        }
        expect_newline();
    }

    std::vector<NodeIndex> parse_suite(std::size_t& header_end) {
        if (!is_op(":")) fail("expected ':'");
        header_end = cur().end;
        take();
        std::vector<NodeIndex> body;
        if (cur().kind == TokenKind::Newline) {
            take();
            if (cur().kind != TokenKind::Indent) fail("expected an indented block");
            take();
            while (cur().kind != TokenKind::Dedent && cur().kind != TokenKind::EndMarker) {
                if (cur().kind == TokenKind::Newline) {
                    take();
                    continue;
                }
                parse_statement(body);
            }
            if (cur().kind == TokenKind::Dedent) take();
        } else {
            parse_simple_line(body);
        }
        return body;
    }

    std::vector<NodeIndex> parse_suite() {
        std::size_t ignored = 0;
        return parse_suite(ignored);
    }

    NodeIndex parse_decorated() {
        const Token& first = cur();
        std::vector<NodeIndex> decorators;
        while (is_op("@")) {
            auto d = begin_node(SyntaxKind::Decorator, cur());
            take();
            d.value = parse_namedexpr_test();
            decorators.push_back(finish(std::move(d)));
            expect_newline();
        }
        if (is_kw("def")) return parse_funcdef(first, std::move(decorators));
        if (is_kw("async") && peek().text == "def") {
            take();
            return parse_funcdef(first, std::move(decorators));
        }
        if (is_kw("class")) return parse_classdef(first, std::move(decorators));
        fail("expected 'def' or 'class' after decorator");
    }

    NodeIndex parse_funcdef(const Token& first, std::vector<NodeIndex> decorators) {
        auto n = begin_node(SyntaxKind::FunctionDef, first);
        n.text = first.text == "async" ? "async" : "";
        expect_kw("def");
        n.name = expect_name();
        n.decorators = std::move(decorators);
        expect_op("(");
        n.args = parse_params(")", true);
        expect_op(")");
        if (is_op("->")) {
            take();
            n.annotation = parse_test();
        }
        n.body = parse_suite(n.header_end);
        return finish(std::move(n));
    }

    std::vector<NodeIndex> parse_params(std::string_view closer, bool annotations) {
        std::vector<NodeIndex> params;
        while (!is_op(closer)) {
            auto p = begin_node(SyntaxKind::Param, cur());
            if (is_op("/")) {
                take();
            } else if (is_op("*") || is_op("**")) {
                const std::string star(take().text);
                if (cur().kind == TokenKind::Name && !python::is_keyword(cur().text)) {
                    p.name = star + expect_name();
                    if (annotations && is_op(":")) {
                        take();
                        p.annotation = parse_test();
                    }
                    params.push_back(finish(std::move(p)));
                }
            } else {
                p.name = expect_name();
                if (annotations && is_op(":")) {
                    take();
                    p.annotation = parse_test();
                }
                if (is_op("=")) {
                    take();
                    p.value = parse_test();
                }
                params.push_back(finish(std::move(p)));
            }
            if (!is_op(",")) break;
            take();
        }
        return params;
    }

    NodeIndex parse_classdef(const Token& first, std::vector<NodeIndex> decorators) {
        auto n = begin_node(SyntaxKind::ClassDef, first);
        expect_kw("class");
        n.name = expect_name();
        n.decorators = std::move(decorators);
        if (is_op("(")) {
            take();
            n.args = parse_arglist();
            expect_op(")");
        }
        n.body = parse_suite(n.header_end);
        return finish(std::move(n));
    }

    NodeIndex parse_if() {
        auto n = begin_node(SyntaxKind::If, cur());
        take();  // if / elif
        n.test = parse_namedexpr_test();
        n.body = parse_suite(n.header_end);
        if (is_kw("elif")) {
            n.orelse.push_back(parse_if());
        } else if (is_kw("else")) {
            take();
            n.orelse = parse_suite();
        }
        return finish(std::move(n));
    }

    NodeIndex parse_while() {
        auto n = begin_node(SyntaxKind::While, cur());
        take();
        n.test = parse_namedexpr_test();
        n.body = parse_suite(n.header_end);
        if (is_kw("else")) {
            take();
            n.orelse = parse_suite();
        }
        return finish(std::move(n));
    }

    NodeIndex parse_for(const Token& first) {
        auto n = begin_node(SyntaxKind::For, first);
        expect_kw("for");
        n.targets.push_back(parse_target_list());
        expect_kw("in");
        n.value = parse_testlist_star();
        n.body = parse_suite(n.header_end);
        if (is_kw("else")) {
            take();
            n.orelse = parse_suite();
        }
        return finish(std::move(n));
    }

    NodeIndex parse_try() {
        auto n = begin_node(SyntaxKind::Try, cur());
        take();
        n.body = parse_suite(n.header_end);
        while (is_kw("except")) {
            auto h = begin_node(SyntaxKind::ExceptHandler, cur());
            take();
            if (is_op("*")) take();
            if (!is_op(":")) {
                h.test = parse_test();
                if (is_op(",")) {
                    // Python 2 style "except A, e" is rejected like CPython 3 does
                    fail("multiple exception types must be parenthesized");
                }
                if (is_kw("as")) {
                    take();
                    h.name = expect_name();
                }
            }
            h.body = parse_suite(h.header_end);
            n.handlers.push_back(finish(std::move(h)));
        }
        if (is_kw("else")) {
            take();
            n.orelse = parse_suite();
        }
        if (is_kw("finally")) {
            take();
            n.finalbody = parse_suite();
        }
        if (n.handlers.empty() && n.finalbody.empty()) fail("expected 'except' or 'finally' block");
        return finish(std::move(n));
    }

    NodeIndex parse_with_item() {
        auto item = begin_node(SyntaxKind::WithItem, cur());
        item.value = parse_test();
        if (is_kw("as")) {
            take();
            item.targets.push_back(parse_target());
        }
        return finish(std::move(item));
    }

    NodeIndex parse_with(const Token& first) {
        auto n = begin_node(SyntaxKind::With, first);
        expect_kw("with");
        bool parsed = false;
        if (is_op("(")) {
            // Parenthesized item list; fall back to a plain expression on failure.
            const auto saved_i = i_;
            const auto saved_end = last_end_;
            const auto saved_line = last_line_;
            const auto saved_size = tree_.size();
            try {
                take();
                std::vector<NodeIndex> items;
                while (!is_op(")")) {
                    items.push_back(parse_with_item());
                    if (!is_op(",")) break;
                    take();
                }
                expect_op(")");
                if (!is_op(":")) fail("expected ':'");
                n.args = std::move(items);
                parsed = true;
            } catch (const SyntaxError&) {
                i_ = saved_i;
                last_end_ = saved_end;
                last_line_ = saved_line;
                truncate_tree(saved_size);
            }
        }
        if (!parsed) {
            n.args.push_back(parse_with_item());
            while (is_op(",")) {
                take();
                n.args.push_back(parse_with_item());
            }
        }
        n.body = parse_suite(n.header_end);
        return finish(std::move(n));
    }

    void truncate_tree(std::size_t size) {
        syntax::SyntaxTree fresh;
        for (std::size_t k = 0; k < size; ++k) fresh.add(tree_.at(static_cast<NodeIndex>(k)));
        tree_ = std::move(fresh);
    }

    NodeIndex parse_small_statement() {
        const Token& first = cur();
        if (is_kw("pass") || is_kw("break") || is_kw("continue")) {
            auto n = begin_node(first.text == "pass"    ? SyntaxKind::Pass
                                : first.text == "break" ? SyntaxKind::Break
                                                        : SyntaxKind::Continue,
                                first);
            take();
            return finish(std::move(n));
        }
        if (is_kw("return")) {
            auto n = begin_node(SyntaxKind::Return, first);
            take();
            if (!at_statement_end()) n.value = parse_testlist_star();
            return finish(std::move(n));
        }
        if (is_kw("raise")) {
            auto n = begin_node(SyntaxKind::Raise, first);
            take();
            if (!at_statement_end()) {
                n.value = parse_test();
                if (is_kw("from")) {
                    take();
                    n.args.push_back(parse_test());
                }
            }
            return finish(std::move(n));
        }
        if (is_kw("global") || is_kw("nonlocal")) {
            auto n = begin_node(first.text == "global" ? SyntaxKind::Global : SyntaxKind::Nonlocal,
                                first);
            take();
            do {
                if (is_op(",")) take();
                auto nm = begin_node(SyntaxKind::Name, cur());
                nm.name = expect_name();
                n.targets.push_back(finish(std::move(nm)));
            } while (is_op(","));
            return finish(std::move(n));
        }
        if (is_kw("del")) {
            auto n = begin_node(SyntaxKind::Delete, first);
            take();
            n.targets.push_back(parse_target_list());
            return finish(std::move(n));
        }
        if (is_kw("assert")) {
            auto n = begin_node(SyntaxKind::Assert, first);
            take();
            n.test = parse_test();
            if (is_op(",")) {
                take();
                n.value = parse_test();
            }
            return finish(std::move(n));
        }
        if (is_kw("import")) return parse_import();
        if (is_kw("from")) return parse_from_import();
        return parse_expr_statement();
    }

    bool at_statement_end() const {
        return cur().kind == TokenKind::Newline || cur().kind == TokenKind::EndMarker || is_op(";");
    }

    std::string parse_dotted_name() {
        std::string name = expect_name();
        while (is_op(".")) {
            take();
            name += "." + expect_name();
        }
        return name;
    }

    NodeIndex parse_import() {
        auto n = begin_node(SyntaxKind::Import, cur());
        take();
        do {
            if (is_op(",")) take();
            auto a = begin_node(SyntaxKind::Alias, cur());
            a.name = parse_dotted_name();
            if (is_kw("as")) {
                take();
                a.text = expect_name();
            }
            n.args.push_back(finish(std::move(a)));
        } while (is_op(","));
        return finish(std::move(n));
    }

    NodeIndex parse_from_import() {
        auto n = begin_node(SyntaxKind::ImportFrom, cur());
        take();
        std::string module;
        while (is_op(".") || is_op("...")) module += std::string(take().text);
        if (!is_kw("import")) module += parse_dotted_name();
        n.name = module;
        expect_kw("import");
        const bool paren = is_op("(");
        if (paren) take();
        if (is_op("*")) {
            auto a = begin_node(SyntaxKind::Alias, cur());
            take();
            a.name = "*";
            n.args.push_back(finish(std::move(a)));
        } else {
            while (true) {
                auto a = begin_node(SyntaxKind::Alias, cur());
                a.name = expect_name();
                if (is_kw("as")) {
                    take();
                    a.text = expect_name();
                }
                n.args.push_back(finish(std::move(a)));
                if (!is_op(",")) break;
                take();
                if (paren && is_op(")")) break;
            }
        }
        if (paren) expect_op(")");
        return finish(std::move(n));
    }

    static bool is_augassign(std::string_view t) {
        static constexpr std::string_view ops[] = {"+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                                   ">>=", "<<=", "&=", "|=", "^=", "@="};
        return std::find(std::begin(ops), std::end(ops), t) != std::end(ops);
    }

    NodeIndex parse_expr_statement() {
        const Token& first = cur();
        NodeIndex lhs = is_kw("yield") ? parse_yield() : parse_testlist_star();
        if (is_op(":")) {
            auto n = begin_node(SyntaxKind::AnnAssign, first);
            take();
            n.targets.push_back(lhs);
            n.annotation = parse_test();
            if (is_op("=")) {
                take();
                n.value = is_kw("yield") ? parse_yield() : parse_testlist_star();
            }
            return finish(std::move(n));
        }
        if (cur().kind == TokenKind::Op && is_augassign(cur().text)) {
            auto n = begin_node(SyntaxKind::AugAssign, first);
            n.name = std::string(take().text);
            n.targets.push_back(lhs);
            n.value = is_kw("yield") ? parse_yield() : parse_testlist_star();
            return finish(std::move(n));
        }
        if (is_op("=")) {
            auto n = begin_node(SyntaxKind::Assign, first);
            std::vector<NodeIndex> chain{lhs};
            while (is_op("=")) {
                take();
                chain.push_back(is_kw("yield") ? parse_yield() : parse_testlist_star());
            }
            n.value = chain.back();
            chain.pop_back();
            n.targets = std::move(chain);
            return finish(std::move(n));
        }
        auto n = begin_node(SyntaxKind::ExprStmt, first);
        n.value = lhs;
        return finish(std::move(n));
    }

    // ---- expressions ---------------------------------------------------------------

    NodeIndex parse_yield() {
        const Token& first = cur();
        expect_kw("yield");
        if (is_kw("from")) {
            auto n = begin_node(SyntaxKind::YieldFrom, first);
            take();
            n.value = parse_test();
            return finish(std::move(n));
        }
        auto n = begin_node(SyntaxKind::Yield, first);
        if (!at_statement_end() && !is_op(")") && !is_op("=")) n.value = parse_testlist_star();
        return finish(std::move(n));
    }

    // Comma-separated list of (star) expressions; returns a Tuple if there is a comma.
    NodeIndex parse_testlist_star() {
        const Token& first = cur();
        NodeIndex e = parse_star_or_namedexpr();
        if (!is_op(",")) return e;
        auto t = begin_node(SyntaxKind::Tuple, first);
        t.args.push_back(e);
        while (is_op(",")) {
            take();
            if (at_expression_end()) break;
            t.args.push_back(parse_star_or_namedexpr());
        }
        return finish(std::move(t));
    }

    bool at_expression_end() const {
        if (at_statement_end()) return true;
        if (cur().kind == TokenKind::Op) {
            const auto t = cur().text;
            return t == ")" || t == "]" || t == "}" || t == "=" || t == ":" || is_augassign(t);
        }
        return cur().kind == TokenKind::Name && (cur().text == "in" || cur().text == "for");
    }

    NodeIndex parse_star_or_namedexpr() {
        if (is_op("*")) {
            auto s = begin_node(SyntaxKind::Starred, cur());
            take();
            s.value = parse_bitor();
            return finish(std::move(s));
        }
        return parse_namedexpr_test();
    }

    NodeIndex parse_target() {
        if (is_op("*")) {
            auto s = begin_node(SyntaxKind::Starred, cur());
            take();
            s.value = parse_bitor();
            return finish(std::move(s));
        }
        return parse_bitor();
    }

    NodeIndex parse_target_list() {
        const Token& first = cur();
        NodeIndex e = parse_target();
        if (!is_op(",")) return e;
        auto t = begin_node(SyntaxKind::Tuple, first);
        t.args.push_back(e);
        while (is_op(",")) {
            take();
            if (is_kw("in") || is_op("=") || at_statement_end()) break;
            t.args.push_back(parse_target());
        }
        return finish(std::move(t));
    }

    NodeIndex parse_namedexpr_test() {
        if (cur().kind == TokenKind::Name && peek().kind == TokenKind::Op && peek().text == ":=") {
            auto n = begin_node(SyntaxKind::NamedExpr, cur());
            auto nm = begin_node(SyntaxKind::Name, cur());
            nm.name = expect_name();
            n.targets.push_back(finish(std::move(nm)));
            take();
            n.value = parse_test();
            return finish(std::move(n));
        }
        return parse_test();
    }

    NodeIndex parse_test() {
        if (is_kw("lambda")) return parse_lambda();
        const Token& first = cur();
        NodeIndex e = parse_or_test();
        if (is_kw("if")) {
            auto n = begin_node(SyntaxKind::IfExp, first);
            take();
            n.test = parse_or_test();
            expect_kw("else");
            NodeIndex orelse = parse_test();
            n.args = {e, orelse};
            return finish(std::move(n));
        }
        return e;
    }

    NodeIndex parse_test_nocond() {
        if (is_kw("lambda")) return parse_lambda();
        return parse_or_test();
    }

    NodeIndex parse_lambda() {
        auto n = begin_node(SyntaxKind::Lambda, cur());
        take();
        n.args = parse_params(":", false);
        expect_op(":");
        n.value = parse_test();
        return finish(std::move(n));
    }

    NodeIndex parse_or_test() {
        const Token& first = cur();
        NodeIndex e = parse_and_test();
        if (!is_kw("or")) return e;
        auto n = begin_node(SyntaxKind::BoolOp, first);
        n.name = "or";
        n.args.push_back(e);
        while (is_kw("or")) {
            take();
            n.args.push_back(parse_and_test());
        }
        return finish(std::move(n));
    }

    NodeIndex parse_and_test() {
        const Token& first = cur();
        NodeIndex e = parse_not_test();
        if (!is_kw("and")) return e;
        auto n = begin_node(SyntaxKind::BoolOp, first);
        n.name = "and";
        n.args.push_back(e);
        while (is_kw("and")) {
            take();
            n.args.push_back(parse_not_test());
        }
        return finish(std::move(n));
    }

    NodeIndex parse_not_test() {
        if (is_kw("not")) {
            auto n = begin_node(SyntaxKind::UnaryOp, cur());
            take();
            n.name = "not";
            n.value = parse_not_test();
            return finish(std::move(n));
        }
        return parse_comparison();
    }

    bool at_comp_op() const {
        if (cur().kind == TokenKind::Op) {
            const auto t = cur().text;
            return t == "<" || t == ">" || t == "==" || t == ">=" || t == "<=" || t == "!=";
        }
        if (is_kw("in") || is_kw("is")) return true;
        return is_kw("not") && peek().kind == TokenKind::Name && peek().text == "in";
    }

    NodeIndex parse_comparison() {
        const Token& first = cur();
        NodeIndex e = parse_bitor();
        if (!at_comp_op()) return e;
        auto n = begin_node(SyntaxKind::Compare, first);
        n.args.push_back(e);
        while (at_comp_op()) {
            std::string op(take().text);
            if (op == "not") {
                take();
                op = "not in";
            } else if (op == "is" && is_kw("not")) {
                take();
                op = "is not";
            }
            if (!n.text.empty()) n.text += " ";
            n.text += op;
            n.args.push_back(parse_bitor());
        }
        return finish(std::move(n));
    }

    template <typename Next>
    NodeIndex parse_binary(std::initializer_list<std::string_view> ops, Next next) {
        const Token& first = cur();
        NodeIndex lhs = (this->*next)();
        while (cur().kind == TokenKind::Op &&
               std::find(ops.begin(), ops.end(), cur().text) != ops.end()) {
            auto n = begin_node(SyntaxKind::BinOp, first);
            n.name = std::string(take().text);
            NodeIndex rhs = (this->*next)();
            n.args = {lhs, rhs};
            lhs = finish(std::move(n));
        }
        return lhs;
    }

    NodeIndex parse_bitor() { return parse_binary({"|"}, &Parser::parse_xor); }
    NodeIndex parse_xor() { return parse_binary({"^"}, &Parser::parse_bitand); }
    NodeIndex parse_bitand() { return parse_binary({"&"}, &Parser::parse_shift); }
    NodeIndex parse_shift() { return parse_binary({"<<", ">>"}, &Parser::parse_arith); }
    NodeIndex parse_arith() { return parse_binary({"+", "-"}, &Parser::parse_term); }
    NodeIndex parse_term() {
        return parse_binary({"*", "/", "//", "%", "@"}, &Parser::parse_factor);
    }

    NodeIndex parse_factor() {
        if (is_op("+") || is_op("-") || is_op("~")) {
            auto n = begin_node(SyntaxKind::UnaryOp, cur());
            n.name = std::string(take().text);
            n.value = parse_factor();
            return finish(std::move(n));
        }
        return parse_power();
    }

    NodeIndex parse_power() {
        const Token& first = cur();
        NodeIndex base;
        if (is_kw("await")) {
            auto n = begin_node(SyntaxKind::Await, cur());
            take();
            n.value = parse_primary();
            base = finish(std::move(n));
        } else {
            base = parse_primary();
        }
        if (is_op("**")) {
            auto n = begin_node(SyntaxKind::BinOp, first);
            n.name = std::string(take().text);
            NodeIndex rhs = parse_factor();
            n.args = {base, rhs};
            return finish(std::move(n));
        }
        return base;
    }

    NodeIndex parse_primary() {
        const Token& first = cur();
        NodeIndex e = parse_atom();
        while (true) {
            if (is_op(".")) {
                auto n = begin_node(SyntaxKind::Attribute, first);
                take();
                n.value = e;
                n.name = expect_name();
                e = finish(std::move(n));
            } else if (is_op("(")) {
                auto n = begin_node(SyntaxKind::Call, first);
                take();
                n.value = e;
                n.args = parse_arglist();
                expect_op(")");
                e = finish(std::move(n));
            } else if (is_op("[")) {
                auto n = begin_node(SyntaxKind::Subscript, first);
                take();
                n.value = e;
                n.args.push_back(parse_subscript_list());
                expect_op("]");
                e = finish(std::move(n));
            } else {
                return e;
            }
        }
    }

    std::vector<NodeIndex> parse_arglist() {
        std::vector<NodeIndex> args;
        while (!is_op(")")) {
            if (is_op("*")) {
                auto s = begin_node(SyntaxKind::Starred, cur());
                take();
                s.value = parse_test();
                args.push_back(finish(std::move(s)));
            } else if (is_op("**")) {
                auto k = begin_node(SyntaxKind::Keyword, cur());
                take();
                k.value = parse_test();
                args.push_back(finish(std::move(k)));
            } else if (cur().kind == TokenKind::Name && peek().kind == TokenKind::Op &&
                       peek().text == "=") {
                auto k = begin_node(SyntaxKind::Keyword, cur());
                k.name = expect_name();
                take();
                k.value = parse_test();
                args.push_back(finish(std::move(k)));
            } else {
                const Token& first = cur();
                NodeIndex a = parse_namedexpr_test();
                if (is_kw("for") || is_kw("async")) {
                    auto g = begin_node(SyntaxKind::GeneratorExp, first);
                    g.args.push_back(a);
                    parse_comprehensions(g.args);
                    a = finish(std::move(g));
                }
                args.push_back(a);
            }
            if (!is_op(",")) break;
            take();
        }
        return args;
    }

    NodeIndex parse_subscript_list() {
        const Token& first = cur();
        NodeIndex e = parse_subscript();
        if (!is_op(",")) return e;
        auto t = begin_node(SyntaxKind::Tuple, first);
        t.args.push_back(e);
        while (is_op(",")) {
            take();
            if (is_op("]")) break;
            t.args.push_back(parse_subscript());
        }
        return finish(std::move(t));
    }

    NodeIndex parse_subscript() {
        const Token& first = cur();
        NodeIndex lower = kNone;
        if (!is_op(":")) {
            lower = parse_star_or_namedexpr();
            if (!is_op(":")) return lower;
        }
        auto s = begin_node(SyntaxKind::Slice, first);
        take();  // ':'
        NodeIndex upper = kNone, step = kNone;
        if (!is_op(":") && !is_op("]") && !is_op(",")) upper = parse_test();
        if (is_op(":")) {
            take();
            if (!is_op("]") && !is_op(",")) step = parse_test();
        }
        s.args = {lower, upper, step};
        s.args.erase(std::remove(s.args.begin(), s.args.end(), kNone), s.args.end());
        return finish(std::move(s));
    }

    void parse_comprehensions(std::vector<NodeIndex>& out) {
        while (is_kw("for") || (is_kw("async") && peek().text == "for")) {
            auto c = begin_node(SyntaxKind::Comprehension, cur());
            if (is_kw("async")) take();
            take();
            c.targets.push_back(parse_target_list());
            expect_kw("in");
            c.value = parse_or_test();
            while (is_kw("if")) {
                take();
                c.args.push_back(parse_test_nocond());
            }
            out.push_back(finish(std::move(c)));
        }
    }

    NodeIndex parse_atom() {
        const Token& t = cur();
        switch (t.kind) {
            case TokenKind::Name: {
                if (t.text == "True" || t.text == "False" || t.text == "None") {
                    auto n = begin_node(SyntaxKind::Constant, t);
                    n.text = std::string(take().text);
                    return finish(std::move(n));
                }
                if (python::is_keyword(t.text)) fail("unexpected keyword");
                auto n = begin_node(SyntaxKind::Name, t);
                n.name = std::string(take().text);
                return finish(std::move(n));
            }
            case TokenKind::Number: {
                auto n = begin_node(SyntaxKind::Number, t);
                n.text = std::string(take().text);
                return finish(std::move(n));
            }
            case TokenKind::String: {
                auto n = begin_node(SyntaxKind::String, t);
                take();
                while (cur().kind == TokenKind::String) take();
                n.text = std::string(src_.substr(t.begin, last_end_ - t.begin));
                return finish(std::move(n));
            }
            case TokenKind::Op:
                break;
            default:
                fail("expected expression");
        }
        if (is_op("...")) {
            auto n = begin_node(SyntaxKind::Ellipsis, t);
            n.text = "...";
            take();
            return finish(std::move(n));
        }
        if (is_op("(")) return parse_paren();
        if (is_op("[")) return parse_list();
        if (is_op("{")) return parse_brace();
        fail("expected expression");
    }

    NodeIndex parse_paren() {
        const Token& open = cur();
        take();
        if (is_op(")")) {
            auto n = begin_node(SyntaxKind::Tuple, open);
            take();
            return finish(std::move(n));
        }
        if (is_kw("yield")) {
            NodeIndex y = parse_yield();
            expect_op(")");
            return y;
        }
        NodeIndex first = parse_star_or_namedexpr();
        if (is_kw("for") || is_kw("async")) {
            auto g = begin_node(SyntaxKind::GeneratorExp, open);
            g.args.push_back(first);
            parse_comprehensions(g.args);
            expect_op(")");
            return finish(std::move(g));
        }
        if (is_op(",")) {
            auto n = begin_node(SyntaxKind::Tuple, open);
            n.args.push_back(first);
            while (is_op(",")) {
                take();
                if (is_op(")")) break;
                n.args.push_back(parse_star_or_namedexpr());
            }
            expect_op(")");
            return finish(std::move(n));
        }
        expect_op(")");
        return first;
    }

    NodeIndex parse_list() {
        auto n = begin_node(SyntaxKind::List, cur());
        take();
        if (is_op("]")) {
            take();
            return finish(std::move(n));
        }
        NodeIndex first = parse_star_or_namedexpr();
        n.args.push_back(first);
        if (is_kw("for") || is_kw("async")) {
            n.kind = SyntaxKind::ListComp;
            parse_comprehensions(n.args);
            expect_op("]");
            return finish(std::move(n));
        }
        while (is_op(",")) {
            take();
            if (is_op("]")) break;
            n.args.push_back(parse_star_or_namedexpr());
        }
        expect_op("]");
        return finish(std::move(n));
    }

    NodeIndex parse_brace() {
        auto n = begin_node(SyntaxKind::Dict, cur());
        take();
        if (is_op("}")) {
            take();
            return finish(std::move(n));
        }
        auto parse_dict_item = [&](std::vector<NodeIndex>& out) {
            if (is_op("**")) {
                take();
                out.push_back(kNone);
                out.push_back(parse_bitor());
                return;
            }
            NodeIndex k = parse_test();
            expect_op(":");
            out.push_back(k);
            out.push_back(parse_test());
        };
        bool is_dict = false;
        if (is_op("**")) {
            is_dict = true;
            parse_dict_item(n.args);
        } else {
            NodeIndex first = parse_star_or_namedexpr();
            if (is_op(":")) {
                is_dict = true;
                take();
                n.args.push_back(first);
                n.args.push_back(parse_test());
            } else {
                n.args.push_back(first);
            }
        }
        if (is_kw("for") || is_kw("async")) {
            n.kind = is_dict ? SyntaxKind::DictComp : SyntaxKind::SetComp;
            parse_comprehensions(n.args);
            expect_op("}");
            n.args.erase(std::remove(n.args.begin(), n.args.end(), kNone), n.args.end());
            return finish(std::move(n));
        }
        n.kind = is_dict ? SyntaxKind::Dict : SyntaxKind::Set;
        while (is_op(",")) {
            take();
            if (is_op("}")) break;
            if (is_dict) parse_dict_item(n.args);
            else n.args.push_back(parse_star_or_namedexpr());
        }
        expect_op("}");
        n.args.erase(std::remove(n.args.begin(), n.args.end(), kNone), n.args.end());
        return finish(std::move(n));
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t i_ = 0;
    std::size_t last_end_ = 0;
    std::uint32_t last_line_ = 0;
    syntax::SyntaxTree tree_;
};

}  // namespace

bool PythonFrontend::accepts(const std::filesystem::path& path) const {
    return path.extension() == ".py";
}

syntax::SyntaxTree PythonFrontend::parse(std::string source) const {
    syntax::SyntaxTree tree;
    {
        auto tokens = python::tokenize_module(source);
        tree = Parser(source, std::move(tokens)).run();
    }
    tree.set_source(std::move(source));
    return tree;
}

std::string PythonFrontend::module_name(std::string_view rel_path) const {
    std::string p(rel_path);
    if (p.size() >= 3 && p.compare(p.size() - 3, 3, ".py") == 0) p.resize(p.size() - 3);
    std::replace(p.begin(), p.end(), '/', '.');
    constexpr std::string_view init = "__init__";
    if (p == init) return "";
    if (p.size() > init.size() + 1 && p.compare(p.size() - init.size() - 1, init.size() + 1,
                                                ".__init__") == 0) {
        p.resize(p.size() - init.size() - 1);
    }
    return p;
}

std::vector<std::string> PythonFrontend::lex_fragment(std::string_view code) const {
    std::vector<std::string> out;
    for (const auto& t : python::tokenize_fragment(code)) out.emplace_back(t.text);
    return out;
}

bool PythonFrontend::is_keyword(std::string_view word) const { return python::is_keyword(word); }

std::vector<std::string> word_tokens(const LanguageFrontend& frontend, std::string_view code) {
    std::vector<std::string> out;
    for (auto& tok : frontend.lex_fragment(code)) {
        const unsigned char c = static_cast<unsigned char>(tok.front());
        if (std::isalpha(c) || c == '_' || c >= 0x80) out.push_back(std::move(tok));
    }
    return out;
}

const LanguageFrontend& default_frontend() {
    static const PythonFrontend frontend;
    return frontend;
}

}  // namespace repograph
