#include "repograph/frontend/syntax.hpp"

#include <algorithm>

namespace repograph::syntax {

const char* kind_name(SyntaxKind kind) {
    switch (kind) {
        case SyntaxKind::Module: return "Module";
        case SyntaxKind::FunctionDef: return "FunctionDef";
        case SyntaxKind::ClassDef: return "ClassDef";
        case SyntaxKind::Return: return "Return";
        case SyntaxKind::If: return "If";
        case SyntaxKind::While: return "While";
        case SyntaxKind::For: return "For";
        case SyntaxKind::Try: return "Try";
        case SyntaxKind::ExceptHandler: return "ExceptHandler";
        case SyntaxKind::With: return "With";
        case SyntaxKind::WithItem: return "WithItem";
        case SyntaxKind::Assign: return "Assign";
        case SyntaxKind::AugAssign: return "AugAssign";
        case SyntaxKind::AnnAssign: return "AnnAssign";
        case SyntaxKind::ExprStmt: return "ExprStmt";
        case SyntaxKind::Pass: return "Pass";
        case SyntaxKind::Break: return "Break";
        case SyntaxKind::Continue: return "Continue";
        case SyntaxKind::Raise: return "Raise";
        case SyntaxKind::Import: return "Import";
        case SyntaxKind::ImportFrom: return "ImportFrom";
        case SyntaxKind::Global: return "Global";
        case SyntaxKind::Nonlocal: return "Nonlocal";
        case SyntaxKind::Delete: return "Delete";
        case SyntaxKind::Assert: return "Assert";
        case SyntaxKind::Alias: return "Alias";
        case SyntaxKind::Param: return "Param";
        case SyntaxKind::Decorator: return "Decorator";
        case SyntaxKind::Name: return "Name";
        case SyntaxKind::Attribute: return "Attribute";
        case SyntaxKind::Call: return "Call";
        case SyntaxKind::Keyword: return "Keyword";
        case SyntaxKind::Subscript: return "Subscript";
        case SyntaxKind::Slice: return "Slice";
        case SyntaxKind::Number: return "Number";
        case SyntaxKind::String: return "String";
        case SyntaxKind::Constant: return "Constant";
        case SyntaxKind::Ellipsis: return "Ellipsis";
        case SyntaxKind::BinOp: return "BinOp";
        case SyntaxKind::UnaryOp: return "UnaryOp";
        case SyntaxKind::BoolOp: return "BoolOp";
        case SyntaxKind::Compare: return "Compare";
        case SyntaxKind::IfExp: return "IfExp";
        case SyntaxKind::Lambda: return "Lambda";
        case SyntaxKind::List: return "List";
        case SyntaxKind::Tuple: return "Tuple";
        case SyntaxKind::Dict: return "Dict";
        case SyntaxKind::Set: return "Set";
        case SyntaxKind::ListComp: return "ListComp";
        case SyntaxKind::SetComp: return "SetComp";
        case SyntaxKind::DictComp: return "DictComp";
        case SyntaxKind::GeneratorExp: return "GeneratorExp";
        case SyntaxKind::Comprehension: return "Comprehension";
        case SyntaxKind::Starred: return "Starred";
        case SyntaxKind::Yield: return "Yield";
        case SyntaxKind::YieldFrom: return "YieldFrom";
        case SyntaxKind::Await: return "Await";
        case SyntaxKind::NamedExpr: return "NamedExpr";
    }
    return "?";
}

bool is_statement(SyntaxKind kind) {
    return kind <= SyntaxKind::Assert && kind != SyntaxKind::WithItem;
}

bool is_compound(SyntaxKind kind) {
    switch (kind) {
        case SyntaxKind::FunctionDef:
        case SyntaxKind::ClassDef:
        case SyntaxKind::If:
        case SyntaxKind::While:
        case SyntaxKind::For:
        case SyntaxKind::Try:
        case SyntaxKind::With:
            return true;
        default:
            return false;
    }
}

NodeIndex SyntaxTree::add(SyntaxNode node) {
    nodes_.push_back(std::move(node));
    return static_cast<NodeIndex>(nodes_.size() - 1);
}

void SyntaxTree::finalize() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        auto& n = nodes_[i];
        std::vector<NodeIndex> kids;
        auto add_one = [&](NodeIndex c) {
            if (c != kNone) kids.push_back(c);
        };
        auto add_all = [&](const std::vector<NodeIndex>& v) {
            for (auto c : v) add_one(c);
        };
        add_all(n.decorators);
        add_all(n.targets);
        add_one(n.test);
        add_one(n.value);
        add_one(n.annotation);
        add_all(n.args);
        add_all(n.body);
        add_all(n.handlers);
        add_all(n.orelse);
        add_all(n.finalbody);
        std::stable_sort(kids.begin(), kids.end(), [&](NodeIndex a, NodeIndex b) {
            return nodes_[static_cast<std::size_t>(a)].span.begin <
                   nodes_[static_cast<std::size_t>(b)].span.begin;
        });
        kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
        n.children = std::move(kids);
        for (auto c : n.children) nodes_[static_cast<std::size_t>(c)].parent = static_cast<NodeIndex>(i);
    }
}

std::string_view SyntaxTree::text_of(NodeIndex i) const {
    const auto& s = at(i).span;
    return std::string_view(source_).substr(s.begin, s.end - s.begin);
}

NodeIndex SyntaxTree::innermost_at(std::size_t offset) const {
    NodeIndex cur = root_;
    if (cur == kNone) return kNone;
    while (true) {
        NodeIndex next = kNone;
        for (auto c : at(cur).children) {
            if (at(c).span.contains(offset)) next = c;
        }
        if (next == kNone) return cur;
        cur = next;
    }
}

}  // namespace repograph::syntax
