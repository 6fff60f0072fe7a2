#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace repograph::syntax {

using NodeIndex = std::int32_t;
inline constexpr NodeIndex kNone = -1;

/// Byte range plus 1-based line/column of the first and last byte.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    std::uint32_t line_begin = 1;
    std::uint32_t col_begin = 1;
    std::uint32_t line_end = 1;

    bool contains(std::size_t offset) const { return begin <= offset && offset <= end; }
};

enum class SyntaxKind : std::uint8_t {
    // statements
    Module,
    FunctionDef,
    ClassDef,
    Return,
    If,
    While,
    For,
    Try,
    ExceptHandler,
    With,
    WithItem,
    Assign,
    AugAssign,
    AnnAssign,
    ExprStmt,
    Pass,
    Break,
    Continue,
    Raise,
    Import,
    ImportFrom,
    Global,
    Nonlocal,
    Delete,
    Assert,
    // expressions and auxiliary nodes
    Alias,
    Param,
    Decorator,
    Name,
    Attribute,
    Call,
    Keyword,
    Subscript,
    Slice,
    Number,
    String,
    Constant,
    Ellipsis,
    BinOp,
    UnaryOp,
    BoolOp,
    Compare,
    IfExp,
    Lambda,
    List,
    Tuple,
    Dict,
    Set,
    ListComp,
    SetComp,
    DictComp,
    GeneratorExp,
    Comprehension,
    Starred,
    Yield,
    YieldFrom,
    Await,
    NamedExpr,
};

const char* kind_name(SyntaxKind kind);
bool is_statement(SyntaxKind kind);
bool is_compound(SyntaxKind kind);

/// One node of the arena-allocated syntax tree.
///
/// Slot usage by kind:
///   FunctionDef  name, decorators, args = Param*, annotation = return type, body
///   ClassDef     name, decorators, args = bases/Keyword*, body
///   Param        name (with leading * or ** for variadics), annotation, value = default
///   If/While     test, body, orelse (an `elif` is an If inside orelse)
///   For          targets, value = iterable, body, orelse
///   Try          body, handlers = ExceptHandler*, orelse, finalbody
///   ExceptHandler test = exception type, name = bound name, body
///   With         args = WithItem*, body; WithItem value = context, targets = `as` target
///   Assign       targets (one per `=`), value
///   AugAssign    name = operator, targets = [target], value
///   AnnAssign    targets = [target], annotation, value
///   Return/ExprStmt/Raise/Yield/Await/Starred/UnaryOp  value (Raise: args = [cause])
///   Import       args = Alias*; ImportFrom name = module (with leading dots), args = Alias*
///   Alias        name = dotted name, text = asname
///   Global/Nonlocal/Delete  targets
///   Assert       test, value = message
///   Name         name; Attribute value = object, name = attribute
///   Call         value = callee, args = positional/Starred/Keyword
///   Keyword      name (empty for **kwargs), value
///   Subscript    value = object, args = [index]
///   Slice        args = lower/upper/step (kNone when omitted)
///   Number/String/Constant  text = literal text
///   BinOp/BoolOp name = operator, args = operands; Compare args = operands, text = ops
///   IfExp        test, args = [then, else]
///   Lambda       args = Param*, value = body
///   List/Tuple/Set args; Dict args = key,value pairs (key kNone for **spread)
///   *Comp/GeneratorExp args = element(s) followed by Comprehension*
///   Comprehension targets, value = iterable, args = conditions
///   NamedExpr    targets = [name], value
struct SyntaxNode {
    SyntaxKind kind = SyntaxKind::Module;
    std::string name;
    std::string text;
    SourceSpan span;
    std::size_t header_end = 0;  // compound statements: offset just past the header colon
    NodeIndex parent = kNone;

    NodeIndex value = kNone;
    NodeIndex test = kNone;
    NodeIndex annotation = kNone;
    std::vector<NodeIndex> targets;
    std::vector<NodeIndex> args;
    std::vector<NodeIndex> decorators;
    std::vector<NodeIndex> body;
    std::vector<NodeIndex> orelse;
    std::vector<NodeIndex> handlers;
    std::vector<NodeIndex> finalbody;

    /// All direct children in source order; filled by SyntaxTree::finalize().
    std::vector<NodeIndex> children;
};

class SyntaxTree {
public:
    NodeIndex add(SyntaxNode node);
    SyntaxNode& at(NodeIndex i) { return nodes_.at(static_cast<std::size_t>(i)); }
    const SyntaxNode& at(NodeIndex i) const { return nodes_.at(static_cast<std::size_t>(i)); }
    std::size_t size() const { return nodes_.size(); }
    NodeIndex root() const { return root_; }
    void set_root(NodeIndex r) { root_ = r; }

    /// Computes children lists and parent links. Must be called once after construction.
    void finalize();

    /// Source slice covered by a node.
    std::string_view text_of(NodeIndex i) const;
    std::string_view source() const { return source_; }
    void set_source(std::string src) { source_ = std::move(src); }

    /// Innermost node whose span contains `offset`, or root.
    NodeIndex innermost_at(std::size_t offset) const;

private:
    std::vector<SyntaxNode> nodes_;
    NodeIndex root_ = kNone;
    std::string source_;
};

struct SyntaxError : std::runtime_error {
    SyntaxError(const std::string& msg, std::uint32_t line_, std::uint32_t col_)
        : std::runtime_error(msg), line(line_), col(col_) {}
    std::uint32_t line;
    std::uint32_t col;
};

}  // namespace repograph::syntax
