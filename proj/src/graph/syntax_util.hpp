#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "repograph/frontend/syntax.hpp"

namespace repograph::detail {

/// "a.b.c" for a Name/Attribute chain, nullopt for anything else.
inline std::optional<std::string> dotted_name(const syntax::SyntaxTree& t, syntax::NodeIndex i) {
    using syntax::SyntaxKind;
    std::string out;
    while (i != syntax::kNone) {
        const auto& n = t.at(i);
        if (n.kind == SyntaxKind::Name) {
            return out.empty() ? n.name : n.name + "." + out;
        }
        if (n.kind != SyntaxKind::Attribute) return std::nullopt;
        out = out.empty() ? n.name : n.name + "." + out;
        i = n.value;
    }
    return std::nullopt;
}

/// Dotted names referenced by a type expression, e.g. Optional[pkg.Foo] -> {Optional, pkg.Foo}.
inline void type_names(const syntax::SyntaxTree& t, syntax::NodeIndex i,
                       std::vector<std::string>& out) {
    using syntax::SyntaxKind;
    if (i == syntax::kNone) return;
    const auto& n = t.at(i);
    switch (n.kind) {
        case SyntaxKind::Name:
        case SyntaxKind::Attribute:
            if (auto d = dotted_name(t, i)) out.push_back(*d);
            return;
        case SyntaxKind::String: {
            std::string inner = n.text;
            inner.erase(0, inner.find_first_of("'\"") + 1);
            while (!inner.empty() && (inner.back() == '\'' || inner.back() == '"')) inner.pop_back();
            const bool dotted =
                !inner.empty() && std::all_of(inner.begin(), inner.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
                });
            if (dotted) out.push_back(inner);
            return;
        }
        case SyntaxKind::Call:
            type_names(t, n.value, out);
            return;
        default:
            for (auto c : n.children) type_names(t, c, out);
            return;
    }
}

/// `Foo(...)` or `mod.Foo(...)`: a call whose callee name starts with an uppercase letter.
inline bool is_capitalized_callee(const syntax::SyntaxTree& t, syntax::NodeIndex call) {
    using syntax::SyntaxKind;
    if (call == syntax::kNone || t.at(call).kind != SyntaxKind::Call) return false;
    const auto& f = t.at(t.at(call).value);
    if (f.kind != SyntaxKind::Name && f.kind != SyntaxKind::Attribute) return false;
    return !f.name.empty() && std::isupper(static_cast<unsigned char>(f.name[0]));
}

inline std::string param_name(const syntax::SyntaxTree& t, syntax::NodeIndex p) {
    auto name = t.at(p).name;
    name.erase(0, name.find_first_not_of('*'));
    return name;
}

}  // namespace repograph::detail
