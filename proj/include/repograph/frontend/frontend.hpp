#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "repograph/frontend/syntax.hpp"

namespace repograph {

/// Grammar abstraction: everything the graph builder and the metrics need from a
/// source language. The builder only sees syntax::SyntaxTree, so adding another
/// language means mapping its grammar onto SyntaxKind and implementing this class.
class LanguageFrontend {
public:
    virtual ~LanguageFrontend() = default;

    virtual std::string_view language() const = 0;

    /// True for files this frontend indexes (by extension).
    virtual bool accepts(const std::filesystem::path& path) const = 0;

    /// Parses a whole source file. Throws syntax::SyntaxError.
    virtual syntax::SyntaxTree parse(std::string source) const = 0;

    /// Module name used for import resolution, e.g. "pkg/b.py" -> "pkg.b".
    virtual std::string module_name(std::string_view rel_path) const = 0;

    /// Lexical tokens of a code fragment, used for token-level metrics and BM25.
    virtual std::vector<std::string> lex_fragment(std::string_view code) const = 0;

    virtual bool is_keyword(std::string_view word) const = 0;
};

class PythonFrontend final : public LanguageFrontend {
public:
    std::string_view language() const override { return "python"; }
    bool accepts(const std::filesystem::path& path) const override;
    syntax::SyntaxTree parse(std::string source) const override;
    std::string module_name(std::string_view rel_path) const override;
    std::vector<std::string> lex_fragment(std::string_view code) const override;
    bool is_keyword(std::string_view word) const override;
};

/// Identifier and keyword tokens of a fragment.
std::vector<std::string> word_tokens(const LanguageFrontend& frontend, std::string_view code);

/// Shared instance for the default corpus language.
const LanguageFrontend& default_frontend();

}  // namespace repograph
