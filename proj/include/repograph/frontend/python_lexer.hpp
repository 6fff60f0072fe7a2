#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace repograph::python {

enum class TokenKind : std::uint8_t { Name, Number, String, Op, Newline, Indent, Dedent, EndMarker };

struct Token {
    TokenKind kind;
    std::string_view text;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::uint32_t line = 1;
    std::uint32_t col = 1;
};

/// Tokenizes a complete Python module, including NEWLINE/INDENT/DEDENT.
/// Throws syntax::SyntaxError on malformed input.
std::vector<Token> tokenize_module(std::string_view source);

/// Tokenizes a code fragment (e.g. a single line) without layout tokens.
/// Never throws: unterminated strings run to the end, stray bytes become one-char ops.
std::vector<Token> tokenize_fragment(std::string_view source);

bool is_keyword(std::string_view word);

}  // namespace repograph::python
