#include "repograph/frontend/python_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "repograph/frontend/syntax.hpp"

namespace repograph::python {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};

// Longest first so greedy matching works.
constexpr std::array<std::string_view, 47> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "!=", "==", "<=", ">=", "**",
    "//",  "<<",  ">>",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "+",   "-",   "*",   "/",   "%",   "@",  "&",  "|",  "^",  "~",  "<",  ">",
    "(",   ")",   "[",   "]",   "{",   "}",  ",",  ":",  ".",  ";",  "="};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

class Lexer {
public:
    Lexer(std::string_view src, bool fragment) : src_(src), fragment_(fragment) {}

    std::vector<Token> run() {
        if (!fragment_) {
            at_line_start_ = true;
        }
        while (pos_ < src_.size()) {
            if (at_line_start_ && !fragment_) {
                if (!handle_indentation()) continue;
            }
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\f') {
                advance(1);
                continue;
            }
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') advance(1);
                continue;
            }
            if (c == '\\' && (peek(1) == '\n' || peek(1) == '\r')) {
                advance(1);
                consume_newline();
                continue;
            }
            if (c == '\n' || c == '\r') {
                const auto begin = pos_;
                const auto line = line_, col = col_;
                consume_newline();
                if (!fragment_ && depth_ == 0 && !tokens_.empty() &&
                    tokens_.back().kind != TokenKind::Newline) {
                    push(TokenKind::Newline, begin, begin + 1, line, col);
                }
                if (!fragment_ && depth_ == 0) at_line_start_ = true;
                continue;
            }
            lex_token();
        }
        if (!fragment_) {
            if (depth_ > 0 && !fragment_) {
                throw syntax::SyntaxError("unexpected EOF: unclosed bracket", line_, col_);
            }
            if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline) {
                push(TokenKind::Newline, pos_, pos_, line_, col_);
            }
            while (indents_.size() > 1) {
                indents_.pop_back();
                push(TokenKind::Dedent, pos_, pos_, line_, col_);
            }
            push(TokenKind::EndMarker, pos_, pos_, line_, col_);
        }
        return std::move(tokens_);
    }

private:
    char peek(std::size_t ahead) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
            ++pos_;
            ++col_;
        }
    }

    void consume_newline() {
        if (src_[pos_] == '\r' && peek(1) == '\n') ++pos_;
        ++pos_;
        ++line_;
        col_ = 1;
    }

    void push(TokenKind kind, std::size_t begin, std::size_t end, std::uint32_t line,
              std::uint32_t col) {
        tokens_.push_back(Token{kind, src_.substr(begin, end - begin), begin, end, line, col});
    }

    // Returns false when the line was blank/comment-only and has been consumed.
    bool handle_indentation() {
        std::size_t width = 0;
        std::size_t p = pos_;
        while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
            width = src_[p] == '\t' ? (width / 8 + 1) * 8 : (src_[p] == ' ' ? width + 1 : 0);
            ++p;
        }
        if (p >= src_.size()) {
            advance(p - pos_);
            at_line_start_ = false;
            return false;
        }
        if (src_[p] == '#' || src_[p] == '\n' || src_[p] == '\r') {
            advance(p - pos_);
            while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') advance(1);
            if (pos_ < src_.size()) consume_newline();
            return false;
        }
        if (src_[p] == '\\' && (p + 1 < src_.size()) &&
            (src_[p + 1] == '\n' || src_[p + 1] == '\r')) {
            // explicit continuation on a blank line; treat as blank
            advance(p - pos_);
            at_line_start_ = false;
            return true;
        }
        advance(p - pos_);
        at_line_start_ = false;
        if (width > indents_.back()) {
            indents_.push_back(width);
            push(TokenKind::Indent, pos_, pos_, line_, col_);
        } else {
            while (width < indents_.back()) {
                indents_.pop_back();
                push(TokenKind::Dedent, pos_, pos_, line_, col_);
            }
            if (width != indents_.back()) {
                throw syntax::SyntaxError("unindent does not match any outer indentation level",
                                          line_, col_);
            }
        }
        return true;
    }

    void lex_token() {
        const auto begin = pos_;
        const auto line = line_, col = col_;
        const auto c = static_cast<unsigned char>(src_[pos_]);

        if (is_ident_start(c)) {
            std::size_t p = pos_;
            while (p < src_.size() && is_ident_char(static_cast<unsigned char>(src_[p]))) ++p;
            const auto word = src_.substr(pos_, p - pos_);
            if (p < src_.size() && (src_[p] == '\'' || src_[p] == '"') && is_string_prefix(word)) {
                advance(p - pos_);
                lex_string(begin, line, col);
                return;
            }
            advance(p - pos_);
            push(TokenKind::Name, begin, pos_, line, col);
            return;
        }
        if (c == '\'' || c == '"') {
            lex_string(begin, line, col);
            return;
        }
        if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            lex_number();
            push(TokenKind::Number, begin, pos_, line, col);
            return;
        }
        for (const auto op : kOperators) {
            if (src_.substr(pos_, op.size()) == op) {
                if (op == "(" || op == "[" || op == "{") ++depth_;
                if (op == ")" || op == "]" || op == "}") {
                    if (depth_ == 0 && !fragment_) {
                        throw syntax::SyntaxError("unmatched closing bracket", line, col);
                    }
                    if (depth_ > 0) --depth_;
                }
                advance(op.size());
                push(TokenKind::Op, begin, pos_, line, col);
                return;
            }
        }
        if (fragment_) {
            advance(1);
            push(TokenKind::Op, begin, pos_, line, col);
            return;
        }
        throw syntax::SyntaxError(std::string("invalid character '") + src_[pos_] + "'", line, col);
    }

    static bool is_string_prefix(std::string_view word) {
        if (word.size() > 2) return false;
        std::string lower;
        for (char ch : word) lower.push_back(static_cast<char>(std::tolower(ch)));
        static constexpr std::array<std::string_view, 10> prefixes = {
            "r", "u", "b", "f", "br", "rb", "fr", "rf", "ur", "ru"};
        return std::find(prefixes.begin(), prefixes.end(), lower) != prefixes.end();
    }

    void lex_string(std::size_t begin, std::uint32_t line, std::uint32_t col) {
        const char quote = src_[pos_];
        const bool triple = peek(1) == quote && peek(2) == quote;
        advance(triple ? 3 : 1);
        while (true) {
            if (pos_ >= src_.size()) {
                if (fragment_) break;
                throw syntax::SyntaxError("unterminated string literal", line, col);
            }
            const char ch = src_[pos_];
            if (ch == '\\') {
                advance(1);
                if (pos_ < src_.size()) {
                    if (src_[pos_] == '\n' || src_[pos_] == '\r') {
                        consume_newline();
                    } else {
                        advance(1);
                    }
                }
                continue;
            }
            if (ch == '\n' || ch == '\r') {
                if (!triple) {
                    if (fragment_) break;
                    throw syntax::SyntaxError("unterminated string literal", line, col);
                }
                consume_newline();
                continue;
            }
            if (ch == quote) {
                if (!triple) {
                    advance(1);
                    break;
                }
                if (peek(1) == quote && peek(2) == quote) {
                    advance(3);
                    break;
                }
            }
            advance(1);
        }
        push(TokenKind::String, begin, pos_, line, col);
    }

    void lex_number() {
        auto digits = [&](auto pred) {
            while (pos_ < src_.size() &&
                   (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                advance(1);
            }
        };
        if (src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' ||
                                  peek(1) == 'O' || peek(1) == 'b' || peek(1) == 'B')) {
            advance(2);
            digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
            return;
        }
        digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance(1);
            digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            const char next = peek(1);
            if (std::isdigit(static_cast<unsigned char>(next)) ||
                ((next == '+' || next == '-') &&
                 std::isdigit(static_cast<unsigned char>(peek(2))))) {
                advance(next == '+' || next == '-' ? 2 : 1);
                digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
            }
        }
        if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) advance(1);
    }

    std::string_view src_;
    bool fragment_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;
    int depth_ = 0;
    bool at_line_start_ = false;
    std::vector<std::size_t> indents_{0};
    std::vector<Token> tokens_;
};

}  // namespace

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize_module(std::string_view source) { return Lexer(source, false).run(); }

std::vector<Token> tokenize_fragment(std::string_view source) { return Lexer(source, true).run(); }

}  // namespace repograph::python
