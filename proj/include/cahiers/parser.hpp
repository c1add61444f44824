#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cahiers/expr.hpp"

namespace cahiers {

struct ParseError : std::runtime_error {
    std::size_t offset;
    std::vector<std::string> expected;
    std::string found;
    ParseError(std::size_t offset, std::vector<std::string> expected, std::string found);
};

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    TokKind kind;
    std::size_t offset;
    std::string text;
};

std::vector<Token> lex(const std::string& text);

// Recursive-descent core shared by the expression DSL and the local-form DSL.
class Parser {
public:
    explicit Parser(const std::string& text);

    Expr parse_expr();    // expr := term (("+"|"-") term)*
    Expr parse_term();    // term := factor (("*"|"/") factor)*
    Expr parse_factor();  // factor := atom ("^" signed-int)?
    void expect_end();

    const Token& peek() const;
    const Token& peek_ahead(std::size_t k) const;  // k = 0 is peek()
    Token advance();
    bool accept(TokKind k);
    Token expect(TokKind k, const std::string& what);
    [[noreturn]] void fail(std::vector<std::string> expected) const;

private:
    Expr parse_atom();
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

Expr parse(const std::string& text);

}  // namespace cahiers
