#include "cahiers/parser.hpp"

#include <cctype>

namespace cahiers {

namespace {

std::string describe_token(const Token& t) {
    if (t.kind == TokKind::End) return "end of input";
    return "'" + t.text + "'";
}

std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s += parts.size() > 2 ? ", " : " or ";
        if (i + 1 == parts.size() && parts.size() > 2) s += "or ";
        s += parts[i];
    }
    return s;
}

}  // namespace

ParseError::ParseError(std::size_t offset_, std::vector<std::string> expected_, std::string found_)
    : std::runtime_error("syntax error at offset " + std::to_string(offset_) + ": expected " +
                         join(expected_) + "; found " + found_),
      offset(offset_),
      expected(std::move(expected_)),
      found(std::move(found_)) {}

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            if (i < text.size() && text[i] == '.') {
                ++i;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            }
            if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
                std::size_t save = i;
                ++i;
                if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
                if (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                } else {
                    i = save;  // the 'e' begins an identifier, not an exponent
                }
            }
            out.push_back({TokKind::Number, start, text.substr(start, i - start)});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
            out.push_back({TokKind::Ident, start, text.substr(start, i - start)});
            continue;
        }
        TokKind k;
        switch (c) {
            case '+': k = TokKind::Plus; break;
            case '-': k = TokKind::Minus; break;
            case '*': k = TokKind::Star; break;
            case '/': k = TokKind::Slash; break;
            case '^': k = TokKind::Caret; break;
            case '(': k = TokKind::LParen; break;
            case ')': k = TokKind::RParen; break;
            case ',': k = TokKind::Comma; break;
            default:
                throw ParseError(start, {"number", "identifier", "operator"},
                                 "'" + std::string(1, c) + "'");
        }
        out.push_back({k, start, std::string(1, c)});
        ++i;
    }
    out.push_back({TokKind::End, text.size(), ""});
    return out;
}

Parser::Parser(const std::string& text) : toks_(lex(text)) {}

const Token& Parser::peek() const { return toks_[pos_]; }

const Token& Parser::peek_ahead(std::size_t k) const {
    const std::size_t i = pos_ + k;
    return toks_[i < toks_.size() ? i : toks_.size() - 1];  // End token is last
}

Token Parser::advance() { return toks_[pos_++]; }

bool Parser::accept(TokKind k) {
    if (peek().kind == k) {
        ++pos_;
        return true;
    }
    return false;
}

Token Parser::expect(TokKind k, const std::string& what) {
    if (peek().kind != k) fail({what});
    return advance();
}

void Parser::fail(std::vector<std::string> expected) const {
    throw ParseError(peek().offset, std::move(expected), describe_token(peek()));
}

Expr Parser::parse_expr() {
    Expr acc = parse_term();
    while (true) {
        if (accept(TokKind::Plus)) {
            acc = acc + parse_term();
        } else if (accept(TokKind::Minus)) {
            acc = acc - parse_term();
        } else {
            return acc;
        }
    }
}

Expr Parser::parse_term() {
    Expr acc = parse_factor();
    while (true) {
        if (accept(TokKind::Star)) {
            acc = acc * parse_factor();
        } else if (accept(TokKind::Slash)) {
            acc = acc / parse_factor();
        } else {
            return acc;
        }
    }
}

Expr Parser::parse_factor() {
    Expr base = parse_atom();
    if (accept(TokKind::Caret)) {
        bool neg = false;
        if (accept(TokKind::Minus)) {
            neg = true;
        } else {
            accept(TokKind::Plus);
        }
        if (peek().kind != TokKind::Number || peek().text.find('.') != std::string::npos ||
            peek().text.find('e') != std::string::npos || peek().text.find('E') != std::string::npos) {
            fail({"integer exponent"});
        }
        Token t = advance();
        Rational e{BigInt(t.text)};
        return Expr::power(base, neg ? -e : e);
    }
    return base;
}

Expr Parser::parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
        case TokKind::Number: {
            Token n = advance();
            return Expr::num(rational_from_decimal(n.text));
        }
        case TokKind::Ident: {
            Token id = advance();
            if (peek().kind == TokKind::LParen) {
                auto f = fn_from_name(id.text);
                if (!f) {
                    throw ParseError(id.offset, {"function name (sin, cos, tan, exp, log, sqrt, atan)"},
                                     "unknown function '" + id.text + "'");
                }
                advance();  // '('
                Expr arg = parse_expr();
                expect(TokKind::RParen, "')'");
                return Expr::apply(*f, arg);
            }
            return Expr::var(id.text);
        }
        case TokKind::LParen: {
            advance();
            Expr inner = parse_expr();
            expect(TokKind::RParen, "')'");
            return inner;
        }
        case TokKind::Minus: {
            advance();
            return -parse_atom();
        }
        default:
            fail({"number", "identifier", "'('", "'-'"});
    }
}

void Parser::expect_end() {
    if (peek().kind != TokKind::End) fail({"end of input"});
}

Expr parse(const std::string& text) {
    Parser p(text);
    Expr e = p.parse_expr();
    p.expect_end();
    return e;
}

}  // namespace cahiers
