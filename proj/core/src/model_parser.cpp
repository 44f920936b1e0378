#include "polymart/model_parser.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace polymart {

namespace {

enum class Tok { integer, ident, string, lbrack, rbrack, eq, plus, minus, star, slash, caret,
                 lparen, rparen, newline, end };

struct Token {
    Tok kind;
    std::string text;
    int line;
    int col;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_space_and_comments();
        const int line = line_, col = col_;
        if (pos_ >= text_.size()) return {Tok::end, "", line, col};
        const char c = text_[pos_];
        if (c == '\n') {
            advance();
            return {Tok::newline, "\n", line, col};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string v;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                v += text_[pos_];
                advance();
            }
            return {Tok::integer, v, line, col};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string v;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                v += text_[pos_];
                advance();
            }
            return {Tok::ident, v, line, col};
        }
        if (c == '"') {
            advance();
            std::string v;
            while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') {
                v += text_[pos_];
                advance();
            }
            if (pos_ >= text_.size() || text_[pos_] != '"')
                throw SyntaxError(line, col, "unterminated string");
            advance();
            return {Tok::string, v, line, col};
        }
        advance();
        switch (c) {
            case '[': return {Tok::lbrack, "[", line, col};
            case ']': return {Tok::rbrack, "]", line, col};
            case '=': return {Tok::eq, "=", line, col};
            case '+': return {Tok::plus, "+", line, col};
            case '-': return {Tok::minus, "-", line, col};
            case '*': return {Tok::star, "*", line, col};
            case '/': return {Tok::slash, "/", line, col};
            case '^': return {Tok::caret, "^", line, col};
            case '(': return {Tok::lparen, "(", line, col};
            case ')': return {Tok::rparen, ")", line, col};
        }
        throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) { shift(); }

    MomentModel parse() {
        std::string name = "user";
        bool saw_name = false;
        std::map<int, MPoly> assignments;
        while (cur_.kind != Tok::end) {
            if (cur_.kind == Tok::newline) {
                shift();
                continue;
            }
            if (cur_.kind == Tok::ident && cur_.text == "model") {
                if (saw_name || !assignments.empty())
                    throw SyntaxError(cur_.line, cur_.col, "model header must come first");
                shift();
                expect(Tok::string, "model name in double quotes");
                name = cur_.text;
                saw_name = true;
                shift();
                end_of_line();
                continue;
            }
            if (cur_.kind == Tok::ident && cur_.text == "g") {
                parse_assignment(assignments);
                continue;
            }
            throw SyntaxError(cur_.line, cur_.col, "expected 'g[<n>] = <expr>'");
        }
        if (assignments.empty()) throw MissingOrder(1);
        const int top = assignments.rbegin()->first;
        std::vector<RatFunc> g;
        g.reserve(static_cast<std::size_t>(top));
        for (int n = 1; n <= top; ++n) {
            const auto it = assignments.find(n);
            if (it == assignments.end()) throw MissingOrder(n);
            g.emplace_back(it->second);
        }
        return MomentModel::from_moments(std::move(name), std::move(g));
    }

private:
    void parse_assignment(std::map<int, MPoly>& assignments) {
        const Token at = cur_;
        shift();
        expect(Tok::lbrack, "'['");
        shift();
        expect(Tok::integer, "moment order");
        const long n = std::stol(cur_.text);
        if (n < 1 || n > 64)
            throw SyntaxError(cur_.line, cur_.col, "moment order must be between 1 and 64");
        shift();
        expect(Tok::rbrack, "']'");
        shift();
        expect(Tok::eq, "'='");
        shift();
        MPoly value = parse_expr();
        end_of_line();
        if (!assignments.emplace(static_cast<int>(n), std::move(value)).second)
            throw SyntaxError(at.line, at.col, "duplicate assignment for g[" + std::to_string(n) + "]");
    }

    MPoly parse_expr() {
        MPoly acc = parse_term();
        while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
            const bool minus = cur_.kind == Tok::minus;
            shift();
            MPoly rhs = parse_term();
            if (minus)
                acc -= rhs;
            else
                acc += rhs;
        }
        return acc;
    }

    MPoly parse_term() {
        MPoly acc = parse_unary();
        while (cur_.kind == Tok::star) {
            shift();
            acc *= parse_unary();
        }
        return acc;
    }

    MPoly parse_unary() {
        bool negative = false;
        while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
            if (cur_.kind == Tok::minus) negative = !negative;
            shift();
        }
        MPoly p = parse_power();
        return negative ? -p : p;
    }

    MPoly parse_power() {
        MPoly base = parse_primary();
        if (cur_.kind == Tok::caret) {
            shift();
            expect(Tok::integer, "integer exponent");
            const long e = std::stol(cur_.text);
            if (e > 64) throw SyntaxError(cur_.line, cur_.col, "exponent too large");
            shift();
            return base.pow(static_cast<unsigned>(e));
        }
        return base;
    }

    MPoly parse_primary() {
        if (cur_.kind == Tok::integer) {
            const BigInt p(cur_.text);
            shift();
            if (cur_.kind == Tok::slash) {
                shift();
                expect(Tok::integer, "integer denominator");
                const BigInt q(cur_.text);
                if (q == 0) throw SyntaxError(cur_.line, cur_.col, "zero denominator");
                shift();
                return MPoly(Rational(p, q));
            }
            return MPoly(Rational(p));
        }
        if (cur_.kind == Tok::ident) {
            if (cur_.text != "t")
                throw SyntaxError(cur_.line, cur_.col, "unknown symbol '" + cur_.text + "'");
            shift();
            return MPoly::variable(Var::t);
        }
        if (cur_.kind == Tok::lparen) {
            shift();
            MPoly inner = parse_expr();
            expect(Tok::rparen, "')'");
            shift();
            return inner;
        }
        throw SyntaxError(cur_.line, cur_.col, "expected a number, 't' or '('");
    }

    void end_of_line() {
        if (cur_.kind == Tok::newline) {
            shift();
            return;
        }
        if (cur_.kind != Tok::end)
            throw SyntaxError(cur_.line, cur_.col, "unexpected trailing input");
    }

    void expect(Tok kind, const std::string& what) const {
        if (cur_.kind != kind) throw SyntaxError(cur_.line, cur_.col, "expected " + what);
    }

    void shift() { cur_ = lex_.next(); }

    Lexer lex_;
    Token cur_{Tok::end, "", 0, 0};
};

} // namespace

MomentModel parse_model(const std::string& text) { return Parser(text).parse(); }

namespace {

// Ascending powers of t, e.g. "t + 3*t^2".
std::string ascending_form(const MPoly& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    const auto coeffs = p.coeffs(Var::t);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] == 0) continue;
        Rational v = coeffs[k];
        const bool negative = v < 0;
        if (negative) v = -v;
        std::string body;
        if (k == 0)
            body = to_string(v);
        else {
            const std::string tpart = k == 1 ? "t" : "t^" + std::to_string(k);
            body = v == 1 ? tpart : to_string(v) + "*" + tpart;
        }
        if (first) {
            os << (negative ? "-" : "") << body;
            first = false;
        } else {
            os << (negative ? " - " : " + ") << body;
        }
    }
    return os.str();
}

} // namespace

std::string serialize_model(const MomentModel& model) {
    if (!model.polynomial_in_time())
        throw NonPolynomialTime("only polynomial moment functions have a file form");
    std::ostringstream os;
    os << "model \"" << model.name() << "\"\n";
    for (int n = 1; n <= model.max_order(); ++n)
        os << "g[" << n << "] = " << ascending_form(model.g(n).poly()) << "\n";
    return os.str();
}

} // namespace polymart
