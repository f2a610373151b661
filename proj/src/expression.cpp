#include "magnomech/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace magnomech {

namespace {

struct Token {
    enum class Kind { number, ident, op, lparen, rparen, end };
    Kind kind;
    double number = 0.0;
    std::string text;
    int col = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        int col = static_cast<int>(pos_) + 1;
        if (pos_ >= src_.size()) return {Token::Kind::end, 0.0, "", col};
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = src_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            if (end == start) throw ParseError("malformed number", 1, col);
            pos_ += static_cast<std::size_t>(end - start);
            return {Token::Kind::number, v, "", col};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            return {Token::Kind::ident, 0.0, src_.substr(start, pos_ - start), col};
        }
        if (c == '(') { ++pos_; return {Token::Kind::lparen, 0.0, "(", col}; }
        if (c == ')') { ++pos_; return {Token::Kind::rparen, 0.0, ")", col}; }
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            ++pos_;
            return {Token::Kind::op, 0.0, std::string(1, c), col};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", 1, col);
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;
};

}  // namespace

class ExprParser {
public:
    ExprParser(const std::string& src, const std::vector<std::string>& variables)
        : lexer_(src), vars_(variables) {
        advance();
    }

    Expr run(const std::string& src) {
        Expr e;
        e.source_ = src;
        nodes_ = &e.nodes_;
        e.root_ = parse_expr();
        if (cur_.kind != Token::Kind::end)
            throw ParseError("unexpected trailing input '" + cur_.text + "'", 1, cur_.col);
        return e;
    }

private:
    using Kind = Expr::Kind;

    void advance() { cur_ = lexer_.next(); }

    int add_node(Expr::Node n) {
        nodes_->push_back(n);
        return static_cast<int>(nodes_->size()) - 1;
    }

    bool is_op(const char* t) const { return cur_.kind == Token::Kind::op && cur_.text == t; }

    int parse_expr() {
        int lhs = parse_term();
        while (is_op("+") || is_op("-")) {
            bool plus = cur_.text == "+";
            advance();
            int rhs = parse_term();
            lhs = add_node({plus ? Kind::add : Kind::sub, 0.0, -1, lhs, rhs});
        }
        return lhs;
    }

    int parse_term() {
        int lhs = parse_factor();
        while (is_op("*") || is_op("/")) {
            bool mul = cur_.text == "*";
            advance();
            int rhs = parse_factor();
            lhs = add_node({mul ? Kind::mul : Kind::div, 0.0, -1, lhs, rhs});
        }
        return lhs;
    }

    int parse_factor() {
        if (is_op("-")) {
            advance();
            int child = parse_factor();
            return add_node({Kind::neg, 0.0, -1, child, -1});
        }
        if (is_op("+")) {
            advance();
            return parse_factor();
        }
        return parse_power();
    }

    int parse_power() {
        int base = parse_atom();
        if (is_op("^")) {
            int col = cur_.col;
            advance();
            double e = parse_literal_exponent(col);
            return add_node({Kind::power, e, -1, base, -1});
        }
        return base;
    }

    // Exponents must be numeric literals, optionally signed or parenthesized.
    double parse_literal_exponent(int op_col) {
        double sign = 1.0;
        bool paren = false;
        if (cur_.kind == Token::Kind::lparen) {
            paren = true;
            advance();
        }
        if (is_op("-")) {
            sign = -1.0;
            advance();
        }
        if (cur_.kind != Token::Kind::number)
            throw ParseError("exponent must be a numeric literal", 1,
                             cur_.kind == Token::Kind::end ? op_col : cur_.col);
        double v = sign * cur_.number;
        advance();
        if (paren) {
            if (cur_.kind != Token::Kind::rparen)
                throw ParseError("expected ')' after exponent", 1, cur_.col);
            advance();
        }
        return v;
    }

    int parse_atom() {
        if (cur_.kind == Token::Kind::number) {
            double v = cur_.number;
            advance();
            return add_node({Kind::number, v, -1, -1, -1});
        }
        if (cur_.kind == Token::Kind::lparen) {
            advance();
            int inner = parse_expr();
            if (cur_.kind != Token::Kind::rparen)
                throw ParseError("expected ')'", 1, cur_.col);
            advance();
            return inner;
        }
        if (cur_.kind == Token::Kind::ident) {
            std::string name = cur_.text;
            int col = cur_.col;
            advance();
            if (cur_.kind == Token::Kind::lparen) {
                Kind fn;
                if (name == "sin") fn = Kind::sin;
                else if (name == "cos") fn = Kind::cos;
                else if (name == "exp") fn = Kind::exp;
                else throw ParseError("unknown function '" + name + "'", 1, col);
                advance();
                int arg = parse_expr();
                if (cur_.kind != Token::Kind::rparen)
                    throw ParseError("expected ')' after argument of '" + name + "'", 1, cur_.col);
                advance();
                return add_node({fn, 0.0, -1, arg, -1});
            }
            for (std::size_t i = 0; i < vars_.size(); ++i)
                if (vars_[i] == name)
                    return add_node({Kind::variable, 0.0, static_cast<int>(i), -1, -1});
            throw ParseError("unknown variable '" + name + "'", 1, col);
        }
        throw ParseError("expected a value", 1, cur_.col);
    }

    Lexer lexer_;
    Token cur_{};
    const std::vector<std::string>& vars_;
    std::vector<Expr::Node>* nodes_ = nullptr;
};

Expr Expr::parse(const std::string& src, const std::vector<std::string>& variables) {
    ExprParser p(src, variables);
    return p.run(src);
}

ScalarField make_scalar_field(const std::string& src, const std::vector<std::string>& variables) {
    Expr e = Expr::parse(src, variables);
    int arity = static_cast<int>(variables.size());
    return ScalarField(arity, [e](auto x) { return e.eval(x); });
}

VectorMap make_vector_map(const std::vector<std::string>& sources,
                          const std::vector<std::string>& variables) {
    std::vector<Expr> exprs;
    exprs.reserve(sources.size());
    for (const auto& s : sources) exprs.push_back(Expr::parse(s, variables));
    int in = static_cast<int>(variables.size());
    int out = static_cast<int>(sources.size());
    return VectorMap(in, out, [exprs](auto x) {
        using T = std::decay_t<decltype(x[0])>;
        std::vector<T> y;
        y.reserve(exprs.size());
        for (const auto& e : exprs) y.push_back(e.eval(x));
        return y;
    });
}

std::vector<std::string> config_vars(int n) {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back("q" + std::to_string(i));
    return v;
}

std::vector<std::string> phase_vars(int n) {
    std::vector<std::string> v = config_vars(n);
    for (int i = 1; i <= n; ++i) v.push_back("p" + std::to_string(i));
    return v;
}

}  // namespace magnomech
