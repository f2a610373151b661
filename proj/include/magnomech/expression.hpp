#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "magnomech/errors.hpp"
#include "magnomech/smooth_fn.hpp"

namespace magnomech {

// Whitelisted expression language for scenario files: + - * /, ^ with a
// numeric literal exponent, sin, cos, exp, parentheses, named variables.
class Expr {
public:
    static Expr parse(const std::string& src, const std::vector<std::string>& variables);

    template <class T>
    T eval(std::span<const T> values) const {
        return eval_node<T>(root_, values);
    }

    const std::string& source() const { return source_; }

private:
    enum class Kind { number, variable, add, sub, mul, div, neg, power, sin, cos, exp };

    struct Node {
        Kind kind;
        double number = 0.0;   // literal value or exponent
        int var = -1;
        int lhs = -1;
        int rhs = -1;
    };

    template <class T>
    T eval_node(int idx, std::span<const T> values) const {
        const Node& n = nodes_[idx];
        switch (n.kind) {
            case Kind::number: return T(n.number);
            case Kind::variable: return values[n.var];
            case Kind::add: return eval_node<T>(n.lhs, values) + eval_node<T>(n.rhs, values);
            case Kind::sub: return eval_node<T>(n.lhs, values) - eval_node<T>(n.rhs, values);
            case Kind::mul: return eval_node<T>(n.lhs, values) * eval_node<T>(n.rhs, values);
            case Kind::div: return eval_node<T>(n.lhs, values) / eval_node<T>(n.rhs, values);
            case Kind::neg: return -eval_node<T>(n.lhs, values);
            case Kind::power: {
                T base = eval_node<T>(n.lhs, values);
                using std::pow;
                double c = n.number;
                if (c == std::round(c) && std::abs(c) <= 16.0) {
                    // integer powers by repeated multiplication, valid for any base
                    int e = static_cast<int>(std::round(c));
                    bool inv = e < 0;
                    e = std::abs(e);
                    T acc(1.0);
                    for (int i = 0; i < e; ++i) acc = acc * base;
                    return inv ? T(1.0) / acc : acc;
                }
                return pow(base, c);
            }
            case Kind::sin: {
                using std::sin;
                return sin(eval_node<T>(n.lhs, values));
            }
            case Kind::cos: {
                using std::cos;
                return cos(eval_node<T>(n.lhs, values));
            }
            case Kind::exp: {
                using std::exp;
                return exp(eval_node<T>(n.lhs, values));
            }
        }
        throw NumericError("expression: corrupt node");
    }

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string source_;

    friend class ExprParser;
};

// Convenience builders binding variable order to the evaluation span.
ScalarField make_scalar_field(const std::string& src, const std::vector<std::string>& variables);
VectorMap make_vector_map(const std::vector<std::string>& sources,
                          const std::vector<std::string>& variables);

// Standard variable name lists: q1..qn, or q1..qn,p1..pn.
std::vector<std::string> config_vars(int n);
std::vector<std::string> phase_vars(int n);

}  // namespace magnomech
