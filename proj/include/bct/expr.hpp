#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bct/errors.hpp"

namespace bct {

// Arithmetic expressions over the variables i, j, N used by family definition
// files, e.g. "N - floor(sqrt(N))" or "floor(N / pow(2, i))". Supported:
// + - * /, unary minus, parentheses, and floor, sqrt, log2, pow, min, max.
class expression {
public:
    struct env {
        double i = 0;
        double j = 0;
        double N = 0;
    };

    static expression parse(const std::string& text) {
        parser p{text, 0};
        expression e;
        e.root_ = p.parse_add();
        p.skip_ws();
        if (p.pos != text.size())
            throw parse_error("expression: trailing input at '" + text.substr(p.pos) + "'");
        return e;
    }

    double eval(const env& vars) const { return eval_node(*root_, vars); }

private:
    struct node {
        enum class kind { number, variable, unary_minus, add, sub, mul, div, call } k;
        double value = 0;
        std::string name;
        std::vector<std::unique_ptr<node>> args;
    };

    struct parser {
        const std::string& s;
        std::size_t pos;

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }

        bool eat(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        std::unique_ptr<node> parse_add() {
            auto lhs = parse_mul();
            for (;;) {
                if (eat('+'))
                    lhs = binary(node::kind::add, std::move(lhs), parse_mul());
                else if (eat('-'))
                    lhs = binary(node::kind::sub, std::move(lhs), parse_mul());
                else
                    return lhs;
            }
        }

        std::unique_ptr<node> parse_mul() {
            auto lhs = parse_unary();
            for (;;) {
                if (eat('*'))
                    lhs = binary(node::kind::mul, std::move(lhs), parse_unary());
                else if (eat('/'))
                    lhs = binary(node::kind::div, std::move(lhs), parse_unary());
                else
                    return lhs;
            }
        }

        std::unique_ptr<node> parse_unary() {
            if (eat('-')) {
                auto n = std::make_unique<node>();
                n->k = node::kind::unary_minus;
                n->args.push_back(parse_unary());
                return n;
            }
            return parse_primary();
        }

        std::unique_ptr<node> parse_primary() {
            skip_ws();
            if (pos >= s.size()) throw parse_error("expression: unexpected end of input");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                const double v = std::stod(s.substr(pos), &used);
                pos += used;
                auto n = std::make_unique<node>();
                n->k = node::kind::number;
                n->value = v;
                return n;
            }
            if (c == '(') {
                ++pos;
                auto inner = parse_add();
                if (!eat(')')) throw parse_error("expression: missing ')'");
                return inner;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t end = pos;
                while (end < s.size() &&
                       (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
                    ++end;
                std::string name = s.substr(pos, end - pos);
                pos = end;
                if (eat('(')) {
                    auto n = std::make_unique<node>();
                    n->k = node::kind::call;
                    n->name = std::move(name);
                    if (!eat(')')) {
                        n->args.push_back(parse_add());
                        while (eat(',')) n->args.push_back(parse_add());
                        if (!eat(')')) throw parse_error("expression: missing ')' after arguments");
                    }
                    return n;
                }
                auto n = std::make_unique<node>();
                n->k = node::kind::variable;
                n->name = std::move(name);
                return n;
            }
            throw parse_error(std::string("expression: unexpected character '") + c + "'");
        }

        static std::unique_ptr<node> binary(node::kind k, std::unique_ptr<node> a,
                                            std::unique_ptr<node> b) {
            auto n = std::make_unique<node>();
            n->k = k;
            n->args.push_back(std::move(a));
            n->args.push_back(std::move(b));
            return n;
        }
    };

    static double eval_node(const node& n, const env& vars) {
        switch (n.k) {
            case node::kind::number:
                return n.value;
            case node::kind::variable:
                if (n.name == "i") return vars.i;
                if (n.name == "j") return vars.j;
                if (n.name == "N") return vars.N;
                throw parse_error("expression: unknown variable '" + n.name + "'");
            case node::kind::unary_minus:
                return -eval_node(*n.args[0], vars);
            case node::kind::add:
                return eval_node(*n.args[0], vars) + eval_node(*n.args[1], vars);
            case node::kind::sub:
                return eval_node(*n.args[0], vars) - eval_node(*n.args[1], vars);
            case node::kind::mul:
                return eval_node(*n.args[0], vars) * eval_node(*n.args[1], vars);
            case node::kind::div:
                return eval_node(*n.args[0], vars) / eval_node(*n.args[1], vars);
            case node::kind::call: {
                auto arity = [&](std::size_t want) {
                    if (n.args.size() != want)
                        throw parse_error("expression: " + n.name + " expects " +
                                          std::to_string(want) + " argument(s)");
                };
                if (n.name == "floor") {
                    arity(1);
                    return std::floor(eval_node(*n.args[0], vars));
                }
                if (n.name == "sqrt") {
                    arity(1);
                    return std::sqrt(eval_node(*n.args[0], vars));
                }
                if (n.name == "log2") {
                    arity(1);
                    return std::log2(eval_node(*n.args[0], vars));
                }
                if (n.name == "pow") {
                    arity(2);
                    return std::pow(eval_node(*n.args[0], vars), eval_node(*n.args[1], vars));
                }
                if (n.name == "min") {
                    arity(2);
                    return std::min(eval_node(*n.args[0], vars), eval_node(*n.args[1], vars));
                }
                if (n.name == "max") {
                    arity(2);
                    return std::max(eval_node(*n.args[0], vars), eval_node(*n.args[1], vars));
                }
                throw parse_error("expression: unknown function '" + n.name + "'");
            }
        }
        return 0;  // unreachable
    }

    std::shared_ptr<node> root_;
};

}  // namespace bct
