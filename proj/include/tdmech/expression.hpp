#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

#include "tdmech/coefficients.hpp"

namespace tdmech {

/// Malformed expression text (syntax, unknown name, non-constant exponent).
class ExprError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Closed-form expression over t, x0..x7, y0..y7 with +, -, *, /, ^ (constant
/// exponent), parentheses and the functions sin, cos, exp. This is the whole
/// vocabulary configs may use; anything richer belongs in code.
class Expression {
public:
    static Expression parse(const std::string& text);

    /// Highest variable slot referenced, for dimension validation.
    int max_x_index() const { return max_x_; }
    int max_y_index() const { return max_y_; }
    bool uses_t() const { return uses_t_; }

    void require_dimension(std::size_t n) const {
        if (max_x_ >= static_cast<int>(n) || max_y_ >= static_cast<int>(n))
            throw ValidationError("expression references a coordinate beyond the configured dimension");
    }

    template <class S>
    S eval(const S& t, std::span<const S> x, std::span<const S> y) const {
        return eval_node<S>(root_, t, x, y);
    }

    const std::string& text() const { return text_; }

private:
    enum class Op { constant, var_t, var_x, var_y, add, sub, mul, div, neg, pow_const, sin_fn, cos_fn, exp_fn };

    struct Node {
        Op op;
        int a = -1, b = -1;   // child indices
        double value = 0.0;   // constant or exponent
        int index = 0;        // coordinate slot
    };

    template <class S>
    S eval_node(int id, const S& t, std::span<const S> x, std::span<const S> y) const {
        const Node& nd = nodes_[static_cast<std::size_t>(id)];
        switch (nd.op) {
            case Op::constant: return S(nd.value);
            case Op::var_t: return t;
            case Op::var_x: return x[static_cast<std::size_t>(nd.index)];
            case Op::var_y: return y[static_cast<std::size_t>(nd.index)];
            case Op::add: return eval_node<S>(nd.a, t, x, y) + eval_node<S>(nd.b, t, x, y);
            case Op::sub: return eval_node<S>(nd.a, t, x, y) - eval_node<S>(nd.b, t, x, y);
            case Op::mul: return eval_node<S>(nd.a, t, x, y) * eval_node<S>(nd.b, t, x, y);
            case Op::div: return eval_node<S>(nd.a, t, x, y) / eval_node<S>(nd.b, t, x, y);
            case Op::neg: return -eval_node<S>(nd.a, t, x, y);
            case Op::pow_const: return pow(eval_node<S>(nd.a, t, x, y), nd.value);
            case Op::sin_fn: return sin(eval_node<S>(nd.a, t, x, y));
            case Op::cos_fn: return cos(eval_node<S>(nd.a, t, x, y));
            case Op::exp_fn: return exp(eval_node<S>(nd.a, t, x, y));
        }
        throw ExprError("corrupt expression tree");
    }

    // ----- recursive-descent parser -----

    struct Parser {
        const std::string& s;
        std::size_t pos = 0;
        Expression* out;

        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool eat(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) { ++pos; return true; }
            return false;
        }
        [[noreturn]] void fail(const std::string& what) const {
            throw ExprError(what + " at position " + std::to_string(pos) + " in '" + s + "'");
        }

        int push(Expression::Node nd) {
            out->nodes_.push_back(nd);
            return static_cast<int>(out->nodes_.size()) - 1;
        }

        int expr() {
            int lhs = term();
            for (;;) {
                if (eat('+')) lhs = push({Op::add, lhs, term()});
                else if (eat('-')) lhs = push({Op::sub, lhs, term()});
                else return lhs;
            }
        }
        int term() {
            int lhs = unary();
            for (;;) {
                if (eat('*')) lhs = push({Op::mul, lhs, unary()});
                else if (eat('/')) lhs = push({Op::div, lhs, unary()});
                else return lhs;
            }
        }
        int unary() {
            if (eat('-')) return push({Op::neg, unary()});
            return power();
        }
        int power() {
            int base = atom();
            if (eat('^')) {
                int ex = unary();
                if (!constant_subtree(ex)) fail("exponent must be a constant");
                Node nd{Op::pow_const, base};
                nd.value = fold(ex);
                return push(nd);
            }
            return base;
        }
        int atom() {
            skip();
            if (pos >= s.size()) fail("unexpected end of expression");
            char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                double v = std::strtod(begin, &end);
                if (end == begin) fail("malformed number");
                pos += static_cast<std::size_t>(end - begin);
                Node nd{Op::constant};
                nd.value = v;
                return push(nd);
            }
            if (c == '(') {
                ++pos;
                int inner = expr();
                if (!eat(')')) fail("expected ')'");
                return inner;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos;
                while (pos < s.size() &&
                       (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                    ++pos;
                std::string name = s.substr(start, pos - start);
                if (name == "t") {
                    out->uses_t_ = true;
                    return push({Op::var_t});
                }
                if (auto idx = coordinate(name, 'x')) {
                    out->max_x_ = std::max(out->max_x_, *idx);
                    Node nd{Op::var_x};
                    nd.index = *idx;
                    return push(nd);
                }
                if (auto idx = coordinate(name, 'y')) {
                    out->max_y_ = std::max(out->max_y_, *idx);
                    Node nd{Op::var_y};
                    nd.index = *idx;
                    return push(nd);
                }
                Op fn;
                if (name == "sin") fn = Op::sin_fn;
                else if (name == "cos") fn = Op::cos_fn;
                else if (name == "exp") fn = Op::exp_fn;
                else fail("unknown name '" + name + "'");
                if (!eat('(')) fail("expected '(' after function name");
                int arg = expr();
                if (!eat(')')) fail("expected ')'");
                return push({fn, arg});
            }
            fail(std::string("unexpected character '") + c + "'");
        }

        static std::optional<int> coordinate(const std::string& name, char axis) {
            if (name.size() == 1 && name[0] == axis) return 0;  // x, y alias x0, y0
            if (name.size() >= 2 && name[0] == axis) {
                for (std::size_t i = 1; i < name.size(); ++i)
                    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return std::nullopt;
                int idx = std::stoi(name.substr(1));
                if (idx < 0 || idx > 7) return std::nullopt;
                return idx;
            }
            return std::nullopt;
        }

        bool constant_subtree(int id) const {
            const Node& nd = out->nodes_[static_cast<std::size_t>(id)];
            switch (nd.op) {
                case Op::constant: return true;
                case Op::var_t:
                case Op::var_x:
                case Op::var_y: return false;
                case Op::neg:
                case Op::pow_const:
                case Op::sin_fn:
                case Op::cos_fn:
                case Op::exp_fn: return constant_subtree(nd.a);
                default: return constant_subtree(nd.a) && constant_subtree(nd.b);
            }
        }
        double fold(int id) const {
            std::vector<double> none;
            return out->eval_node<double>(id, 0.0, std::span<const double>(none.data(), 0),
                                          std::span<const double>(none.data(), 0));
        }
    };

    std::vector<Node> nodes_;
    int root_ = -1;
    int max_x_ = -1, max_y_ = -1;
    bool uses_t_ = false;
    std::string text_;
};

inline Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    Parser p{text, 0, &e};
    e.root_ = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    return e;
}

/// Lagrangian L(t, x, y) from expression text.
inline ScalarField expression_scalar_field(const Expression& e, std::size_t n, Box domain) {
    e.require_dimension(n);
    return ScalarField(n, std::move(domain), [e](const auto& t, auto x, auto y) { return e.eval(t, x, y); });
}

/// Covector field (t, x, y) -> R^n from one expression per component.
inline ExternalForce expression_force(const std::vector<Expression>& comps, std::size_t n, Box domain) {
    if (comps.size() != n) throw ValidationError("force needs one expression per coordinate");
    for (const Expression& e : comps) e.require_dimension(n);
    return ExternalForce::from_generic(n, std::move(domain), [comps](const auto& t, auto x, auto y, auto out) {
        for (std::size_t i = 0; i < comps.size(); ++i) out[i] = comps[i].eval(t, x, y);
    });
}

/// Constraint map c(x) from one expression per level-set component; the
/// expressions may reference x only.
inline VectorMap expression_constraint_map(const std::vector<Expression>& comps, std::size_t n, Box domain) {
    for (const Expression& e : comps) {
        e.require_dimension(n);
        if (e.uses_t() || e.max_y_index() >= 0)
            throw ValidationError("constraint expressions may reference x coordinates only");
    }
    const std::size_t k = comps.size();
    return VectorMap(n, k, std::move(domain), [comps, k](auto in, auto out) {
        using S = std::remove_cvref_t<decltype(in[0])>;
        std::vector<S> none;
        S t = S(0.0);
        for (std::size_t i = 0; i < k; ++i)
            out[i] = comps[i].eval(t, in, std::span<const S>(none.data(), 0));
    });
}

/// Semispray coefficients from expressions (used for user-supplied pairs in
/// compatibility audits).
inline SemisprayField expression_spray(const std::vector<Expression>& comps, std::string chart,
                                       std::size_t n, Box domain) {
    if (comps.size() != n) throw ValidationError("spray needs one expression per coordinate");
    for (const Expression& e : comps) e.require_dimension(n);
    return SemisprayField::from_generic(std::move(chart), n, std::move(domain), Provenance::user,
                                        [comps](const auto& t, auto x, auto y, auto out) {
                                            for (std::size_t i = 0; i < comps.size(); ++i)
                                                out[i] = comps[i].eval(t, x, y);
                                        });
}

}  // namespace tdmech
