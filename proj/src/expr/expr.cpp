#include "kyano/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <string>
#include <utility>

namespace kyano::expr {

namespace {

struct FunctionName {
    std::string_view name;
    Function fn;
};

constexpr std::array<FunctionName, 7> kFunctions{{
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"tan", Function::Tan},
    {"sqrt", Function::Sqrt},
    {"exp", Function::Exp},
    {"ln", Function::Ln},
    {"abs", Function::Abs},
}};

std::string_view function_name(Function fn) {
    for (const auto& f : kFunctions) {
        if (f.fn == fn) return f.name;
    }
    return "?";
}

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

bool has_variables(const NodePtr& n) {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return false;
            } else if constexpr (std::is_same_v<T, Variable>) {
                return true;
            } else if constexpr (std::is_same_v<T, Binary>) {
                return has_variables(v.lhs) || has_variables(v.rhs);
            } else if constexpr (std::is_same_v<T, Negate>) {
                return has_variables(v.operand);
            } else {
                return has_variables(v.arg);
            }
        },
        n->data);
}

bool is_indexed_x(const std::string& id) {
    return id.size() > 1 && id[0] == 'x' && id.find_first_not_of("0123456789", 1) == std::string::npos;
}

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& names) : src_(src), names_(names) {}

    NodePtr parse() {
        skip_ws();
        if (pos_ >= src_.size()) fail("empty expression");
        NodePtr root = expression();
        skip_ws();
        if (pos_ < src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ExpressionError(ExpressionError::Kind::Syntax, "syntax error: " + msg, pos_);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = make({Binary{BinaryOp::Add, lhs, term(), std::nullopt}});
            } else if (accept('-')) {
                lhs = make({Binary{BinaryOp::Sub, lhs, term(), std::nullopt}});
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = make({Binary{BinaryOp::Mul, lhs, unary(), std::nullopt}});
            } else if (accept('/')) {
                lhs = make({Binary{BinaryOp::Div, lhs, unary(), std::nullopt}});
            } else {
                return lhs;
            }
        }
    }

    NodePtr unary() {
        if (accept('-')) return make({Negate{unary()}});
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) {
            NodePtr exponent = unary();
            std::optional<double> folded;
            if (!has_variables(exponent)) {
                Expression tmp(exponent, {});
                folded = tmp.eval(std::span<const double>{});
            }
            return make({Binary{BinaryOp::Pow, base, exponent, folded}});
        }
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = expression();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) {
            pos_ = start;
            fail("malformed number");
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) fail("malformed exponent");
        }
        const std::string text(src_.substr(start, pos_ - start));
        return make({Constant{std::strtod(text.c_str(), nullptr)}});
    }

    NodePtr name() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string id(src_.substr(start, pos_ - start));

        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            for (const auto& f : kFunctions) {
                if (f.name == id) {
                    ++pos_;
                    NodePtr arg = expression();
                    if (!accept(')')) fail("expected ')'");
                    return make({Call{f.fn, arg}});
                }
            }
            throw ExpressionError(ExpressionError::Kind::UnknownFunction, "unknown function '" + id + "'",
                                  start);
        }

        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == id) return make({Variable{i}});
        }
        if (is_indexed_x(id)) {
            // xK aliases the K-th coordinate only for charts with named coordinates.
            const bool x_named = std::any_of(names_.begin(), names_.end(), is_indexed_x);
            const unsigned long k = std::strtoul(id.c_str() + 1, nullptr, 10);
            if (!x_named && k >= 1 && k <= names_.size()) return make({Variable{k - 1}});
            throw ExpressionError(ExpressionError::Kind::VariableRange,
                                  "variable '" + id + "' exceeds chart dimension " +
                                      std::to_string(names_.size()),
                                  start);
        }
        if (id == "pi") return make({Constant{std::numbers::pi}});
        throw ExpressionError(ExpressionError::Kind::UnknownName, "unknown name '" + id + "'", start);
    }

    std::string_view src_;
    const std::vector<std::string>& names_;
    std::size_t pos_ = 0;
};

int precedence(const NodePtr& n) {
    if (const auto* b = std::get_if<Binary>(&n->data)) {
        switch (b->op) {
            case BinaryOp::Add:
            case BinaryOp::Sub:
                return 1;
            case BinaryOp::Mul:
            case BinaryOp::Div:
                return 2;
            case BinaryOp::Pow:
                return 4;
        }
    }
    if (std::holds_alternative<Negate>(n->data)) return 3;
    if (const auto* c = std::get_if<Constant>(&n->data)) return c->value < 0 ? 3 : 5;
    return 5;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s == "inf" || s == "-inf" || s == "nan") return "(" + s + ")";
    return s;
}

std::string wrap(const std::string& s, bool paren) { return paren ? "(" + s + ")" : s; }

[[noreturn]] void singular(const NodePtr& node, const std::vector<std::string>& names, const char* what) {
    throw SingularEvaluation(std::string(what) + " in '" + to_string(node, names) + "'");
}

template <typename S>
S eval_node(const NodePtr& node, std::span<const S> x, const std::vector<std::string>& names) {
    return std::visit(
        [&](const auto& v) -> S {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return S(v.value);
            } else if constexpr (std::is_same_v<T, Variable>) {
                return x[v.index];
            } else if constexpr (std::is_same_v<T, Negate>) {
                return -eval_node<S>(v.operand, x, names);
            } else if constexpr (std::is_same_v<T, Binary>) {
                const S a = eval_node<S>(v.lhs, x, names);
                switch (v.op) {
                    case BinaryOp::Add:
                        return a + eval_node<S>(v.rhs, x, names);
                    case BinaryOp::Sub:
                        return a - eval_node<S>(v.rhs, x, names);
                    case BinaryOp::Mul:
                        return a * eval_node<S>(v.rhs, x, names);
                    case BinaryOp::Div: {
                        const S b = eval_node<S>(v.rhs, x, names);
                        if (value(b) == 0.0) singular(node, names, "division by zero");
                        return a / b;
                    }
                    case BinaryOp::Pow: {
                        if (v.folded_rhs) {
                            const double y = *v.folded_rhs;
                            if (std::nearbyint(y) == y && std::abs(y) < 9.0e15) {
                                const auto k = static_cast<long long>(y);
                                if (k < 0 && value(a) == 0.0) singular(node, names, "negative power of zero");
                                return ipow(a, k);
                            }
                            if (!(value(a) > 0.0)) {
                                singular(node, names, "non-integer power of nonpositive base");
                            }
                            if constexpr (std::is_same_v<S, double>) {
                                return std::pow(a, y);
                            } else {
                                return pow(a, y);
                            }
                        }
                        if (!(value(a) > 0.0)) singular(node, names, "variable power of nonpositive base");
                        using std::exp;
                        using std::log;
                        return exp(eval_node<S>(v.rhs, x, names) * log(a));
                    }
                }
                singular(node, names, "unknown operator");
            } else {
                using std::abs;
                using std::cos;
                using std::exp;
                using std::log;
                using std::sin;
                using std::sqrt;
                using std::tan;
                const S a = eval_node<S>(v.arg, x, names);
                switch (v.fn) {
                    case Function::Sin:
                        return sin(a);
                    case Function::Cos:
                        return cos(a);
                    case Function::Tan:
                        if (std::cos(value(a)) == 0.0) singular(node, names, "tan pole");
                        return tan(a);
                    case Function::Sqrt:
                        if (value(a) < 0.0) singular(node, names, "sqrt of negative argument");
                        if constexpr (!std::is_same_v<S, double>) {
                            if (value(a) == 0.0) singular(node, names, "sqrt not differentiable at zero");
                        }
                        return sqrt(a);
                    case Function::Exp:
                        return exp(a);
                    case Function::Ln:
                        if (!(value(a) > 0.0)) singular(node, names, "ln of nonpositive argument");
                        return log(a);
                    case Function::Abs:
                        return abs(a);
                }
                singular(node, names, "unknown function");
            }
        },
        node->data);
}

}  // namespace

Expression::Expression(NodePtr root, std::vector<std::string> names)
    : root_(std::move(root)), names_(std::move(names)) {}

template <typename S>
S Expression::evaluate(std::span<const S> point) const {
    if (point.size() != names_.size()) {
        throw ShapeError("expression expects " + std::to_string(names_.size()) + " coordinates, got " +
                         std::to_string(point.size()));
    }
    return eval_node<S>(root_, point, names_);
}

template double Expression::evaluate<double>(std::span<const double>) const;
template Jet Expression::evaluate<Jet>(std::span<const Jet>) const;
template Dual2 Expression::evaluate<Dual2>(std::span<const Dual2>) const;

double Expression::eval(std::span<const double> point) const { return evaluate<double>(point); }

Dual2 Expression::eval2(std::span<const double> point) const {
    std::vector<Dual2> vars;
    vars.reserve(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) vars.push_back(Dual2::variable(point[i], i, point.size()));
    return evaluate<Dual2>(std::span<const Dual2>(vars));
}

std::string Expression::to_string() const { return expr::to_string(root_, names_); }

bool Expression::operator==(const Expression& other) const {
    return names_ == other.names_ && to_string() == other.to_string();
}

std::vector<std::string> default_names(std::size_t dim) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= dim; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

std::vector<std::string> phase_names(std::size_t n) {
    std::vector<std::string> names = default_names(n);
    for (std::size_t i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
    return names;
}

Expression parse_expression(std::string_view source, std::size_t dim) {
    return parse_expression(source, default_names(dim));
}

Expression parse_expression(std::string_view source, std::vector<std::string> names) {
    Parser parser(source, names);
    NodePtr root = parser.parse();
    return Expression(std::move(root), std::move(names));
}

Dual2 eval2(const Expression& e, std::span<const double> point) { return e.eval2(point); }

std::string to_string(const NodePtr& node, const std::vector<std::string>& names) {
    return std::visit(
        [&](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return format_number(v.value);
            } else if constexpr (std::is_same_v<T, Variable>) {
                return v.index < names.size() ? names[v.index] : "x" + std::to_string(v.index + 1);
            } else if constexpr (std::is_same_v<T, Negate>) {
                return "-" + wrap(to_string(v.operand, names), precedence(v.operand) < 3);
            } else if constexpr (std::is_same_v<T, Binary>) {
                const int p = precedence(node);
                const std::string l = to_string(v.lhs, names);
                const std::string r = to_string(v.rhs, names);
                switch (v.op) {
                    case BinaryOp::Add:
                        return wrap(l, precedence(v.lhs) < p) + " + " + wrap(r, precedence(v.rhs) <= p);
                    case BinaryOp::Sub:
                        return wrap(l, precedence(v.lhs) < p) + " - " + wrap(r, precedence(v.rhs) <= p);
                    case BinaryOp::Mul:
                        return wrap(l, precedence(v.lhs) < p) + "*" + wrap(r, precedence(v.rhs) <= p);
                    case BinaryOp::Div:
                        return wrap(l, precedence(v.lhs) < p) + "/" + wrap(r, precedence(v.rhs) <= p);
                    case BinaryOp::Pow:
                        return wrap(l, precedence(v.lhs) <= p) + "^" + wrap(r, precedence(v.rhs) < 3);
                }
                return "?";
            } else {
                return std::string(function_name(v.fn)) + "(" + to_string(v.arg, names) + ")";
            }
        },
        node->data);
}

}  // namespace kyano::expr
