// Closed-form scalar expressions over chart coordinates.
//
// Grammar (whitespace ignored between tokens):
//
//   expression := term { ("+" | "-") term }
//   term       := unary { ("*" | "/") unary }
//   unary      := "-" unary | power
//   power      := primary [ "^" unary ]          (right-associative)
//   primary    := number | name | func "(" expression ")" | "(" expression ")"
//   number     := digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//               | "." digits [ exponent ]
//   func       := sin | cos | tan | sqrt | exp | ln | abs
//   name       := x1 .. xN (or the chart's declared coordinate names) | pi
//
// "^" binds tighter than unary minus, so -x1^2 == -(x1^2). An exponent that
// folds to an integer constant is evaluated by repeated multiplication and is
// differentiable for any base; any other exponent requires a positive base.

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kyano/autodiff.hpp"
#include "kyano/error.hpp"

namespace kyano::expr {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Tan, Sqrt, Exp, Ln, Abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
    double value;
};
struct Variable {
    std::size_t index;  // 0-based
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
    // For Pow: the exponent folded to a constant when it contains no variables.
    std::optional<double> folded_rhs;
};
struct Negate {
    NodePtr operand;
};
struct Call {
    Function fn;
    NodePtr arg;
};

struct Node {
    std::variant<Constant, Variable, Binary, Negate, Call> data;
};

class ExpressionError : public ParseError {
public:
    enum class Kind { Syntax, UnknownFunction, UnknownName, VariableRange };
    ExpressionError(Kind kind, const std::string& what, std::size_t offset)
        : ParseError(what, offset), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Raised when evaluation touches a singular input; the message names the node.
class SingularEvaluation : public DomainError {
public:
    using DomainError::DomainError;
};

// Immutable parsed expression. Cheap to copy; nodes are shared.
class Expression {
public:
    Expression() = default;
    Expression(NodePtr root, std::vector<std::string> names);

    std::size_t dim() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const NodePtr& root() const { return root_; }

    template <typename S>
    S evaluate(std::span<const S> point) const;

    double eval(std::span<const double> point) const;
    Dual2 eval2(std::span<const double> point) const;

    // Text that parses back to an expression with identical semantics.
    std::string to_string() const;

    bool operator==(const Expression& other) const;

private:
    NodePtr root_;
    std::vector<std::string> names_;
};

using Dual2Scalar = Dual2;

// Default coordinate names x1..xdim.
std::vector<std::string> default_names(std::size_t dim);
// Phase-space names x1..xn, p1..pn.
std::vector<std::string> phase_names(std::size_t n);

// Parses with variables x1..xdim.
Expression parse_expression(std::string_view source, std::size_t dim);
// Parses with an explicit variable list; names[i] binds variable index i.
// xK (1-based, K <= names.size()) is always accepted as an alias.
Expression parse_expression(std::string_view source, std::vector<std::string> names);

Dual2 eval2(const Expression& e, std::span<const double> point);

// Pretty-prints a node using names for variables.
std::string to_string(const NodePtr& node, const std::vector<std::string>& names);

}  // namespace kyano::expr
