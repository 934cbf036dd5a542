#pragma once

// Small expression language for field components: one complex variable `s`,
// + - * / ^, unary minus, and a fixed set of elementary functions.

#include "adiabat/error.hpp"

#include <complex>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace adiabat {

using cplx = std::complex<double>;

enum class NodeKind { constant, variable, neg, add, sub, mul, div, pow, func };

enum class Func { exp, log, sqrt, sin, cos, tan, sinh, cosh, tanh };

std::string_view to_string(Func f);

class Expr;

struct Node {
    NodeKind kind;
    cplx value{};             // constant
    Func func = Func::exp;    // func
    std::vector<Expr> args;   // operands
    bool has_var = false;
};

class Expr {
public:
    Expr() = default;
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static Expr constant(cplx v);
    static Expr variable();
    static Expr neg(Expr a);
    static Expr binary(NodeKind k, Expr a, Expr b);
    static Expr call(Func f, Expr a);

    bool valid() const { return node_ != nullptr; }
    NodeKind kind() const { return node_->kind; }
    const Node& node() const { return *node_; }
    const Expr& arg(std::size_t i) const { return node_->args.at(i); }
    bool depends_on_s() const { return node_->has_var; }

private:
    std::shared_ptr<const Node> node_;
};

class ParseError : public Error {
public:
    ParseError(ErrorCode code, std::size_t offset, std::set<std::string> expected,
               const std::string& what)
        : Error(code, what), offset_(offset), expected_(std::move(expected)) {}
    std::size_t offset() const noexcept { return offset_; }
    const std::set<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::set<std::string> expected_;
};

Expr parse(std::string_view text);

// Principal branches everywhere; integer powers are exact repeated products.
cplx evaluate(const Expr& e, cplx s);

// Symbolic d/ds with constant folding and 0/1 elimination.
Expr differentiate(const Expr& e);

// Fully parenthesised; parse(print(e)) is structurally equal to e for trees
// whose constants are real and non-negative (the parser never makes others).
std::string print(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

// True if evaluation involves a non-integer power, sqrt or log.
bool is_branch_sensitive(const Expr& e);

std::size_t node_count(const Expr& e);

} // namespace adiabat
