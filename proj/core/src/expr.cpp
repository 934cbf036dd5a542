#include "adiabat/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace adiabat {

std::string_view to_string(Func f)
{
    switch (f) {
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sqrt: return "sqrt";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tan: return "tan";
    case Func::sinh: return "sinh";
    case Func::cosh: return "cosh";
    case Func::tanh: return "tanh";
    }
    return "?";
}

namespace {

std::shared_ptr<Node> make_node(NodeKind k)
{
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
}

bool is_const(const Expr& e) { return e.kind() == NodeKind::constant; }
bool is_const(const Expr& e, double v)
{
    return is_const(e) && e.node().value == cplx(v, 0.0);
}

} // namespace

Expr Expr::constant(cplx v)
{
    auto n = make_node(NodeKind::constant);
    n->value = v;
    return Expr(std::move(n));
}

Expr Expr::variable()
{
    auto n = make_node(NodeKind::variable);
    n->has_var = true;
    return Expr(std::move(n));
}

Expr Expr::neg(Expr a)
{
    auto n = make_node(NodeKind::neg);
    n->has_var = a.depends_on_s();
    n->args.push_back(std::move(a));
    return Expr(std::move(n));
}

Expr Expr::binary(NodeKind k, Expr a, Expr b)
{
    auto n = make_node(k);
    n->has_var = a.depends_on_s() || b.depends_on_s();
    n->args.push_back(std::move(a));
    n->args.push_back(std::move(b));
    return Expr(std::move(n));
}

Expr Expr::call(Func f, Expr a)
{
    auto n = make_node(NodeKind::func);
    n->func = f;
    n->has_var = a.depends_on_s();
    n->args.push_back(std::move(a));
    return Expr(std::move(n));
}

// ---------------------------------------------------------------- parsing

namespace {

class Parser {
public:
    explicit Parser(std::string_view t) : text_(t) {}

    Expr run()
    {
        Expr e = expression();
        skip_ws();
        if (pos_ != text_.size()) {
            if (text_[pos_] == ')') fail({"operator", "end of input"}, "unbalanced ')'");
            fail({"operator", "end of input"}, "unexpected character");
        }
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(std::set<std::string> expected, const std::string& msg,
                           ErrorCode code = ErrorCode::syntax)
    {
        std::string what = msg + " at offset " + std::to_string(pos_) + "; expected one of:";
        for (auto& x : expected) what += " '" + x + "'";
        throw ParseError(code, pos_, std::move(expected), what);
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                       text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expression()
    {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) lhs = Expr::binary(NodeKind::add, lhs, term());
            else if (accept('-')) lhs = Expr::binary(NodeKind::sub, lhs, term());
            else return lhs;
        }
    }

    Expr term()
    {
        Expr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = Expr::binary(NodeKind::mul, lhs, unary());
            else if (accept('/')) lhs = Expr::binary(NodeKind::div, lhs, unary());
            else return lhs;
        }
    }

    Expr unary()
    {
        if (accept('-')) return Expr::neg(unary());
        if (accept('+')) return unary();
        return power();
    }

    // '^' binds tighter than unary minus on its left and is right-associative.
    Expr power()
    {
        Expr base = primary();
        if (accept('^')) return Expr::binary(NodeKind::pow, base, unary());
        return base;
    }

    Expr primary()
    {
        skip_ws();
        static const std::set<std::string> start = {"number", "s", "pi", "function", "("};
        if (pos_ >= text_.size()) fail(start, "unexpected end of input");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expression();
            if (!accept(')')) fail({")"}, "missing ')'");
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(start, "unexpected character");
    }

    Expr number()
    {
        std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t n = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) {
            pos_ = start;
            fail({"number"}, "malformed number");
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;
        }
        double v = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (res.ec != std::errc() || !std::isfinite(v)) {
            pos_ = start;
            fail({"number"}, "number out of range");
        }
        return Expr::constant(v);
    }

    Expr identifier()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string_view id = text_.substr(start, pos_ - start);
        if (id == "s") return Expr::variable();
        if (id == "pi") return Expr::constant(std::numbers::pi);
        static const std::pair<std::string_view, Func> funcs[] = {
            {"exp", Func::exp},   {"log", Func::log},   {"sqrt", Func::sqrt},
            {"sin", Func::sin},   {"cos", Func::cos},   {"tan", Func::tan},
            {"sinh", Func::sinh}, {"cosh", Func::cosh}, {"tanh", Func::tanh},
        };
        for (auto& [name, f] : funcs) {
            if (id != name) continue;
            if (!accept('(')) fail({"("}, "function name must be followed by '('");
            Expr a = expression();
            if (!accept(')')) fail({")"}, "missing ')'");
            return Expr::call(f, a);
        }
        pos_ = start;
        fail({"s", "pi", "exp", "log", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "tanh"},
             "unknown identifier '" + std::string(id) + "'", ErrorCode::unknown_identifier);
    }
};

} // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

// ------------------------------------------------------------- evaluation

namespace {

bool integer_exponent(const Expr& ex, long& n)
{
    if (ex.depends_on_s()) return false;
    cplx v = evaluate(ex, 0.0);
    if (v.imag() != 0.0) return false;
    double r = v.real();
    if (r != std::round(r) || std::fabs(r) > 1e6) return false;
    n = static_cast<long>(r);
    return true;
}

cplx ipow(cplx a, long n)
{
    if (n < 0) {
        if (a == cplx{}) throw Error(ErrorCode::pole_at_point, "zero raised to a negative power");
        return 1.0 / ipow(a, -n);
    }
    cplx r = 1.0;
    while (n > 0) {
        if (n & 1) r *= a;
        a *= a;
        n >>= 1;
    }
    return r;
}

cplx checked(cplx v, const char* what)
{
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorCode::domain_error, std::string("non-finite result in ") + what);
    return v;
}

} // namespace

cplx evaluate(const Expr& e, cplx s)
{
    const Node& n = e.node();
    switch (n.kind) {
    case NodeKind::constant: return n.value;
    case NodeKind::variable: return s;
    case NodeKind::neg: return -evaluate(n.args[0], s);
    case NodeKind::add: return evaluate(n.args[0], s) + evaluate(n.args[1], s);
    case NodeKind::sub: return evaluate(n.args[0], s) - evaluate(n.args[1], s);
    case NodeKind::mul: return evaluate(n.args[0], s) * evaluate(n.args[1], s);
    case NodeKind::div: {
        cplx d = evaluate(n.args[1], s);
        if (std::abs(d) < 1e-300) throw Error(ErrorCode::pole_at_point, "division by zero");
        return checked(evaluate(n.args[0], s) / d, "division");
    }
    case NodeKind::pow: {
        cplx a = evaluate(n.args[0], s);
        long k = 0;
        if (integer_exponent(n.args[1], k)) return checked(ipow(a, k), "power");
        cplx p = evaluate(n.args[1], s);
        if (a == cplx{}) {
            if (p.real() > 0.0) return 0.0;
            throw Error(ErrorCode::pole_at_point, "zero raised to a non-positive power");
        }
        return checked(std::exp(p * std::log(a)), "power");
    }
    case NodeKind::func: {
        cplx a = evaluate(n.args[0], s);
        switch (n.func) {
        case Func::exp: return checked(std::exp(a), "exp");
        case Func::log:
            if (a == cplx{}) throw Error(ErrorCode::domain_error, "log(0)");
            return std::log(a);
        case Func::sqrt: return std::sqrt(a);
        case Func::sin: return checked(std::sin(a), "sin");
        case Func::cos: return checked(std::cos(a), "cos");
        case Func::tan: {
            cplx c = std::cos(a);
            if (std::abs(c) < 1e-300) throw Error(ErrorCode::pole_at_point, "tan pole");
            return checked(std::sin(a) / c, "tan");
        }
        case Func::sinh: return checked(std::sinh(a), "sinh");
        case Func::cosh: return checked(std::cosh(a), "cosh");
        case Func::tanh: {
            cplx c = std::cosh(a);
            if (std::abs(c) < 1e-300) throw Error(ErrorCode::pole_at_point, "tanh pole");
            return checked(std::sinh(a) / c, "tanh");
        }
        }
    }
    }
    throw Error(ErrorCode::domain_error, "corrupt expression node");
}

// -------------------------------------------------------- differentiation

namespace {

Expr C(cplx v) { return Expr::constant(v); }

Expr add(const Expr& a, const Expr& b)
{
    if (is_const(a) && is_const(b)) return C(a.node().value + b.node().value);
    if (is_const(a, 0)) return b;
    if (is_const(b, 0)) return a;
    return Expr::binary(NodeKind::add, a, b);
}

Expr neg(const Expr& a)
{
    if (is_const(a)) return C(-a.node().value);
    if (a.kind() == NodeKind::neg) return a.arg(0);
    return Expr::neg(a);
}

Expr sub(const Expr& a, const Expr& b)
{
    if (is_const(a) && is_const(b)) return C(a.node().value - b.node().value);
    if (is_const(b, 0)) return a;
    if (is_const(a, 0)) return neg(b);
    return Expr::binary(NodeKind::sub, a, b);
}

Expr mul(const Expr& a, const Expr& b)
{
    if (is_const(a) && is_const(b)) return C(a.node().value * b.node().value);
    if (is_const(a, 0) || is_const(b, 0)) return C(0.0);
    if (is_const(a, 1)) return b;
    if (is_const(b, 1)) return a;
    if (is_const(a, -1)) return neg(b);
    if (is_const(b, -1)) return neg(a);
    return Expr::binary(NodeKind::mul, a, b);
}

Expr div(const Expr& a, const Expr& b)
{
    if (is_const(a, 0)) return C(0.0);
    if (is_const(b, 1)) return a;
    if (is_const(a) && is_const(b) && b.node().value != cplx{})
        return C(a.node().value / b.node().value);
    return Expr::binary(NodeKind::div, a, b);
}

Expr pw(const Expr& a, const Expr& b)
{
    if (is_const(b, 1)) return a;
    if (is_const(b, 0)) return C(1.0);
    return Expr::binary(NodeKind::pow, a, b);
}

Expr fn(Func f, const Expr& a) { return Expr::call(f, a); }

} // namespace

Expr differentiate(const Expr& e)
{
    if (!e.depends_on_s()) return C(0.0);
    const Node& n = e.node();
    switch (n.kind) {
    case NodeKind::constant: return C(0.0);
    case NodeKind::variable: return C(1.0);
    case NodeKind::neg: return neg(differentiate(n.args[0]));
    case NodeKind::add: return add(differentiate(n.args[0]), differentiate(n.args[1]));
    case NodeKind::sub: return sub(differentiate(n.args[0]), differentiate(n.args[1]));
    case NodeKind::mul: {
        const Expr &u = n.args[0], &v = n.args[1];
        return add(mul(differentiate(u), v), mul(u, differentiate(v)));
    }
    case NodeKind::div: {
        const Expr &u = n.args[0], &v = n.args[1];
        if (!v.depends_on_s()) return div(differentiate(u), v);
        return div(sub(mul(differentiate(u), v), mul(u, differentiate(v))), pw(v, C(2.0)));
    }
    case NodeKind::pow: {
        const Expr &u = n.args[0], &v = n.args[1];
        if (!v.depends_on_s()) {
            cplx p = evaluate(v, 0.0);
            return mul(mul(C(p), pw(u, C(p - 1.0))), differentiate(u));
        }
        // u^v (v' log u + v u'/u)
        Expr t = add(mul(differentiate(v), fn(Func::log, u)),
                     div(mul(v, differentiate(u)), u));
        return mul(e, t);
    }
    case NodeKind::func: {
        const Expr& u = n.args[0];
        Expr du = differentiate(u);
        Expr outer;
        switch (n.func) {
        case Func::exp: outer = e; break;
        case Func::log: return div(du, u);
        case Func::sqrt: return div(du, mul(C(2.0), e));
        case Func::sin: outer = fn(Func::cos, u); break;
        case Func::cos: outer = neg(fn(Func::sin, u)); break;
        case Func::tan: outer = div(C(1.0), pw(fn(Func::cos, u), C(2.0))); break;
        case Func::sinh: outer = fn(Func::cosh, u); break;
        case Func::cosh: outer = fn(Func::sinh, u); break;
        case Func::tanh: outer = div(C(1.0), pw(fn(Func::cosh, u), C(2.0))); break;
        }
        return mul(outer, du);
    }
    }
    return C(0.0);
}

// ---------------------------------------------------------------- printing

namespace {

std::string fmt_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_const(cplx v)
{
    std::string re = v.real() < 0 ? "(-" + fmt_real(-v.real()) + ")" : fmt_real(v.real());
    if (v.imag() == 0.0) return re;
    std::string im = v.imag() < 0 ? "(-" + fmt_real(-v.imag()) + ")" : fmt_real(v.imag());
    return "(" + re + "+" + im + "*sqrt(-1))";
}

} // namespace

std::string print(const Expr& e)
{
    const Node& n = e.node();
    switch (n.kind) {
    case NodeKind::constant: return fmt_const(n.value);
    case NodeKind::variable: return "s";
    case NodeKind::neg: return "(-" + print(n.args[0]) + ")";
    case NodeKind::add: return "(" + print(n.args[0]) + "+" + print(n.args[1]) + ")";
    case NodeKind::sub: return "(" + print(n.args[0]) + "-" + print(n.args[1]) + ")";
    case NodeKind::mul: return "(" + print(n.args[0]) + "*" + print(n.args[1]) + ")";
    case NodeKind::div: return "(" + print(n.args[0]) + "/" + print(n.args[1]) + ")";
    case NodeKind::pow: return "(" + print(n.args[0]) + "^" + print(n.args[1]) + ")";
    case NodeKind::func: return std::string(to_string(n.func)) + "(" + print(n.args[0]) + ")";
    }
    return "?";
}

bool structurally_equal(const Expr& a, const Expr& b)
{
    const Node &x = a.node(), &y = b.node();
    if (x.kind != y.kind) return false;
    if (x.kind == NodeKind::constant) return x.value == y.value;
    if (x.kind == NodeKind::func && x.func != y.func) return false;
    if (x.args.size() != y.args.size()) return false;
    for (std::size_t i = 0; i < x.args.size(); ++i)
        if (!structurally_equal(x.args[i], y.args[i])) return false;
    return true;
}

bool is_branch_sensitive(const Expr& e)
{
    const Node& n = e.node();
    if (n.kind == NodeKind::func && (n.func == Func::sqrt || n.func == Func::log)) return true;
    if (n.kind == NodeKind::pow) {
        long k = 0;
        if (!integer_exponent(n.args[1], k)) return true;
    }
    for (auto& a : n.args)
        if (is_branch_sensitive(a)) return true;
    return false;
}

std::size_t node_count(const Expr& e)
{
    std::size_t c = 1;
    for (auto& a : e.node().args) c += node_count(a);
    return c;
}

} // namespace adiabat
