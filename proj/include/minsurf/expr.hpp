#pragma once

// Closed-form expression trees over one complex variable (the coordinate zeta).
// Trees support symbolic differentiation, a light algebraic simplifier,
// substitution (composition), a text parser, JSON round-tripping, and
// compilation to a flat stack program for fast evaluation.

#include "errors.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace minsurf {

using cplx = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Exp, Log, Sin, Cos, Sinh, Cosh, PowInt, Pow };

class Expr {
public:
    struct Node {
        Op op = Op::Const;
        cplx value{};   // Const value, or the exponent of Pow
        int exponent = 0; // PowInt
        std::vector<Expr> args;
    };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(cplx c) { return Expr(make(Op::Const, c, 0, {})); }
    static Expr var() { return Expr(make(Op::Var, {}, 0, {})); }
    static Expr unary(Op op, Expr a) { return Expr(make(op, {}, 0, {std::move(a)})); }
    static Expr binary(Op op, Expr a, Expr b) { return Expr(make(op, {}, 0, {std::move(a), std::move(b)})); }
    static Expr powi(Expr a, int k) { return Expr(make(Op::PowInt, {}, k, {std::move(a)})); }
    static Expr pow(Expr a, cplx c) { return Expr(make(Op::Pow, c, 0, {std::move(a)})); }

    Op op() const { return node_->op; }
    cplx value() const { return node_->value; }
    int exponent() const { return node_->exponent; }
    const std::vector<Expr>& args() const { return node_->args; }
    const Expr& arg(std::size_t i) const { return node_->args.at(i); }

    bool is_const() const { return op() == Op::Const; }
    bool is_const(cplx c) const { return is_const() && value() == c; }
    /// True when the tree does not depend on zeta.
    bool is_constant_tree() const {
        if (op() == Op::Var) return false;
        for (const auto& a : args())
            if (!a.is_constant_tree()) return false;
        return true;
    }

    /// Direct tree-walking evaluation; prefer Program for hot loops.
    cplx eval(cplx z) const {
        const auto& a = args();
        switch (op()) {
        case Op::Const: return value();
        case Op::Var: return z;
        case Op::Add: return a[0].eval(z) + a[1].eval(z);
        case Op::Sub: return a[0].eval(z) - a[1].eval(z);
        case Op::Mul: return a[0].eval(z) * a[1].eval(z);
        case Op::Div: return a[0].eval(z) / a[1].eval(z);
        case Op::Neg: return -a[0].eval(z);
        case Op::Exp: return std::exp(a[0].eval(z));
        case Op::Log: return std::log(a[0].eval(z));
        case Op::Sin: return std::sin(a[0].eval(z));
        case Op::Cos: return std::cos(a[0].eval(z));
        case Op::Sinh: return std::sinh(a[0].eval(z));
        case Op::Cosh: return std::cosh(a[0].eval(z));
        case Op::PowInt: return ipow(a[0].eval(z), exponent());
        case Op::Pow: return std::pow(a[0].eval(z), value());
        }
        return {};
    }

    static cplx ipow(cplx base, int k) {
        if (k < 0) return 1.0 / ipow(base, -k);
        cplx result = 1.0;
        while (k > 0) {
            if (k & 1) result *= base;
            base *= base;
            k >>= 1;
        }
        return result;
    }

    std::string to_string() const;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static std::shared_ptr<const Node> make(Op op, cplx v, int k, std::vector<Expr> args) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->value = v;
        n->exponent = k;
        n->args = std::move(args);
        return n;
    }

    std::shared_ptr<const Node> node_;
};

inline Expr operator+(Expr a, Expr b) { return Expr::binary(Op::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::binary(Op::Sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::binary(Op::Mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return Expr::binary(Op::Div, std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return Expr::unary(Op::Neg, std::move(a)); }
inline Expr operator+(cplx a, Expr b) { return Expr::constant(a) + std::move(b); }
inline Expr operator*(cplx a, Expr b) { return Expr::constant(a) * std::move(b); }
inline Expr operator/(cplx a, Expr b) { return Expr::constant(a) / std::move(b); }
inline Expr operator-(cplx a, Expr b) { return Expr::constant(a) - std::move(b); }
inline Expr operator+(Expr a, cplx b) { return std::move(a) + Expr::constant(b); }
inline Expr operator*(Expr a, cplx b) { return std::move(a) * Expr::constant(b); }
inline Expr operator-(Expr a, cplx b) { return std::move(a) - Expr::constant(b); }
inline Expr operator/(Expr a, cplx b) { return std::move(a) / Expr::constant(b); }
inline Expr exp(Expr a) { return Expr::unary(Op::Exp, std::move(a)); }
inline Expr log(Expr a) { return Expr::unary(Op::Log, std::move(a)); }
inline Expr sin(Expr a) { return Expr::unary(Op::Sin, std::move(a)); }
inline Expr cos(Expr a) { return Expr::unary(Op::Cos, std::move(a)); }
inline Expr sinh(Expr a) { return Expr::unary(Op::Sinh, std::move(a)); }
inline Expr cosh(Expr a) { return Expr::unary(Op::Cosh, std::move(a)); }
inline Expr pow(Expr a, int k) { return Expr::powi(std::move(a), k); }
inline Expr zeta() { return Expr::var(); }

namespace detail {

inline std::string format_number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline std::string format_complex(cplx c) {
    if (c.imag() == 0.0) return format_number(c.real());
    if (c.real() == 0.0) return "(" + format_number(c.imag()) + "*i)";
    return "(" + format_number(c.real()) + (c.imag() < 0 ? "-" : "+") + format_number(std::abs(c.imag())) + "*i)";
}

inline const char* func_name(Op op) {
    switch (op) {
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Sinh: return "sinh";
    case Op::Cosh: return "cosh";
    default: return nullptr;
    }
}

} // namespace detail

/// Fully parenthesized text form. It re-parses to the same tree and doubles as
/// a structural key for the simplifier.
inline std::string Expr::to_string() const {
    const auto& a = args();
    switch (op()) {
    case Op::Const: return detail::format_complex(value());
    case Op::Var: return "z";
    case Op::Add: return "(" + a[0].to_string() + "+" + a[1].to_string() + ")";
    case Op::Sub: return "(" + a[0].to_string() + "-" + a[1].to_string() + ")";
    case Op::Mul: return "(" + a[0].to_string() + "*" + a[1].to_string() + ")";
    case Op::Div: return "(" + a[0].to_string() + "/" + a[1].to_string() + ")";
    case Op::Neg: return "(-" + a[0].to_string() + ")";
    case Op::PowInt: return "(" + a[0].to_string() + "^" + std::to_string(exponent()) + ")";
    case Op::Pow: return "(" + a[0].to_string() + "^" + detail::format_complex(value()) + ")";
    default: return std::string(detail::func_name(op())) + "(" + a[0].to_string() + ")";
    }
}

// ---------------------------------------------------------------------------
// Simplification

namespace detail {

struct ProductForm {
    cplx coeff = 1.0;
    // structural key -> (base, integer power)
    std::map<std::string, std::pair<Expr, int>> factors;
};

inline void collect_product(const Expr& e, int sign, ProductForm& out);

inline Expr simplify_node(const Expr& e);

inline Expr rebuild_product(const ProductForm& pf) {
    if (pf.coeff == 0.0) return Expr::constant(0.0);
    Expr num = Expr::constant(1.0);
    Expr den = Expr::constant(1.0);
    bool has_num = false;
    bool has_den = false;
    for (const auto& [key, entry] : pf.factors) {
        const auto& [base, k] = entry;
        if (k == 0) continue;
        Expr term = std::abs(k) == 1 ? base : Expr::powi(base, std::abs(k));
        if (k > 0) {
            num = has_num ? num * term : term;
            has_num = true;
        } else {
            den = has_den ? den * term : term;
            has_den = true;
        }
    }
    Expr result = num;
    if (pf.coeff != cplx(1.0) || !has_num) result = has_num ? Expr::constant(pf.coeff) * num : Expr::constant(pf.coeff);
    if (has_den) result = result / den;
    return result;
}

inline void add_factor(ProductForm& out, const Expr& base, int k) {
    if (base.is_const()) {
        out.coeff *= Expr::ipow(base.value(), k);
        return;
    }
    auto key = base.to_string();
    auto it = out.factors.find(key);
    if (it == out.factors.end())
        out.factors.emplace(key, std::make_pair(base, k));
    else
        it->second.second += k;
}

inline void collect_product(const Expr& e, int sign, ProductForm& out) {
    switch (e.op()) {
    case Op::Mul:
        collect_product(e.arg(0), sign, out);
        collect_product(e.arg(1), sign, out);
        return;
    case Op::Div:
        collect_product(e.arg(0), sign, out);
        collect_product(e.arg(1), -sign, out);
        return;
    case Op::Neg:
        out.coeff *= -1.0;
        collect_product(e.arg(0), sign, out);
        return;
    case Op::PowInt:
        if (e.arg(0).op() == Op::Mul || e.arg(0).op() == Op::Div || e.arg(0).op() == Op::PowInt) {
            // (a*b)^k: distribute the power
            ProductForm inner;
            collect_product(e.arg(0), 1, inner);
            out.coeff *= Expr::ipow(inner.coeff, sign * e.exponent());
            for (const auto& [key, entry] : inner.factors)
                add_factor(out, entry.first, entry.second * e.exponent() * sign);
            return;
        }
        add_factor(out, e.arg(0), sign * e.exponent());
        return;
    default:
        add_factor(out, e, sign);
        return;
    }
}

inline Expr simplify_node(const Expr& e) {
    if (e.op() == Op::Const || e.op() == Op::Var) return e;
    std::vector<Expr> s;
    s.reserve(e.args().size());
    for (const auto& a : e.args()) s.push_back(simplify_node(a));
    bool all_const = true;
    for (const auto& a : s) all_const = all_const && a.is_const();

    Expr rebuilt = [&] {
        switch (e.op()) {
        case Op::PowInt: return Expr::powi(s[0], e.exponent());
        case Op::Pow: return Expr::pow(s[0], e.value());
        default:
            return s.size() == 1 ? Expr::unary(e.op(), s[0]) : Expr::binary(e.op(), s[0], s[1]);
        }
    }();
    if (all_const) return Expr::constant(rebuilt.eval(0.0));

    switch (e.op()) {
    case Op::Add:
        if (s[0].is_const(0.0)) return s[1];
        if (s[1].is_const(0.0)) return s[0];
        return rebuilt;
    case Op::Sub:
        if (s[1].is_const(0.0)) return s[0];
        if (s[0].to_string() == s[1].to_string()) return Expr::constant(0.0);
        return rebuilt;
    case Op::Neg:
        if (s[0].op() == Op::Neg) return s[0].arg(0);
        return rebuilt;
    case Op::Mul:
    case Op::Div:
    case Op::PowInt: {
        if (e.op() == Op::PowInt && e.exponent() == 0) return Expr::constant(1.0);
        if (e.op() == Op::PowInt && e.exponent() == 1) return s[0];
        ProductForm pf;
        collect_product(rebuilt, 1, pf);
        return rebuild_product(pf);
    }
    case Op::Exp:
        if (s[0].op() == Op::Log) return s[0].arg(0);
        return rebuilt;
    default:
        return rebuilt;
    }
}

} // namespace detail

/// Constant folding, identity elimination, and cancellation of structurally
/// equal factors in products and quotients (so (1/z)*z becomes 1).
inline Expr simplify(const Expr& e) { return detail::simplify_node(e); }

/// Replace zeta by `inner` throughout `outer`.
inline Expr compose(const Expr& outer, const Expr& inner) {
    const auto& a = outer.args();
    switch (outer.op()) {
    case Op::Const: return outer;
    case Op::Var: return inner;
    case Op::PowInt: return Expr::powi(compose(a[0], inner), outer.exponent());
    case Op::Pow: return Expr::pow(compose(a[0], inner), outer.value());
    default:
        if (a.size() == 1) return Expr::unary(outer.op(), compose(a[0], inner));
        return Expr::binary(outer.op(), compose(a[0], inner), compose(a[1], inner));
    }
}

/// Symbolic d/dzeta. The result is simplified.
inline Expr derivative(const Expr& e) {
    const auto& a = e.args();
    auto d = [](const Expr& x) { return derivative(x); };
    Expr r;
    switch (e.op()) {
    case Op::Const: r = Expr::constant(0.0); break;
    case Op::Var: r = Expr::constant(1.0); break;
    case Op::Add: r = d(a[0]) + d(a[1]); break;
    case Op::Sub: r = d(a[0]) - d(a[1]); break;
    case Op::Mul: r = d(a[0]) * a[1] + a[0] * d(a[1]); break;
    case Op::Div: r = (d(a[0]) * a[1] - a[0] * d(a[1])) / pow(a[1], 2); break;
    case Op::Neg: r = -d(a[0]); break;
    case Op::Exp: r = e * d(a[0]); break;
    case Op::Log: r = d(a[0]) / a[0]; break;
    case Op::Sin: r = cos(a[0]) * d(a[0]); break;
    case Op::Cos: r = -(sin(a[0]) * d(a[0])); break;
    case Op::Sinh: r = cosh(a[0]) * d(a[0]); break;
    case Op::Cosh: r = sinh(a[0]) * d(a[0]); break;
    case Op::PowInt: r = Expr::constant(double(e.exponent())) * pow(a[0], e.exponent() - 1) * d(a[0]); break;
    case Op::Pow: r = Expr::constant(e.value()) * Expr::pow(a[0], e.value() - 1.0) * d(a[0]); break;
    }
    return simplify(r);
}

// ---------------------------------------------------------------------------
// Compiled evaluation

/// Postfix program equivalent to an expression tree. Evaluation is reentrant.
class Program {
public:
    Program() = default;
    explicit Program(const Expr& e) {
        emit(e);
        int depth = 0;
        for (const auto& ins : code_) {
            depth += stack_effect(ins.op);
            max_depth_ = std::max(max_depth_, depth);
        }
    }

    cplx operator()(cplx z) const {
        constexpr int kInline = 32;
        if (max_depth_ <= kInline) {
            cplx stack[kInline];
            return run(z, stack);
        }
        std::vector<cplx> stack(static_cast<std::size_t>(max_depth_));
        return run(z, stack.data());
    }

    std::size_t size() const { return code_.size(); }

private:
    struct Instr {
        Op op;
        cplx value;
        int exponent;
    };

    static int stack_effect(Op op) {
        switch (op) {
        case Op::Const:
        case Op::Var: return 1;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: return -1;
        default: return 0;
        }
    }

    void emit(const Expr& e) {
        for (const auto& a : e.args()) emit(a);
        code_.push_back({e.op(), e.value(), e.exponent()});
    }

    cplx run(cplx z, cplx* st) const {
        int top = -1;
        for (const auto& ins : code_) {
            switch (ins.op) {
            case Op::Const: st[++top] = ins.value; break;
            case Op::Var: st[++top] = z; break;
            case Op::Add: st[top - 1] += st[top]; --top; break;
            case Op::Sub: st[top - 1] -= st[top]; --top; break;
            case Op::Mul: st[top - 1] *= st[top]; --top; break;
            case Op::Div: st[top - 1] /= st[top]; --top; break;
            case Op::Neg: st[top] = -st[top]; break;
            case Op::Exp: st[top] = std::exp(st[top]); break;
            case Op::Log: st[top] = std::log(st[top]); break;
            case Op::Sin: st[top] = std::sin(st[top]); break;
            case Op::Cos: st[top] = std::cos(st[top]); break;
            case Op::Sinh: st[top] = std::sinh(st[top]); break;
            case Op::Cosh: st[top] = std::cosh(st[top]); break;
            case Op::PowInt: st[top] = Expr::ipow(st[top], ins.exponent); break;
            case Op::Pow: st[top] = std::pow(st[top], ins.value); break;
            }
        }
        return st[0];
    }

    std::vector<Instr> code_;
    int max_depth_ = 0;
};

// ---------------------------------------------------------------------------
// Parsing
//
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := ('-'|'+') unary | power
//   power   := primary ('^' unary)?
//   primary := number ['i'] | 'i' | 'pi' | 'e' | 'z' | 'zeta' | func '(' expr ')' | '(' expr ')'
//
// Exponents must be constant; integer exponents become exact integer powers,
// anything else uses the principal branch.

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void error(const std::string& msg) const {
        fail(ErrorCode::ParseError, msg + " at position " + std::to_string(pos_) + " in \"" + std::string(s_) + "\"");
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = lhs + parse_term();
            else if (accept('-')) lhs = lhs - parse_term();
            else return lhs;
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = lhs * parse_unary();
            else if (accept('/')) lhs = lhs / parse_unary();
            else return lhs;
        }
    }

    Expr parse_unary() {
        if (accept('-')) {
            Expr operand = parse_unary();
            if (operand.is_const()) return Expr::constant(-operand.value());
            return -operand;
        }
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept('^')) {
            Expr ex = simplify(parse_unary());
            if (!ex.is_constant_tree()) error("exponent must be constant");
            cplx c = ex.eval(0.0);
            if (c.imag() == 0.0 && c.real() == std::round(c.real()) && std::abs(c.real()) < 1e6)
                return Expr::powi(base, static_cast<int>(c.real()));
            return Expr::pow(base, c);
        }
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= s_.size()) error("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!accept(')')) error("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string name(s_.substr(start, pos_ - start));
            if (name == "z" || name == "zeta") return Expr::var();
            if (name == "i") return Expr::constant(kI);
            if (name == "pi") return Expr::constant(kPi);
            if (name == "e") return Expr::constant(std::exp(1.0));
            static const std::map<std::string, Op> funcs = {{"exp", Op::Exp},   {"log", Op::Log},
                                                            {"sin", Op::Sin},   {"cos", Op::Cos},
                                                            {"sinh", Op::Sinh}, {"cosh", Op::Cosh}};
            auto it = funcs.find(name);
            if (it == funcs.end()) {
                pos_ = start;
                error("unknown identifier '" + name + "'");
            }
            if (!accept('(')) error("expected '(' after " + name);
            Expr arg = parse_expr();
            if (!accept(')')) error("expected ')'");
            return Expr::unary(it->second, arg);
        }
        error("unexpected '" + std::string(1, c) + "'");
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        std::string text(s_.substr(start, pos_ - start));
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(text, &used);
            if (used != text.size()) error("malformed number '" + text + "'");
        } catch (const std::logic_error&) {
            error("malformed number '" + text + "'");
        }
        if (pos_ < s_.size() && s_[pos_] == 'i' &&
            (pos_ + 1 == s_.size() || !std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])))) {
            ++pos_;
            return Expr::constant(cplx(0.0, v));
        }
        return Expr::constant(v);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// JSON: {"op": tag, "args": [...]} with "re"/"im" for constants and complex
// exponents and "exponent" for integer powers.

namespace detail {

inline const std::map<Op, std::string>& op_tags() {
    static const std::map<Op, std::string> tags = {
        {Op::Const, "const"}, {Op::Var, "var"},   {Op::Add, "add"},   {Op::Sub, "sub"},   {Op::Mul, "mul"},
        {Op::Div, "div"},     {Op::Neg, "neg"},   {Op::Exp, "exp"},   {Op::Log, "log"},   {Op::Sin, "sin"},
        {Op::Cos, "cos"},     {Op::Sinh, "sinh"}, {Op::Cosh, "cosh"}, {Op::PowInt, "powi"}, {Op::Pow, "pow"}};
    return tags;
}

inline double finite_or_throw(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) fail(ErrorCode::ParseError, std::string("missing numeric '") + key + "'");
    double v = j.at(key).get<double>();
    if (!std::isfinite(v)) fail(ErrorCode::ParseError, "non-finite number in expression");
    return v;
}

inline void require_finite(cplx c) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        fail(ErrorCode::InvalidArgument, "NaN/Inf cannot be serialized");
}

} // namespace detail

inline nlohmann::json to_json(const Expr& e) {
    nlohmann::json j;
    j["op"] = detail::op_tags().at(e.op());
    if (e.op() == Op::Const || e.op() == Op::Pow) {
        detail::require_finite(e.value());
        j["re"] = e.value().real();
        j["im"] = e.value().imag();
    }
    if (e.op() == Op::PowInt) j["exponent"] = e.exponent();
    if (!e.args().empty()) {
        j["args"] = nlohmann::json::array();
        for (const auto& a : e.args()) j["args"].push_back(to_json(a));
    }
    return j;
}

inline Expr expr_from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_expr(j.get<std::string>());
    if (!j.is_object() || !j.contains("op") || !j.at("op").is_string())
        fail(ErrorCode::ParseError, "expression node needs an 'op' tag");
    const std::string tag = j.at("op").get<std::string>();
    Op op{};
    bool found = false;
    for (const auto& [o, t] : detail::op_tags())
        if (t == tag) {
            op = o;
            found = true;
        }
    if (!found) fail(ErrorCode::ParseError, "unknown op tag '" + tag + "'");

    std::vector<Expr> args;
    if (j.contains("args")) {
        if (!j.at("args").is_array()) fail(ErrorCode::ParseError, "'args' must be an array");
        for (const auto& a : j.at("args")) args.push_back(expr_from_json(a));
    }
    auto expect_args = [&](std::size_t n) {
        if (args.size() != n) fail(ErrorCode::ParseError, "op '" + tag + "' expects " + std::to_string(n) + " args");
    };
    switch (op) {
    case Op::Const:
        expect_args(0);
        return Expr::constant({detail::finite_or_throw(j, "re"), j.contains("im") ? detail::finite_or_throw(j, "im") : 0.0});
    case Op::Var: expect_args(0); return Expr::var();
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: expect_args(2); return Expr::binary(op, args[0], args[1]);
    case Op::PowInt:
        expect_args(1);
        if (!j.contains("exponent") || !j.at("exponent").is_number_integer())
            fail(ErrorCode::ParseError, "powi needs an integer 'exponent'");
        return Expr::powi(args[0], j.at("exponent").get<int>());
    case Op::Pow:
        expect_args(1);
        return Expr::pow(args[0], {detail::finite_or_throw(j, "re"), j.contains("im") ? detail::finite_or_throw(j, "im") : 0.0});
    default: expect_args(1); return Expr::unary(op, args[0]);
    }
}

} // namespace minsurf
