#include "cahiers/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace cahiers {

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Tan: return "tan";
        case Fn::Exp: return "exp";
        case Fn::Log: return "log";
        case Fn::Sqrt: return "sqrt";
        case Fn::Atan: return "atan";
    }
    return "?";
}

std::optional<Fn> fn_from_name(const std::string& name) {
    if (name == "sin") return Fn::Sin;
    if (name == "cos") return Fn::Cos;
    if (name == "tan") return Fn::Tan;
    if (name == "exp") return Fn::Exp;
    if (name == "log") return Fn::Log;
    if (name == "sqrt") return Fn::Sqrt;
    if (name == "atan") return Fn::Atan;
    return std::nullopt;
}

struct ExprNode {
    Kind kind;
    Rational rat;            // Constant value / Product coefficient / Power exponent
    double fval = 0.0;       // FloatConst
    std::string name;        // Variable
    Fn fn = Fn::Sin;         // Apply
    std::vector<Expr> kids;  // children
    std::string key;         // canonical serialization, doubles as sort key
};

namespace {

std::string float_key(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

// Key prefixes fix the term order of printed sums: constants, then floats,
// then variables, applications, powers, products, nested sums.
std::string make_key(const ExprNode& n) {
    switch (n.kind) {
        case Kind::Constant: return "0" + rat_to_string(n.rat);
        case Kind::FloatConst: return "1" + float_key(n.fval);
        case Kind::Variable: return "2" + n.name;
        case Kind::Apply: {
            std::string k = "3";
            k += fn_name(n.fn);
            k += "(" + n.kids[0].key() + ")";
            return k;
        }
        case Kind::Power: return "4(" + n.kids[0].key() + "^" + rat_to_string(n.rat) + ")";
        case Kind::Product: {
            std::string k = "5" + rat_to_string(n.rat) + "(";
            for (const Expr& f : n.kids) k += f.key() + ",";
            return k + ")";
        }
        case Kind::Sum: {
            std::string k = "6(";
            for (const Expr& t : n.kids) k += t.key() + ",";
            return k + ")";
        }
    }
    return "?";
}

}  // namespace

struct ExprBuilder {
    static Expr wrap(ExprNode n) {
        n.key = make_key(n);
        return Expr(std::make_shared<const ExprNode>(std::move(n)));
    }
    static Expr constant(const Rational& v) {
        if (v == 0) return zero();
        ExprNode n;
        n.kind = Kind::Constant;
        n.rat = v;
        return wrap(std::move(n));
    }
    static Expr floatconst(double v) {
        if (v == 0.0) return zero();
        ExprNode n;
        n.kind = Kind::FloatConst;
        n.fval = v;
        return wrap(std::move(n));
    }
    static Expr zero() {
        ExprNode n;
        n.kind = Kind::Sum;
        return wrap(std::move(n));
    }
    static Expr variable(const std::string& name) {
        ExprNode n;
        n.kind = Kind::Variable;
        n.name = name;
        return wrap(std::move(n));
    }
    static Expr raw_sum(std::vector<Expr> terms) {
        ExprNode n;
        n.kind = Kind::Sum;
        n.kids = std::move(terms);
        return wrap(std::move(n));
    }
    static Expr raw_product(const Rational& coeff, std::vector<Expr> factors) {
        ExprNode n;
        n.kind = Kind::Product;
        n.rat = coeff;
        n.kids = std::move(factors);
        return wrap(std::move(n));
    }
    static Expr raw_power(const Expr& base, const Rational& exponent) {
        ExprNode n;
        n.kind = Kind::Power;
        n.rat = exponent;
        n.kids = {base};
        return wrap(std::move(n));
    }
    static Expr raw_apply(Fn f, const Expr& arg) {
        ExprNode n;
        n.kind = Kind::Apply;
        n.fn = f;
        n.kids = {arg};
        return wrap(std::move(n));
    }
};

Expr::Expr() : node_(ExprBuilder::zero().node_) {}
Expr::Expr(int v) : Expr(Rational(v)) {}
Expr::Expr(long long v) : Expr(Rational(v)) {}
Expr::Expr(const Rational& v) : node_(ExprBuilder::constant(v).node_) {}
Expr::Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

Expr Expr::num(const Rational& v) { return ExprBuilder::constant(v); }
Expr Expr::fnum(double v) { return ExprBuilder::floatconst(v); }
Expr Expr::var(const std::string& name) { return ExprBuilder::variable(name); }
Expr Expr::apply(Fn f, const Expr& arg) { return ExprBuilder::raw_apply(f, arg); }

Kind Expr::kind() const { return node_->kind; }
const Rational& Expr::rat_value() const { return node_->rat; }
double Expr::float_value() const { return node_->fval; }
const std::string& Expr::var_name() const { return node_->name; }
Fn Expr::fn() const { return node_->fn; }
const std::vector<Expr>& Expr::operands() const { return node_->kids; }
bool Expr::is_zero_structural() const { return node_->kind == Kind::Sum && node_->kids.empty(); }
bool Expr::is_one() const { return node_->kind == Kind::Constant && node_->rat == 1; }
const std::string& Expr::key() const { return node_->key; }
bool Expr::operator==(const Expr& other) const { return node_ == other.node_ || key() == other.key(); }
bool Expr::operator!=(const Expr& other) const { return !(*this == other); }
bool Expr::operator<(const Expr& other) const { return key() < other.key(); }

Expr Expr::sum(std::vector<Expr> terms) {
    // flatten
    std::vector<Expr> flat;
    for (Expr& t : terms) {
        if (t.kind() == Kind::Sum) {
            for (const Expr& s : t.operands()) flat.push_back(s);
        } else {
            flat.push_back(std::move(t));
        }
    }
    // combine like terms: skeleton key -> (coeff, skeleton)
    Rational const_acc = 0;
    std::vector<double> float_terms;
    std::map<std::string, std::pair<Rational, Expr>> bucket;
    for (const Expr& t : flat) {
        if (t.kind() == Kind::Constant) {
            const_acc += t.rat_value();
            continue;
        }
        if (t.kind() == Kind::FloatConst) {
            float_terms.push_back(t.float_value());
            continue;
        }
        Rational c = 1;
        Expr skel = t;
        if (t.kind() == Kind::Product) {
            c = t.rat_value();
            skel = ExprBuilder::raw_product(1, t.operands());
            if (t.operands().size() == 1) skel = t.operands()[0];
        }
        auto it = bucket.find(skel.key());
        if (it == bucket.end()) {
            bucket.emplace(skel.key(), std::make_pair(c, skel));
        } else {
            it->second.first += c;
        }
    }
    std::vector<Expr> out;
    if (!float_terms.empty()) {
        // a float anywhere makes the whole constant part float
        std::sort(float_terms.begin(), float_terms.end());
        double acc = to_double(const_acc);
        for (double v : float_terms) acc += v;
        if (acc != 0.0) out.push_back(ExprBuilder::floatconst(acc));
    } else if (const_acc != 0) {
        out.push_back(ExprBuilder::constant(const_acc));
    }
    for (auto& [k, cs] : bucket) {
        (void)k;
        if (cs.first == 0) continue;
        if (cs.first == 1) {
            out.push_back(cs.second);
        } else if (cs.second.kind() == Kind::Product) {
            out.push_back(Expr::product(cs.first, cs.second.operands()));
        } else {
            out.push_back(Expr::product(cs.first, {cs.second}));
        }
    }
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) {
        auto skel_key = [](const Expr& e) -> std::string {
            if (e.kind() == Kind::Product) {
                if (e.operands().size() == 1) return e.operands()[0].key();
                return ExprBuilder::raw_product(1, e.operands()).key();
            }
            return e.key();
        };
        return skel_key(a) < skel_key(b);
    });
    if (out.empty()) return ExprBuilder::zero();
    if (out.size() == 1) return out[0];
    return ExprBuilder::raw_sum(std::move(out));
}

Expr Expr::product(const Rational& coeff, std::vector<Expr> factors) {
    Rational c = coeff;
    double facc = 1.0;
    bool has_float = false;
    std::vector<std::pair<Expr, Rational>> bases;  // (base, exponent), order of arrival
    std::vector<double> floats;

    std::vector<Expr> work(std::move(factors));
    for (std::size_t i = 0; i < work.size(); ++i) {
        Expr f = work[i];
        if (f.is_zero_structural()) return ExprBuilder::zero();
        switch (f.kind()) {
            case Kind::Constant:
                c *= f.rat_value();
                break;
            case Kind::FloatConst:
                floats.push_back(f.float_value());
                break;
            case Kind::Product: {
                c *= f.rat_value();
                for (const Expr& g : f.operands()) work.push_back(g);
                break;
            }
            case Kind::Power:
                bases.emplace_back(f.operands()[0], f.rat_value());
                break;
            default:
                bases.emplace_back(f, Rational(1));
                break;
        }
    }
    if (c == 0) return ExprBuilder::zero();
    if (!floats.empty()) {
        has_float = true;
        std::sort(floats.begin(), floats.end());
        for (double v : floats) facc *= v;
        if (facc == 0.0) return ExprBuilder::zero();
    }

    // merge equal bases by adding exponents
    std::map<std::string, std::pair<Expr, Rational>> merged;
    for (auto& [b, e] : bases) {
        auto it = merged.find(b.key());
        if (it == merged.end()) {
            merged.emplace(b.key(), std::make_pair(b, e));
        } else {
            it->second.second += e;
        }
    }
    std::vector<Expr> out;
    bool changed = false;
    for (auto& [k, be] : merged) {
        (void)k;
        if (be.second == 0) {
            changed = true;  // b^0 -> 1
            continue;
        }
        Expr rebuilt = (be.second == 1) ? be.first : Expr::power(be.first, be.second);
        if (rebuilt.kind() == Kind::Constant || rebuilt.kind() == Kind::FloatConst ||
            rebuilt.kind() == Kind::Product || rebuilt.is_zero_structural()) {
            changed = true;  // folding produced scalars or nested products: redo
        }
        out.push_back(rebuilt);
    }
    if (changed) {
        if (has_float) out.push_back(ExprBuilder::floatconst(facc));
        return Expr::product(c, std::move(out));
    }
    std::sort(out.begin(), out.end());
    if (has_float) {
        // fold the rational coefficient into the float one: a float anywhere
        // makes the numeric part float
        facc *= to_double(c);
        c = 1;
        if (facc == 0.0) return ExprBuilder::zero();
        if (out.empty()) return ExprBuilder::floatconst(facc);
        if (facc != 1.0) {
            Expr ff = ExprBuilder::floatconst(facc);
            out.insert(std::lower_bound(out.begin(), out.end(), ff), ff);
        }
    }
    if (out.empty()) return ExprBuilder::constant(c);
    if (out.size() == 1 && c == 1) return out[0];
    if (out.size() == 1 && out[0].kind() == Kind::Sum) {
        // distribute the rational coefficient over a lone sum factor so that
        // like terms across scaled sums can cancel
        std::vector<Expr> scaled;
        for (const Expr& t : out[0].operands()) scaled.push_back(Expr::product(c, {t}));
        return Expr::sum(std::move(scaled));
    }
    return ExprBuilder::raw_product(c, std::move(out));
}

Expr Expr::power(const Expr& base, const Rational& exponent) {
    if (exponent == 0) return ExprBuilder::constant(1);
    if (exponent == 1) return base;
    if (base.is_zero_structural()) {
        if (exponent > 0) return ExprBuilder::zero();
        return ExprBuilder::raw_power(base, exponent);  // 0^negative: defer to eval-time error
    }
    if (base.kind() == Kind::Constant && is_integer(exponent)) {
        if (!(base.rat_value() == 0 && exponent < 0))
            return ExprBuilder::constant(
                rat_pow(base.rat_value(), rat_num(exponent).convert_to<long long>()));
    }
    if (base.kind() == Kind::FloatConst && is_integer(exponent)) {
        return ExprBuilder::floatconst(
            std::pow(base.float_value(), static_cast<double>(rat_num(exponent).convert_to<long long>())));
    }
    if (base.kind() == Kind::Power && is_integer(exponent)) {
        return Expr::power(base.operands()[0], base.rat_value() * exponent);
    }
    if (base.kind() == Kind::Product && is_integer(exponent)) {
        long long n = rat_num(exponent).convert_to<long long>();
        std::vector<Expr> fs;
        for (const Expr& f : base.operands()) fs.push_back(Expr::power(f, exponent));
        return Expr::product(rat_pow(base.rat_value(), n), std::move(fs));
    }
    return ExprBuilder::raw_power(base, exponent);
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, Expr::product(-1, {b})}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::product(1, {a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::product(1, {a, Expr::power(b, -1)}); }
Expr operator-(const Expr& a) { return Expr::product(-1, {a}); }

Expr pow(const Expr& base, const Rational& exponent) { return Expr::power(base, exponent); }
Expr sin(const Expr& a) { return Expr::apply(Fn::Sin, a); }
Expr cos(const Expr& a) { return Expr::apply(Fn::Cos, a); }
Expr tan(const Expr& a) { return Expr::apply(Fn::Tan, a); }
Expr exp(const Expr& a) { return Expr::apply(Fn::Exp, a); }
Expr log(const Expr& a) { return Expr::apply(Fn::Log, a); }
Expr sqrt(const Expr& a) { return Expr::apply(Fn::Sqrt, a); }
Expr atan(const Expr& a) { return Expr::apply(Fn::Atan, a); }

Expr differentiate(const Expr& e, const std::string& v) {
    switch (e.kind()) {
        case Kind::Constant:
        case Kind::FloatConst:
            return Expr();
        case Kind::Variable:
            return e.var_name() == v ? Expr(1) : Expr();
        case Kind::Sum: {
            std::vector<Expr> terms;
            for (const Expr& t : e.operands()) terms.push_back(differentiate(t, v));
            return Expr::sum(std::move(terms));
        }
        case Kind::Product: {
            std::vector<Expr> terms;
            const auto& fs = e.operands();
            for (std::size_t i = 0; i < fs.size(); ++i) {
                std::vector<Expr> factors;
                for (std::size_t j = 0; j < fs.size(); ++j)
                    factors.push_back(i == j ? differentiate(fs[j], v) : fs[j]);
                terms.push_back(Expr::product(e.rat_value(), std::move(factors)));
            }
            return Expr::sum(std::move(terms));
        }
        case Kind::Power: {
            // d(b^e) = e * b^(e-1) * db
            const Expr& b = e.operands()[0];
            const Rational& ex = e.rat_value();
            return Expr::product(ex, {Expr::power(b, ex - 1), differentiate(b, v)});
        }
        case Kind::Apply: {
            const Expr& a = e.operands()[0];
            Expr da = differentiate(a, v);
            Expr outer;
            switch (e.fn()) {
                case Fn::Sin: outer = cos(a); break;
                case Fn::Cos: outer = -sin(a); break;
                case Fn::Tan: outer = Expr(1) + pow(tan(a), 2); break;
                case Fn::Exp: outer = exp(a); break;
                case Fn::Log: outer = pow(a, -1); break;
                case Fn::Sqrt: outer = Expr::product(Rational(1, 2), {pow(sqrt(a), -1)}); break;
                case Fn::Atan: outer = pow(Expr(1) + pow(a, 2), -1); break;
            }
            return outer * da;
        }
    }
    return Expr();
}

double eval_numeric(const Expr& e, const Binding& b) {
    auto finite = [](double v) {
        if (!std::isfinite(v)) throw DomainError("non-finite value in evaluation");
        return v;
    };
    switch (e.kind()) {
        case Kind::Constant:
            return to_double(e.rat_value());
        case Kind::FloatConst:
            return e.float_value();
        case Kind::Variable: {
            auto it = b.find(e.var_name());
            if (it == b.end()) throw UnboundVariable("unbound variable: " + e.var_name());
            return it->second;
        }
        case Kind::Sum: {
            double acc = 0.0;
            for (const Expr& t : e.operands()) acc += eval_numeric(t, b);
            return finite(acc);
        }
        case Kind::Product: {
            double acc = to_double(e.rat_value());
            for (const Expr& f : e.operands()) acc *= eval_numeric(f, b);
            return finite(acc);
        }
        case Kind::Power: {
            double base = eval_numeric(e.operands()[0], b);
            const Rational& ex = e.rat_value();
            if (base == 0.0 && ex < 0) throw DomainError("zero raised to a negative power");
            if (base < 0.0 && !is_integer(ex)) throw DomainError("negative base with fractional exponent");
            return finite(std::pow(base, to_double(ex)));
        }
        case Kind::Apply: {
            double a = eval_numeric(e.operands()[0], b);
            switch (e.fn()) {
                case Fn::Sin: return finite(std::sin(a));
                case Fn::Cos: return finite(std::cos(a));
                case Fn::Tan: return finite(std::tan(a));
                case Fn::Exp: return finite(std::exp(a));
                case Fn::Log:
                    if (a <= 0.0) throw DomainError("log of non-positive value");
                    return finite(std::log(a));
                case Fn::Sqrt:
                    if (a < 0.0) throw DomainError("sqrt of negative value");
                    return finite(std::sqrt(a));
                case Fn::Atan: return finite(std::atan(a));
            }
        }
    }
    throw EvalError("unreachable expression kind");
}

std::optional<Rational> eval_rational(const Expr& e, const std::map<std::string, Rational>& b) {
    switch (e.kind()) {
        case Kind::Constant:
            return e.rat_value();
        case Kind::FloatConst:
            return std::nullopt;
        case Kind::Variable: {
            auto it = b.find(e.var_name());
            if (it == b.end()) throw UnboundVariable("unbound variable: " + e.var_name());
            return it->second;
        }
        case Kind::Sum: {
            Rational acc = 0;
            for (const Expr& t : e.operands()) {
                auto v = eval_rational(t, b);
                if (!v) return std::nullopt;
                acc += *v;
            }
            return acc;
        }
        case Kind::Product: {
            Rational acc = e.rat_value();
            for (const Expr& f : e.operands()) {
                auto v = eval_rational(f, b);
                if (!v) return std::nullopt;
                acc *= *v;
            }
            return acc;
        }
        case Kind::Power: {
            auto base = eval_rational(e.operands()[0], b);
            if (!base || !is_integer(e.rat_value())) return std::nullopt;
            if (*base == 0 && e.rat_value() < 0) return std::nullopt;
            return rat_pow(*base, rat_num(e.rat_value()).convert_to<long long>());
        }
        case Kind::Apply: {
            auto a = eval_rational(e.operands()[0], b);
            if (!a) return std::nullopt;
            switch (e.fn()) {
                case Fn::Sin:
                case Fn::Tan:
                case Fn::Atan:
                    if (*a == 0) return Rational(0);
                    return std::nullopt;
                case Fn::Cos:
                    if (*a == 0) return Rational(1);
                    return std::nullopt;
                case Fn::Exp:
                    if (*a == 0) return Rational(1);
                    return std::nullopt;
                case Fn::Log:
                    if (*a == 1) return Rational(0);
                    return std::nullopt;
                case Fn::Sqrt:
                    return rat_exact_sqrt(*a);
            }
        }
    }
    return std::nullopt;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements) {
    switch (e.kind()) {
        case Kind::Constant:
        case Kind::FloatConst:
            return e;
        case Kind::Variable: {
            auto it = replacements.find(e.var_name());
            return it == replacements.end() ? e : it->second;
        }
        case Kind::Sum: {
            std::vector<Expr> terms;
            for (const Expr& t : e.operands()) terms.push_back(substitute(t, replacements));
            return Expr::sum(std::move(terms));
        }
        case Kind::Product: {
            std::vector<Expr> fs;
            for (const Expr& f : e.operands()) fs.push_back(substitute(f, replacements));
            return Expr::product(e.rat_value(), std::move(fs));
        }
        case Kind::Power:
            return Expr::power(substitute(e.operands()[0], replacements), e.rat_value());
        case Kind::Apply:
            return Expr::apply(e.fn(), substitute(e.operands()[0], replacements));
    }
    return e;
}

void collect_free_vars(const Expr& e, std::set<std::string>& out) {
    if (e.kind() == Kind::Variable) {
        out.insert(e.var_name());
        return;
    }
    for (const Expr& k : e.operands()) collect_free_vars(k, out);
}

std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> out;
    collect_free_vars(e, out);
    return out;
}

namespace {

// precedence levels: sum 0 < product 1 < power-base/atom 2
std::string print_prec(const Expr& e, int parent_prec);

std::string print_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool leading_negative(const Expr& t) {
    if (t.kind() == Kind::Constant) return t.rat_value() < 0;
    if (t.kind() == Kind::FloatConst) return t.float_value() < 0;
    if (t.kind() == Kind::Product) return t.rat_value() < 0;
    return false;
}

Expr negate_for_display(const Expr& t) { return Expr::product(-1, {t}); }

std::string print_product(const Rational& coeff, const std::vector<Expr>& factors) {
    std::string s;
    bool need_star = false;
    bool bare_minus = false;
    if (coeff == -1 && !factors.empty()) {
        s += "-";
        bare_minus = true;
    } else if (coeff != 1 || factors.empty()) {
        s += rat_to_string(coeff);
        need_star = true;
    }
    for (const Expr& f : factors) {
        if (need_star) s += "*";
        // "-x^2" would reparse as (-x)^2 since unary minus binds inside the
        // exponent base; parenthesize a power right after a bare minus
        if (!need_star && bare_minus && f.kind() == Kind::Power)
            s += "(" + print_prec(f, 0) + ")";
        else
            s += print_prec(f, 1);
        need_star = true;
    }
    return s;
}

std::string print_prec(const Expr& e, int parent_prec) {
    switch (e.kind()) {
        case Kind::Constant: {
            std::string s = rat_to_string(e.rat_value());
            bool need_paren = (parent_prec >= 1 && (e.rat_value() < 0 || !is_integer(e.rat_value())));
            return need_paren ? "(" + s + ")" : s;
        }
        case Kind::FloatConst: {
            std::string s = print_float(e.float_value());
            return (parent_prec >= 1 && e.float_value() < 0) ? "(" + s + ")" : s;
        }
        case Kind::Variable:
            return e.var_name();
        case Kind::Sum: {
            if (e.operands().empty()) return parent_prec >= 1 ? "(0)" : "0";
            std::string s;
            bool first = true;
            for (const Expr& t : e.operands()) {
                if (first) {
                    s += print_prec(t, 0);
                    first = false;
                } else if (leading_negative(t)) {
                    s += " - " + print_prec(negate_for_display(t), 0);
                } else {
                    s += " + " + print_prec(t, 0);
                }
            }
            return parent_prec >= 1 ? "(" + s + ")" : s;
        }
        case Kind::Product: {
            std::string s = print_product(e.rat_value(), e.operands());
            return parent_prec >= 2 || (parent_prec >= 1 && e.rat_value() < 0) ? "(" + s + ")" : s;
        }
        case Kind::Power: {
            std::string b = print_prec(e.operands()[0], 2);
            const Rational& ex = e.rat_value();
            std::string xs = is_integer(ex) ? rat_num(ex).str() : "(" + rat_to_string(ex) + ")";
            std::string s = b + "^" + xs;
            return parent_prec >= 2 ? "(" + s + ")" : s;
        }
        case Kind::Apply:
            return std::string(fn_name(e.fn())) + "(" + print_prec(e.operands()[0], 0) + ")";
    }
    return "?";
}

}  // namespace

std::string print(const Expr& e) { return print_prec(e, 0); }

std::string print_factor(const Expr& e) { return print_prec(e, 1); }

ZeroCheck is_zero_check(const Expr& e, unsigned long long seed, int samples, double tol) {
    if (e.is_zero_structural()) return {ZeroVerdict::Zero, std::nullopt, 0.0};
    std::set<std::string> vars = free_vars(e);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    constexpr int kRetries = 40;
    int successes = 0;
    for (int s = 0; s < samples; ++s) {
        for (int attempt = 0; attempt < kRetries; ++attempt) {
            Binding b;
            for (const std::string& v : vars) b[v] = dist(rng);
            try {
                double val = eval_numeric(e, b);
                ++successes;
                if (std::abs(val) > tol) return {ZeroVerdict::NonZero, b, val};
                break;
            } catch (const DomainError&) {
                continue;  // resample
            }
        }
    }
    // no certifiable evidence either way: without a single valid sample we
    // refuse to declare Zero
    if (successes == 0) return {ZeroVerdict::NonZero, std::nullopt, 0.0};
    return {ZeroVerdict::Zero, std::nullopt, 0.0};
}

ZeroVerdict is_zero(const Expr& e, unsigned long long seed, int samples, double tol) {
    return is_zero_check(e, seed, samples, tol).verdict;
}

}  // namespace cahiers
