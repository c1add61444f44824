#include "cahiers/weil.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <functional>
#include <numeric>

#include "cahiers/linalg.hpp"
#include "cahiers/parser.hpp"

namespace cahiers {

int Monomial::degree() const { return std::accumulate(exps.begin(), exps.end(), 0); }

Monomial Monomial::times(const Monomial& other) const {
    Monomial out = *this;
    for (size_t i = 0; i < exps.size(); ++i) out.exps[i] += other.exps[i];
    return out;
}

std::string Monomial::str() const {
    std::string s;
    for (size_t i = 0; i < exps.size(); ++i) {
        if (exps[i] == 0) continue;
        if (!s.empty()) s += "*";
        s += "e" + std::to_string(i + 1);
        if (exps[i] > 1) s += "^" + std::to_string(exps[i]);
    }
    return s.empty() ? "1" : s;
}

bool MonoCmp::operator()(const Monomial& a, const Monomial& b) const {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    for (size_t i = 0; i < a.exps.size(); ++i)
        if (a.exps[i] != b.exps[i]) return a.exps[i] > b.exps[i];
    return false;
}

namespace {

// all monomials in m generators of total degree <= maxdeg, graded-lex order
std::vector<Monomial> enumerate_monomials(int m, int maxdeg) {
    std::vector<Monomial> out;
    Monomial cur = Monomial::unit(m);
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
        if (pos == m) {
            if (remaining == 0) out.push_back(cur);
            return;
        }
        // earlier generators take the higher powers first within a degree
        for (int k = remaining; k >= 0; --k) {
            cur.exps[pos] = k;
            rec(pos + 1, remaining - k);
            cur.exps[pos] = 0;
        }
    };
    for (int d = 0; d <= maxdeg; ++d) rec(0, d);
    return out;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly out = a;
    for (const auto& [mono, q] : b) {
        Rational& slot = out[mono];
        slot += q;
        if (slot == 0) out.erase(mono);
    }
    return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, qa] : a)
        for (const auto& [mb, qb] : b) {
            Monomial mono = ma.times(mb);
            Rational& slot = out[mono];
            slot += qa * qb;
            if (slot == 0) out.erase(mono);
        }
    return out;
}

Poly poly_truncate(const Poly& a, int maxdeg) {
    Poly out;
    for (const auto& [mono, c] : a)
        if (mono.degree() <= maxdeg) out.emplace(mono, c);
    return out;
}

Poly poly_derivative(const Poly& a, int var) {
    Poly out;
    for (const auto& [mono, c] : a) {
        if (mono.exps[var] == 0) continue;
        Monomial d = mono;
        d.exps[var] -= 1;
        out.emplace(d, c * mono.exps[var]);
    }
    return out;
}

}  // namespace

int generator_index(const std::string& name, int m) {
    if (name.size() < 2 || name[0] != 'e') return -1;
    for (size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) return -1;
    if (name[1] == '0') return -1;
    const int k = std::stoi(name.substr(1));
    if (k < 1 || k > m) throw AlgebraError("generator " + name + " out of range for m=" + std::to_string(m));
    return k - 1;
}

std::string poly_str(const Poly& p) {
    if (p.empty()) return "0";
    std::string s;
    for (const auto& [mono, q] : p) {
        const bool neg = q < 0;
        const Rational mag = neg ? Rational(-q) : q;
        if (s.empty())
            s += neg ? "-" : "";
        else
            s += neg ? " - " : " + ";
        if (mono.is_unit())
            s += rat_to_string(mag);
        else if (mag == 1)
            s += mono.str();
        else
            s += rat_to_string(mag) + "*" + mono.str();
    }
    return s;
}

Poly expr_to_poly(const Expr& e, int m) {
    switch (e.kind()) {
        case Kind::Constant: {
            Poly out;
            if (e.rat_value() != 0) out.emplace(Monomial::unit(m), e.rat_value());
            return out;
        }
        case Kind::FloatConst:
            throw AlgebraError("relation coefficients must be rational");
        case Kind::Variable: {
            const int k = generator_index(e.var_name(), m);
            if (k < 0) throw AlgebraError("relation must be a polynomial in e1..e" + std::to_string(m) +
                                          "; found variable '" + e.var_name() + "'");
            Poly out;
            out.emplace(Monomial{[&] {
                            std::vector<int> v(m, 0);
                            v[k] = 1;
                            return v;
                        }()},
                        Rational(1));
            return out;
        }
        case Kind::Sum: {
            Poly out;
            for (const Expr& t : e.operands()) out = poly_add(out, expr_to_poly(t, m));
            return out;
        }
        case Kind::Product: {
            Poly out;
            out.emplace(Monomial::unit(m), e.rat_value());
            for (const Expr& f : e.operands()) out = poly_mul(out, expr_to_poly(f, m));
            return out;
        }
        case Kind::Power: {
            if (!is_integer(e.rat_value()) || e.rat_value() < 0)
                throw AlgebraError("relation powers must be nonnegative integers");
            const long long n = static_cast<long long>(rat_num(e.rat_value()));
            Poly base = expr_to_poly(e.operands()[0], m);
            Poly out;
            out.emplace(Monomial::unit(m), Rational(1));
            for (long long i = 0; i < n; ++i) out = poly_mul(out, base);
            return out;
        }
        case Kind::Apply:
            throw AlgebraError("relation must be a polynomial in the generators; found function application");
    }
    throw AlgebraError("unreachable expression kind");
}

CoeffMode Coeff::mode() const {
    if (std::holds_alternative<Rational>(v_)) return CoeffMode::Rational;
    if (std::holds_alternative<double>(v_)) return CoeffMode::Float;
    return CoeffMode::Symbolic;
}

CoeffMode promote_mode(CoeffMode a, CoeffMode b) {
    return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

Coeff Coeff::promoted(CoeffMode target) const {
    if (mode() == target) return *this;
    if (mode() == CoeffMode::Rational && target == CoeffMode::Float) return flt(to_double(rat_value()));
    if (mode() == CoeffMode::Rational && target == CoeffMode::Symbolic) return sym(Expr::num(rat_value()));
    if (mode() == CoeffMode::Float && target == CoeffMode::Symbolic) return sym(Expr::fnum(float_value()));
    throw AlgebraError("cannot demote coefficient mode");
}

bool Coeff::is_zero() const {
    switch (mode()) {
        case CoeffMode::Rational: return rat_value() == 0;
        case CoeffMode::Float: return float_value() == 0.0;
        case CoeffMode::Symbolic: return expr_value().is_zero_structural();
    }
    return false;
}

Expr Coeff::as_expr() const {
    switch (mode()) {
        case CoeffMode::Rational: return Expr::num(rat_value());
        case CoeffMode::Float: return Expr::fnum(float_value());
        case CoeffMode::Symbolic: return expr_value();
    }
    throw AlgebraError("unreachable coefficient mode");
}

double Coeff::as_double() const {
    switch (mode()) {
        case CoeffMode::Rational: return to_double(rat_value());
        case CoeffMode::Float: return float_value();
        case CoeffMode::Symbolic: throw AlgebraError("symbolic coefficient has no numeric value");
    }
    throw AlgebraError("unreachable coefficient mode");
}

std::string Coeff::str() const {
    switch (mode()) {
        case CoeffMode::Rational: return rat_to_string(rat_value());
        case CoeffMode::Float: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", float_value());
            return buf;
        }
        case CoeffMode::Symbolic: return print(expr_value());
    }
    return "?";
}

Coeff operator+(const Coeff& a, const Coeff& b) {
    const CoeffMode m = promote_mode(a.mode(), b.mode());
    const Coeff pa = a.promoted(m), pb = b.promoted(m);
    switch (m) {
        case CoeffMode::Rational: return Coeff::rat(pa.rat_value() + pb.rat_value());
        case CoeffMode::Float: return Coeff::flt(pa.float_value() + pb.float_value());
        case CoeffMode::Symbolic: return Coeff::sym(pa.expr_value() + pb.expr_value());
    }
    throw AlgebraError("unreachable coefficient mode");
}

Coeff operator*(const Coeff& a, const Coeff& b) {
    const CoeffMode m = promote_mode(a.mode(), b.mode());
    const Coeff pa = a.promoted(m), pb = b.promoted(m);
    switch (m) {
        case CoeffMode::Rational: return Coeff::rat(pa.rat_value() * pb.rat_value());
        case CoeffMode::Float: return Coeff::flt(pa.float_value() * pb.float_value());
        case CoeffMode::Symbolic: return Coeff::sym(pa.expr_value() * pb.expr_value());
    }
    throw AlgebraError("unreachable coefficient mode");
}

Coeff Coeff::scaled(const Rational& q) const {
    switch (mode()) {
        case CoeffMode::Rational: return rat(rat_value() * q);
        case CoeffMode::Float: return flt(float_value() * to_double(q));
        case CoeffMode::Symbolic: return sym(Expr::product(q, {expr_value()}));
    }
    throw AlgebraError("unreachable coefficient mode");
}

bool Coeff::operator==(const Coeff& o) const {
    if (mode() != o.mode()) return false;
    switch (mode()) {
        case CoeffMode::Rational: return rat_value() == o.rat_value();
        case CoeffMode::Float: return float_value() == o.float_value();
        case CoeffMode::Symbolic: return expr_value() == o.expr_value();
    }
    return false;
}

WeilAlgebraPtr WeilAlgebra::disk(int m, int l) {
    if (m < 1) throw AlgebraError("a disk needs at least one generator (m >= 1)");
    if (l < 0) throw AlgebraError("nilpotency order must be nonnegative");
    auto alg = std::shared_ptr<WeilAlgebra>(new WeilAlgebra());
    alg->m_ = m;
    alg->l_ = l;
    alg->build();
    return alg;
}

WeilAlgebraPtr WeilAlgebra::quotient(const WeilAlgebraPtr& base, std::vector<Poly> relations) {
    if (!base || base->is_trivial()) throw AlgebraError("quotient base must be a disk");
    if (!base->is_disk()) throw AlgebraError("quotient base must be a disk without prior relations");
    std::vector<Poly> kept;
    for (const Poly& r : relations) {
        if (r.empty()) continue;
        auto unit_it = r.find(Monomial::unit(base->m_));
        if (unit_it != r.end() && unit_it->second != 0)
            throw AlgebraError("relation has nonzero constant term: " + poly_str(r));
        kept.push_back(r);
    }
    auto alg = std::shared_ptr<WeilAlgebra>(new WeilAlgebra());
    alg->m_ = base->m_;
    alg->l_ = base->l_;
    alg->extra_relations_ = std::move(kept);
    alg->build();
    return alg;
}

WeilAlgebraPtr WeilAlgebra::scalar() {
    auto alg = std::shared_ptr<WeilAlgebra>(new WeilAlgebra());
    alg->m_ = 0;
    alg->l_ = 0;
    alg->build();
    return alg;
}

void WeilAlgebra::build() {
    const std::vector<Monomial> ambient = enumerate_monomials(m_, l_ + 1);
    const int n = static_cast<int>(ambient.size());
    std::map<Monomial, int, MonoCmp> amb_index;
    for (int i = 0; i < n; ++i) amb_index.emplace(ambient[i], i);
    // elimination columns run from the largest monomial down, so pivots land on
    // the largest monomial of each row and small monomials survive as basis
    auto col_of = [&](int amb_idx) { return n - 1 - amb_idx; };

    std::vector<std::vector<Rational>> rows;
    auto add_row = [&](const Poly& p) {
        std::vector<Rational> row(n, Rational(0));
        bool nonzero = false;
        for (const auto& [mono, q] : p) {
            if (mono.degree() > l_ + 1 || q == 0) continue;
            row[col_of(amb_index.at(mono))] = q;
            nonzero = true;
        }
        if (nonzero) rows.push_back(std::move(row));
    };
    for (const Poly& r : extra_relations_)
        for (const Monomial& mu : ambient) {
            if (mu.degree() > l_) continue;
            Poly mono_poly;
            mono_poly.emplace(mu, Rational(1));
            add_row(poly_truncate(poly_mul(r, mono_poly), l_ + 1));
        }
    for (const Monomial& mu : ambient)
        if (mu.degree() == l_ + 1) {
            Poly p;
            p.emplace(mu, Rational(1));
            add_row(p);
        }

    const RREF red = RREF::compute(std::move(rows));
    std::vector<bool> is_pivot(n, false);
    std::vector<int> row_of_col(n, -1);
    for (size_t r = 0; r < red.pivot_cols.size(); ++r) {
        is_pivot[red.pivot_cols[r]] = true;
        row_of_col[red.pivot_cols[r]] = static_cast<int>(r);
    }

    basis_.clear();
    for (int i = 0; i < n; ++i)
        if (!is_pivot[col_of(i)]) {
            basis_index_.emplace(ambient[i], static_cast<int>(basis_.size()));
            basis_.push_back(ambient[i]);
        }
    for (int i = 0; i < n; ++i) {
        const int col = col_of(i);
        std::vector<std::pair<int, Rational>> combo;
        if (!is_pivot[col]) {
            combo.emplace_back(basis_index_.at(ambient[i]), Rational(1));
        } else {
            const std::vector<Rational>& row = red.rows[row_of_col[col]];
            for (int c = 0; c < n; ++c) {
                if (c == col || row[c] == 0) continue;
                combo.emplace_back(basis_index_.at(ambient[n - 1 - c]), -row[c]);
            }
            std::sort(combo.begin(), combo.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        }
        rewrite_.emplace(ambient[i], std::move(combo));
    }
}

int WeilAlgebra::basis_index(const Monomial& mono) const {
    auto it = basis_index_.find(mono);
    return it == basis_index_.end() ? -1 : it->second;
}

const std::vector<std::pair<int, Rational>>& WeilAlgebra::rewrite(const Monomial& mono) const {
    auto it = rewrite_.find(mono);
    return it == rewrite_.end() ? empty_ : it->second;
}

bool WeilAlgebra::same_as(const WeilAlgebra& other) const {
    return m_ == other.m_ && l_ == other.l_ && extra_relations_ == other.extra_relations_;
}

std::string WeilAlgebra::spec_string() const {
    std::string s = "D(" + std::to_string(m_) + "," + std::to_string(l_) + ")";
    if (!extra_relations_.empty()) {
        s += ";rel=";
        for (size_t i = 0; i < extra_relations_.size(); ++i) {
            if (i) s += ",";
            s += poly_str(extra_relations_[i]);
        }
    }
    return s;
}

WeilElement::WeilElement(WeilAlgebraPtr alg, CoeffMode mode) : alg_(std::move(alg)), mode_(mode) {
    if (!alg_) throw AlgebraError("element needs an algebra");
}

WeilElement WeilElement::scalar(WeilAlgebraPtr alg, const Coeff& c) {
    WeilElement out(std::move(alg), c.mode());
    if (!c.is_zero()) out.coeffs_.emplace(Monomial::unit(out.alg_->m()), c);
    return out;
}

WeilElement WeilElement::generator(WeilAlgebraPtr alg, int i) {
    if (!alg) throw AlgebraError("element needs an algebra");
    if (i < 0 || i >= alg->m()) throw AlgebraError("generator index out of range");
    std::map<Monomial, Coeff, MonoCmp> raw;
    Monomial mono = Monomial::unit(alg->m());
    mono.exps[i] = 1;
    raw.emplace(mono, Coeff::rat(1));
    return from_poly(std::move(alg), raw);
}

WeilElement WeilElement::from_poly(WeilAlgebraPtr alg, const std::map<Monomial, Coeff, MonoCmp>& raw) {
    if (!alg) throw AlgebraError("element needs an algebra");
    CoeffMode mode = CoeffMode::Rational;
    for (const auto& [mono, c] : raw) mode = promote_mode(mode, c.mode());
    WeilElement out(alg, mode);
    for (const auto& [mono, c] : raw) {
        if (c.is_zero()) continue;
        for (const auto& [idx, q] : alg->rewrite(mono)) {
            const Monomial& target = alg->basis()[idx];
            auto it = out.coeffs_.find(target);
            Coeff add = c.promoted(mode).scaled(q);
            if (it == out.coeffs_.end())
                out.coeffs_.emplace(target, add);
            else
                it->second = it->second + add;
        }
    }
    for (auto it = out.coeffs_.begin(); it != out.coeffs_.end();)
        it = it->second.is_zero() ? out.coeffs_.erase(it) : std::next(it);
    return out;
}

Coeff WeilElement::coeff(const Monomial& mono) const {
    auto it = coeffs_.find(mono);
    if (it != coeffs_.end()) return it->second;
    return Coeff::rat(0).promoted(mode_);
}

Coeff WeilElement::scalar_part() const { return coeff(Monomial::unit(alg_->m())); }

WeilElement WeilElement::nilpotent_part() const {
    WeilElement out(alg_, mode_);
    for (const auto& [mono, c] : coeffs_)
        if (!mono.is_unit()) out.coeffs_.emplace(mono, c);
    return out;
}

bool WeilElement::is_nilpotent() const { return scalar_part().is_zero(); }

WeilElement WeilElement::promoted(CoeffMode target) const {
    if (target == mode_) return *this;
    WeilElement out(alg_, target);
    for (const auto& [mono, c] : coeffs_) {
        Coeff pc = c.promoted(target);
        if (!pc.is_zero()) out.coeffs_.emplace(mono, pc);
    }
    return out;
}

bool WeilElement::operator==(const WeilElement& o) const {
    if (!alg_->same_as(*o.alg_) || mode_ != o.mode_) return false;
    return coeffs_ == o.coeffs_;
}

WeilElement operator+(const WeilElement& a, const WeilElement& b) {
    if (!a.alg_->same_as(*b.alg_)) throw AlgebraError("elements live in different algebras");
    const CoeffMode mode = promote_mode(a.mode_, b.mode_);
    WeilElement out(a.alg_, mode);
    out.coeffs_ = a.promoted(mode).coeffs_;
    for (const auto& [mono, c] : b.promoted(mode).coeffs_) {
        auto it = out.coeffs_.find(mono);
        if (it == out.coeffs_.end()) {
            out.coeffs_.emplace(mono, c);
        } else {
            it->second = it->second + c;
            if (it->second.is_zero()) out.coeffs_.erase(it);
        }
    }
    return out;
}

WeilElement operator-(const WeilElement& a, const WeilElement& b) { return a + b.scaled(Coeff::rat(-1)); }

WeilElement operator*(const WeilElement& a, const WeilElement& b) {
    if (!a.alg_->same_as(*b.alg_)) throw AlgebraError("elements live in different algebras");
    std::map<Monomial, Coeff, MonoCmp> raw;
    for (const auto& [ma, ca] : a.coeffs_)
        for (const auto& [mb, cb] : b.coeffs_) {
            Monomial mono = ma.times(mb);
            if (mono.degree() > a.alg_->l() + 1) continue;
            Coeff prod = ca * cb;
            auto it = raw.find(mono);
            if (it == raw.end())
                raw.emplace(mono, prod);
            else
                it->second = it->second + prod;
        }
    WeilElement out = WeilElement::from_poly(a.alg_, raw);
    // an all-cancelling product should still report the promoted mode
    if (out.coeffs_.empty()) out.mode_ = promote_mode(a.mode_, b.mode_);
    return out;
}

WeilElement WeilElement::scaled(const Coeff& c) const {
    WeilElement out(alg_, promote_mode(mode_, c.mode()));
    for (const auto& [mono, cc] : coeffs_) {
        Coeff nc = cc * c;
        if (!nc.is_zero()) out.coeffs_.emplace(mono, nc);
    }
    return out;
}

namespace {

Coeff coeff_inverse(const Coeff& c) {
    switch (c.mode()) {
        case CoeffMode::Rational:
            if (c.rat_value() == 0) throw AlgebraError("division by zero scalar");
            return Coeff::rat(Rational(1) / c.rat_value());
        case CoeffMode::Float:
            if (c.float_value() == 0.0) throw AlgebraError("division by zero scalar");
            return Coeff::flt(1.0 / c.float_value());
        case CoeffMode::Symbolic:
            return Coeff::sym(Expr::power(c.expr_value(), Rational(-1)));
    }
    throw AlgebraError("unreachable coefficient mode");
}

WeilElement element_inverse(const WeilElement& u) {
    const Coeff s = u.scalar_part();
    if (s.is_zero()) throw AlgebraError("cannot invert an element with zero scalar part");
    const Coeff sinv = coeff_inverse(s);
    const WeilElement w = u.nilpotent_part().scaled(sinv);  // u = s*(1 + w)
    WeilElement acc = WeilElement::scalar(u.algebra(), Coeff::rat(1).promoted(u.mode()));
    WeilElement pw = acc;
    for (int k = 1; k <= u.algebra()->l(); ++k) {
        pw = pw * w;
        if (pw.is_zero()) break;
        acc = acc + pw.scaled(Coeff::rat(k % 2 == 0 ? 1 : -1));
    }
    return acc.scaled(sinv);
}

}  // namespace

WeilElement WeilElement::pow_int(int n) const {
    if (n < 0) return element_inverse(*this).pow_int(-n);
    WeilElement acc = WeilElement::scalar(alg_, Coeff::rat(1).promoted(mode_));
    for (int i = 0; i < n; ++i) {
        acc = acc * (*this);
        if (acc.is_zero()) break;
    }
    return acc;
}

std::string WeilElement::str() const {
    if (coeffs_.empty()) return "0";
    std::string s;
    for (const auto& [mono, c] : coeffs_) {
        bool neg = false;
        std::string body;
        if (c.mode() == CoeffMode::Rational) {
            neg = c.rat_value() < 0;
            const Rational mag = neg ? Rational(-c.rat_value()) : c.rat_value();
            if (mono.is_unit())
                body = rat_to_string(mag);
            else if (mag == 1)
                body = mono.str();
            else
                body = rat_to_string(mag) + "*" + mono.str();
        } else if (c.mode() == CoeffMode::Float) {
            neg = c.float_value() < 0;
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", neg ? -c.float_value() : c.float_value());
            body = mono.is_unit() ? buf : std::string(buf) + "*" + mono.str();
        } else {
            body = mono.is_unit() ? print(c.expr_value()) : print_factor(c.expr_value()) + "*" + mono.str();
        }
        if (s.empty())
            s += neg ? "-" : "";
        else
            s += neg ? " - " : " + ";
        s += body;
    }
    return s;
}

WeilElement taylor_extend(const Expr& f, const std::vector<std::pair<std::string, WeilElement>>& args) {
    if (args.empty()) throw AlgebraError("taylor extension needs at least one argument");
    const WeilAlgebraPtr alg = args[0].second.algebra();
    for (const auto& [name, el] : args)
        if (!el.algebra()->same_as(*alg)) throw AlgebraError("arguments live in different algebras");

    CoeffMode mode = CoeffMode::Rational;
    for (const auto& [name, el] : args) mode = promote_mode(mode, el.mode());

    struct NotExact {};
    auto run = [&](CoeffMode run_mode) -> WeilElement {
        std::vector<WeilElement> nil;
        std::map<std::string, Rational> rat_bind;
        Binding float_bind;
        std::map<std::string, Expr> sym_bind;
        for (const auto& [name, el] : args) {
            const WeilElement p = el.promoted(run_mode);
            nil.push_back(p.nilpotent_part());
            const Coeff s = p.scalar_part();
            switch (run_mode) {
                case CoeffMode::Rational: rat_bind.emplace(name, s.rat_value()); break;
                case CoeffMode::Float: float_bind.emplace(name, s.as_double()); break;
                case CoeffMode::Symbolic: sym_bind.emplace(name, s.as_expr()); break;
            }
        }
        auto value_at = [&](const Expr& g) -> Coeff {
            switch (run_mode) {
                case CoeffMode::Rational: {
                    std::optional<Rational> v = eval_rational(g, rat_bind);
                    if (!v) throw NotExact{};
                    return Coeff::rat(*v);
                }
                case CoeffMode::Float: return Coeff::flt(eval_numeric(g, float_bind));
                case CoeffMode::Symbolic: return Coeff::sym(substitute(g, sym_bind));
            }
            throw AlgebraError("unreachable coefficient mode");
        };

        WeilElement result(alg, run_mode);
        const WeilElement one = WeilElement::scalar(alg, Coeff::rat(1).promoted(run_mode));
        std::vector<int> counts(args.size(), 0);
        // walk multi-indices I in nondecreasing variable order, carrying the
        // current derivative, the nilpotent product and I! along the path
        std::function<void(size_t, int, const Expr&, const WeilElement&, const Rational&)> rec =
            [&](size_t from, int remaining, const Expr& deriv, const WeilElement& prod, const Rational& fact) {
                result = result + prod.scaled(value_at(deriv)).scaled(Coeff::rat(Rational(1) / fact));
                if (remaining == 0) return;
                for (size_t i = from; i < args.size(); ++i) {
                    if (nil[i].is_zero()) continue;
                    WeilElement next = prod * nil[i];
                    if (next.is_zero()) continue;
                    counts[i] += 1;
                    rec(i, remaining - 1, differentiate(deriv, args[i].first), next, fact * counts[i]);
                    counts[i] -= 1;
                }
            };
        rec(0, alg->l(), f, one, Rational(1));
        return result;
    };

    if (mode == CoeffMode::Rational) {
        try {
            return run(CoeffMode::Rational);
        } catch (const NotExact&) {
            return run(CoeffMode::Float);
        }
    }
    return run(mode);
}

WeilElement element_from_expr(const Expr& e, const WeilAlgebraPtr& alg) {
    std::vector<std::pair<std::string, WeilElement>> args;
    for (const std::string& v : free_vars(e)) {
        const int k = generator_index(v, alg->m());
        if (k >= 0)
            args.emplace_back(v, WeilElement::generator(alg, k));
        else
            args.emplace_back(v, WeilElement::scalar(alg, Coeff::sym(Expr::var(v))));
    }
    if (args.empty()) {
        if (std::optional<Rational> v = eval_rational(e, {})) return WeilElement::scalar(alg, Coeff::rat(*v));
        return WeilElement::scalar(alg, Coeff::flt(eval_numeric(e, {})));
    }
    return taylor_extend(e, args);
}

int width(const WeilAlgebraPtr& alg) {
    const int dim = alg->dimension();
    const int k = dim - 1;  // nilpotent basis monomials span V
    if (k <= 0) return 0;
    std::vector<std::vector<Rational>> rows;
    for (int i = 1; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            const Monomial prod = alg->basis()[i].times(alg->basis()[j]);
            std::vector<Rational> row(k, Rational(0));
            bool nonzero = false;
            for (const auto& [idx, q] : alg->rewrite(prod)) {
                row[idx - 1] = q;  // idx 0 is the unit, which never appears here
                nonzero = true;
            }
            if (nonzero) rows.push_back(std::move(row));
        }
    return k - rational_rank(std::move(rows));
}

bool ModuleAtomCmp::operator()(const ModuleAtom& a, const ModuleAtom& b) const {
    MonoCmp cmp;
    if (cmp(a.mono, b.mono)) return true;
    if (cmp(b.mono, a.mono)) return false;
    return a.gen < b.gen;
}

ModuleQuotient build_module_quotient(const WeilAlgebraPtr& alg, const std::vector<ModuleElement>& rel_rows,
                                     const std::string& prefix) {
    ModuleQuotient mod;
    mod.algebra = alg;
    mod.atom_prefix = prefix;
    std::vector<ModuleAtom> ambient;
    for (const Monomial& mono : alg->basis())
        for (int g = 0; g < alg->m(); ++g) ambient.push_back(ModuleAtom{mono, g});
    const int n = static_cast<int>(ambient.size());
    std::map<ModuleAtom, int, ModuleAtomCmp> amb_index;
    for (int i = 0; i < n; ++i) amb_index.emplace(ambient[i], i);
    auto col_of = [&](int idx) { return n - 1 - idx; };

    std::vector<std::vector<Rational>> rows;
    for (const ModuleElement& rel : rel_rows) {
        std::vector<Rational> row(n, Rational(0));
        bool nonzero = false;
        for (const auto& [atom, q] : rel) {
            if (q == 0) continue;
            auto it = amb_index.find(atom);
            if (it == amb_index.end()) throw AlgebraError("module relation atom is not in normal form");
            row[col_of(it->second)] = q;
            nonzero = true;
        }
        if (nonzero) rows.push_back(std::move(row));
    }

    const RREF red = RREF::compute(std::move(rows));
    std::vector<bool> is_pivot(n, false);
    std::vector<int> row_of_col(n, -1);
    for (size_t r = 0; r < red.pivot_cols.size(); ++r) {
        is_pivot[red.pivot_cols[r]] = true;
        row_of_col[red.pivot_cols[r]] = static_cast<int>(r);
    }

    std::map<ModuleAtom, int, ModuleAtomCmp> basis_index;
    for (int i = 0; i < n; ++i)
        if (!is_pivot[col_of(i)]) {
            basis_index.emplace(ambient[i], static_cast<int>(mod.basis_.size()));
            mod.basis_.push_back(ambient[i]);
        }
    for (int i = 0; i < n; ++i) {
        const int col = col_of(i);
        std::vector<std::pair<int, Rational>> combo;
        if (!is_pivot[col]) {
            combo.emplace_back(basis_index.at(ambient[i]), Rational(1));
        } else {
            const std::vector<Rational>& row = red.rows[row_of_col[col]];
            for (int c = 0; c < n; ++c) {
                if (c == col || row[c] == 0) continue;
                combo.emplace_back(basis_index.at(ambient[n - 1 - c]), -row[c]);
            }
            std::sort(combo.begin(), combo.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        }
        mod.rewrite_.emplace(ambient[i], std::move(combo));
    }
    return mod;
}

ModuleElement ModuleQuotient::reduce(const ModuleElement& raw) const {
    ModuleElement out;
    for (const auto& [atom, q] : raw) {
        if (q == 0) continue;
        // reduce the algebra part first so arbitrary monomials are accepted
        for (const auto& [bidx, bq] : algebra->rewrite(atom.mono)) {
            const ModuleAtom reduced{algebra->basis()[bidx], atom.gen};
            auto it = rewrite_.find(reduced);
            if (it == rewrite_.end()) throw AlgebraError("atom outside module ambient space");
            for (const auto& [idx, rq] : it->second) {
                Rational& slot = out[basis_[idx]];
                slot += q * bq * rq;
                if (slot == 0) out.erase(basis_[idx]);
            }
        }
    }
    return out;
}

std::string ModuleQuotient::atom_str(const ModuleAtom& a) const {
    const std::string gen = atom_prefix + "e" + std::to_string(a.gen + 1);
    // the tangent slice names its fiber coordinates y1..ym
    const std::string label = atom_prefix == "y" ? "y" + std::to_string(a.gen + 1) : gen;
    return a.mono.is_unit() ? label : a.mono.str() + "*" + label;
}

std::string module_element_str(const ModuleQuotient& mod, const ModuleElement& elem) {
    if (elem.empty()) return "0";
    std::string s;
    for (const auto& [atom, q] : elem) {
        const bool neg = q < 0;
        const Rational mag = neg ? Rational(-q) : q;
        if (s.empty())
            s += neg ? "-" : "";
        else
            s += neg ? " - " : " + ";
        if (mag != 1) s += rat_to_string(mag) + "*";
        s += mod.atom_str(atom);
    }
    return s;
}

KaehlerModule kaehler_forms(const WeilAlgebraPtr& alg) {
    if (alg->is_trivial()) return build_module_quotient(alg, {}, "d");
    std::vector<Poly> rels = alg->extra_relations();
    for (const Monomial& mono : enumerate_monomials(alg->m(), alg->l() + 1))
        if (mono.degree() == alg->l() + 1) {
            Poly p;
            p.emplace(mono, Rational(1));
            rels.push_back(p);
        }
    std::vector<ModuleElement> rows;
    for (const Poly& r : rels) {
        std::vector<Poly> dr;  // d(r) = sum_j dr_j * de_j
        for (int j = 0; j < alg->m(); ++j) dr.push_back(poly_derivative(r, j));
        for (const Monomial& mu : alg->basis()) {
            Poly mu_poly;
            mu_poly.emplace(mu, Rational(1));
            ModuleElement row;
            for (int j = 0; j < alg->m(); ++j) {
                const Poly prod = poly_mul(dr[j], mu_poly);
                for (const auto& [mono, q] : prod)
                    for (const auto& [bidx, bq] : alg->rewrite(mono)) {
                        const ModuleAtom atom{alg->basis()[bidx], j};
                        Rational& slot = row[atom];
                        slot += q * bq;
                        if (slot == 0) row.erase(atom);
                    }
            }
            if (!row.empty()) rows.push_back(std::move(row));
        }
    }
    return build_module_quotient(alg, rows, "d");
}

TangentSlice tangent_algebra(const WeilAlgebraPtr& disk) {
    if (!disk->is_disk() || disk->is_trivial())
        throw AlgebraError("tangent slice is only defined for disks without extra relations");
    std::vector<ModuleElement> rows;
    for (const Monomial& nu : enumerate_monomials(disk->m(), disk->l() + 1)) {
        if (nu.degree() != disk->l() + 1) continue;
        // replace one generator factor of nu by the matching fiber coordinate,
        // summed over all positions
        ModuleElement row;
        for (int j = 0; j < disk->m(); ++j) {
            if (nu.exps[j] == 0) continue;
            Monomial rest = nu;
            rest.exps[j] -= 1;
            row[ModuleAtom{rest, j}] += Rational(nu.exps[j]);
        }
        rows.push_back(std::move(row));
    }
    return build_module_quotient(disk, rows, "y");
}

ModuleElement form_to_tangent_function(const KaehlerModule& forms, const ModuleElement& form,
                                       const TangentSlice& slice) {
    if (!forms.algebra || !slice.algebra || !forms.algebra->same_as(*slice.algebra))
        throw AlgebraError("form and tangent slice must share an algebra");
    ModuleElement renamed;
    for (const auto& [atom, q] : forms.reduce(form)) renamed.emplace(atom, q);
    return slice.reduce(renamed);
}

WeilAlgebraPtr parse_algebra_spec(const std::string& s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    auto bad = [&](const std::string& why) {
        return AlgebraError("bad algebra spec '" + s + "': " + why);
    };
    if (t.rfind("D(", 0) != 0) throw bad("expected 'D(m,l)'");
    const size_t close = t.find(')');
    if (close == std::string::npos) throw bad("missing ')'");
    const std::string inner = t.substr(2, close - 2);
    const size_t comma = inner.find(',');
    if (comma == std::string::npos) throw bad("expected two integers 'm,l'");
    int m = 0, l = 0;
    try {
        size_t used = 0;
        m = std::stoi(inner.substr(0, comma), &used);
        if (used != comma) throw bad("bad generator count");
        const std::string ls = inner.substr(comma + 1);
        l = std::stoi(ls, &used);
        if (used != ls.size()) throw bad("bad order");
    } catch (const std::logic_error&) {
        throw bad("expected two integers 'm,l'");
    }
    WeilAlgebraPtr disk = WeilAlgebra::disk(m, l);
    std::string rest = t.substr(close + 1);
    if (rest.empty()) return disk;
    if (rest.rfind(";rel=", 0) != 0) throw bad("expected ';rel=' after 'D(m,l)'");
    rest = rest.substr(5);
    if (rest.empty()) throw bad("empty relation list");
    std::vector<Poly> rels;
    size_t start = 0;
    while (start <= rest.size()) {
        const size_t comma_pos = rest.find(',', start);
        const std::string piece =
            comma_pos == std::string::npos ? rest.substr(start) : rest.substr(start, comma_pos - start);
        if (piece.empty()) throw bad("empty relation");
        rels.push_back(expr_to_poly(parse(piece), m));
        if (comma_pos == std::string::npos) break;
        start = comma_pos + 1;
    }
    return WeilAlgebra::quotient(disk, std::move(rels));
}

WeilElement parse_element(const std::string& s, const WeilAlgebraPtr& alg) {
    return element_from_expr(parse(s), alg);
}

}  // namespace cahiers
