#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cahiers/expr.hpp"

namespace cahiers {

// Exponent vector over the nilpotent generators e1..em.
struct Monomial {
    std::vector<int> exps;

    static Monomial unit(int m) { return Monomial{std::vector<int>(m, 0)}; }
    int degree() const;
    bool is_unit() const { return degree() == 0; }
    Monomial times(const Monomial& other) const;
    std::string str() const;  // "1", "e1", "e1^2*e2"
    bool operator==(const Monomial& o) const { return exps == o.exps; }
};

// Graded lexicographic: lower total degree first; within a degree the monomial
// with the higher power of the earliest generator comes first.
struct MonoCmp {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

using Poly = std::map<Monomial, Rational, MonoCmp>;

std::string poly_str(const Poly& p);

// Interprets a parsed expression as a polynomial in e1..em with rational
// coefficients; rejects other variables, functions, and negative powers.
Poly expr_to_poly(const Expr& e, int m);

enum class CoeffMode { Rational, Float, Symbolic };

// Scalar coefficient in one of three modes; mixed arithmetic promotes
// rational -> float -> symbolic.
class Coeff {
public:
    Coeff() : v_(Rational(0)) {}
    static Coeff rat(const Rational& r) { return Coeff(r); }
    static Coeff flt(double d) { return Coeff(d); }
    static Coeff sym(const Expr& e) { return Coeff(e); }

    CoeffMode mode() const;
    const Rational& rat_value() const { return std::get<Rational>(v_); }
    double float_value() const { return std::get<double>(v_); }
    const Expr& expr_value() const { return std::get<Expr>(v_); }

    Coeff promoted(CoeffMode target) const;
    bool is_zero() const;
    Expr as_expr() const;
    double as_double() const;  // throws for symbolic
    std::string str() const;

    friend Coeff operator+(const Coeff& a, const Coeff& b);
    friend Coeff operator*(const Coeff& a, const Coeff& b);
    Coeff scaled(const Rational& q) const;  // exact scaling, mode-preserving
    Coeff negated() const { return scaled(-1); }
    bool operator==(const Coeff& o) const;

private:
    explicit Coeff(Rational r) : v_(std::move(r)) {}
    explicit Coeff(double d) : v_(d) {}
    explicit Coeff(Expr e) : v_(std::move(e)) {}
    std::variant<Rational, double, Expr> v_;
};

CoeffMode promote_mode(CoeffMode a, CoeffMode b);

class WeilAlgebra;
using WeilAlgebraPtr = std::shared_ptr<const WeilAlgebra>;

// Presentation of R[e1..em]/((e1..em)^{l+1} + extra relations) with a monomial
// basis and a rewrite table computed once by exact elimination.
class WeilAlgebra {
public:
    // no extra relations; m >= 1
    static WeilAlgebraPtr disk(int m, int l);
    // quotient of a disk by further relations (each with zero constant term)
    static WeilAlgebraPtr quotient(const WeilAlgebraPtr& base, std::vector<Poly> relations);
    // R itself: m = 0; used for unthickened coordinate algebras
    static WeilAlgebraPtr scalar();

    int m() const { return m_; }
    int l() const { return l_; }
    bool is_trivial() const { return m_ == 0; }
    bool is_disk() const { return extra_relations_.empty(); }
    const std::vector<Poly>& extra_relations() const { return extra_relations_; }
    const std::vector<Monomial>& basis() const { return basis_; }
    int dimension() const { return static_cast<int>(basis_.size()); }
    int basis_index(const Monomial& mono) const;  // -1 when not a basis monomial

    // normal form of a single monomial of any degree, over basis indices
    const std::vector<std::pair<int, Rational>>& rewrite(const Monomial& mono) const;

    bool same_as(const WeilAlgebra& other) const;
    std::string spec_string() const;  // "D(m,l)" or "D(m,l);rel=..."

private:
    WeilAlgebra() = default;
    void build();
    int m_ = 0;
    int l_ = 0;
    std::vector<Poly> extra_relations_;
    std::vector<Monomial> basis_;
    std::map<Monomial, int, MonoCmp> basis_index_;
    std::map<Monomial, std::vector<std::pair<int, Rational>>, MonoCmp> rewrite_;
    std::vector<std::pair<int, Rational>> empty_;
};

struct AlgebraError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Element in normal form: coefficients on basis monomials only, one mode.
class WeilElement {
public:
    explicit WeilElement(WeilAlgebraPtr alg, CoeffMode mode = CoeffMode::Rational);
    static WeilElement scalar(WeilAlgebraPtr alg, const Coeff& c);
    static WeilElement generator(WeilAlgebraPtr alg, int i);  // e_{i+1}, zero-based i
    static WeilElement from_poly(WeilAlgebraPtr alg, const std::map<Monomial, Coeff, MonoCmp>& raw);

    const WeilAlgebraPtr& algebra() const { return alg_; }
    CoeffMode mode() const { return mode_; }
    const std::map<Monomial, Coeff, MonoCmp>& coeffs() const { return coeffs_; }
    Coeff coeff(const Monomial& mono) const;
    Coeff scalar_part() const;
    WeilElement nilpotent_part() const;
    bool is_zero() const { return coeffs_.empty(); }
    bool is_nilpotent() const;  // zero scalar part (exact / structural test)

    WeilElement promoted(CoeffMode target) const;
    std::string str() const;
    bool operator==(const WeilElement& o) const;
    bool operator!=(const WeilElement& o) const { return !(*this == o); }

    friend WeilElement operator+(const WeilElement& a, const WeilElement& b);
    friend WeilElement operator-(const WeilElement& a, const WeilElement& b);
    friend WeilElement operator*(const WeilElement& a, const WeilElement& b);
    WeilElement scaled(const Coeff& c) const;
    WeilElement pow_int(int n) const;

private:
    WeilAlgebraPtr alg_;
    CoeffMode mode_;
    std::map<Monomial, Coeff, MonoCmp> coeffs_;
};

// Truncated Taylor extension of f along Weil-valued arguments: the sum of
// (1/I!) (d_I f)(scalar parts) * (nilpotent parts)^I over |I| <= l.
// Rational-mode arguments stay rational when every derivative value evaluates
// exactly; otherwise the result degrades to float mode.
WeilElement taylor_extend(const Expr& f, const std::vector<std::pair<std::string, WeilElement>>& args);

// Evaluates an expression whose variables are e1..em (generators) and
// arbitrary smooth names (symbolic scalars) into the algebra.
WeilElement element_from_expr(const Expr& e, const WeilAlgebraPtr& alg);

int width(const WeilAlgebraPtr& alg);  // dim V/V^2

// 0-based index for a generator-shaped name "e<k>" with k <= m; -1 for names
// that are not generator shaped; throws when k is out of range.
int generator_index(const std::string& name, int m);

// "D(m,l)" or "D(m,l);rel=<poly>,<poly>" with polys in e1..em
WeilAlgebraPtr parse_algebra_spec(const std::string& s);
// element literal such as "3 + 2*e1 + e1*e2" (smooth variables allowed)
WeilElement parse_element(const std::string& s, const WeilAlgebraPtr& alg);

// Basis atom of a free rank-m module over the algebra: mono * (d e_gen) for
// Kaehler forms, mono * y_gen for the tangent slice.
struct ModuleAtom {
    Monomial mono;
    int gen;
    bool operator==(const ModuleAtom& o) const { return mono == o.mono && gen == o.gen; }
};

struct ModuleAtomCmp {
    bool operator()(const ModuleAtom& a, const ModuleAtom& b) const;
};

using ModuleElement = std::map<ModuleAtom, Rational, ModuleAtomCmp>;

// A quotient of the free module on m atoms over the algebra, presented by an
// exact rewrite table like the algebra itself.
class ModuleQuotient {
public:
    int dimension() const { return static_cast<int>(basis_.size()); }
    const std::vector<ModuleAtom>& basis() const { return basis_; }
    ModuleElement reduce(const ModuleElement& raw) const;
    std::string atom_str(const ModuleAtom& a) const;

    WeilAlgebraPtr algebra;
    std::string atom_prefix;  // "d" for Kaehler covectors, "y" for tangent slice

private:
    friend ModuleQuotient build_module_quotient(const WeilAlgebraPtr&, const std::vector<ModuleElement>&,
                                                const std::string&);
    std::vector<ModuleAtom> basis_;
    std::map<ModuleAtom, std::vector<std::pair<int, Rational>>, ModuleAtomCmp> rewrite_;
};

using KaehlerModule = ModuleQuotient;
using TangentSlice = ModuleQuotient;

// Free module on de_1..de_m modulo mu * d(r) for every relation generator r,
// including the truncation monomials of degree l+1.
KaehlerModule kaehler_forms(const WeilAlgebraPtr& alg);

// y-linear slice of the tangent algebra of a disk: free module on y_1..y_m
// modulo the symmetrized degree-(l+1) relations.
TangentSlice tangent_algebra(const WeilAlgebraPtr& disk);

// de_i -> y_i on atoms, then reduction in the slice.
ModuleElement form_to_tangent_function(const KaehlerModule& forms, const ModuleElement& form,
                                       const TangentSlice& slice);

std::string module_element_str(const ModuleQuotient& mod, const ModuleElement& elem);

}  // namespace cahiers
