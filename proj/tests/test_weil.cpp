#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cahiers/parser.hpp"
#include "cahiers/weil.hpp"

using namespace cahiers;

// ---------------------------------------------------------------------------
// Test-local oracle: an independently written linear-algebra model of the
// quotient ring.  Ambient space = monomials of degree <= l in plain lex order
// (deliberately a different order than the library uses); the ideal image is
// the row span of every monomial multiple of every extra relation, and class
// equality is tested by reduction against that span.
// ---------------------------------------------------------------------------
namespace oracle {

using Vec = std::vector<Rational>;

struct Ambient {
    int m = 0;
    int l = 0;
    std::vector<std::vector<int>> monos;      // plain lex over exponent vectors
    std::map<std::vector<int>, int> index_of;

    Ambient(int m_, int l_) : m(m_), l(l_) {
        std::vector<int> cur(m, 0);
        enumerate(cur, 0, 0);
        std::sort(monos.begin(), monos.end());  // plain lex
        for (size_t i = 0; i < monos.size(); ++i) index_of[monos[i]] = static_cast<int>(i);
    }
    void enumerate(std::vector<int>& cur, int pos, int deg) {
        if (pos == m) {
            monos.push_back(cur);
            return;
        }
        for (int k = 0; deg + k <= l; ++k) {
            cur[pos] = k;
            enumerate(cur, pos + 1, deg + k);
        }
        cur[pos] = 0;
    }
    int size() const { return static_cast<int>(monos.size()); }
};

// Row-reduced span with pivots chosen on the *last* nonzero entry, again on
// purpose not the library's pivot rule.
struct Span {
    std::vector<Vec> rows;            // each normalized to pivot coefficient 1
    std::vector<int> pivots;          // pivot column per row

    void reduce(Vec& v) const {
        for (size_t r = 0; r < rows.size(); ++r) {
            const Rational c = v[pivots[r]];
            if (c == 0) continue;
            for (size_t j = 0; j < v.size(); ++j) v[j] -= c * rows[r][j];
        }
    }
    bool add(Vec v) {  // true when v was independent
        reduce(v);
        int p = -1;
        for (int j = static_cast<int>(v.size()) - 1; j >= 0; --j)
            if (v[j] != 0) {
                p = j;
                break;
            }
        if (p < 0) return false;
        const Rational inv = v[p];
        for (auto& x : v) x /= inv;
        rows.push_back(std::move(v));
        pivots.push_back(p);
        return true;
    }
    bool contains(Vec v) const {
        reduce(v);
        return std::all_of(v.begin(), v.end(), [](const Rational& x) { return x == 0; });
    }
    int rank() const { return static_cast<int>(rows.size()); }
};

// Ideal image inside the ambient space: span of mono * r for each extra
// relation r and each ambient monomial mono, with degree-> l overflow dropped
// (that overflow is already zero in the ambient truncation).
Span relation_span(const Ambient& amb, const std::vector<Poly>& relations) {
    Span span;
    for (const Poly& r : relations) {
        for (const auto& mu : amb.monos) {
            Vec row(amb.size(), Rational(0));
            bool any = false;
            for (const auto& [mono, coef] : r) {
                std::vector<int> prod = mu;
                int deg = 0;
                for (int j = 0; j < amb.m; ++j) {
                    prod[j] += mono.exps[j];
                    deg += prod[j];
                }
                if (deg > amb.l) continue;
                row[amb.index_of.at(prod)] += coef;
                any = true;
            }
            if (any) span.add(std::move(row));
        }
    }
    return span;
}

Vec to_vec(const Ambient& amb, const std::map<Monomial, Rational, MonoCmp>& poly) {
    Vec v(amb.size(), Rational(0));
    for (const auto& [mono, coef] : poly) {
        int deg = 0;
        for (int e : mono.exps) deg += e;
        if (deg > amb.l) continue;  // dead by truncation
        v[amb.index_of.at(mono.exps)] += coef;
    }
    return v;
}

}  // namespace oracle

namespace {

Poly poly_of(const std::string& s, int m) { return expr_to_poly(parse(s), m); }

std::map<Monomial, Rational, MonoCmp> rational_coeffs(const WeilElement& e) {
    std::map<Monomial, Rational, MonoCmp> out;
    for (const auto& [mono, c] : e.coeffs()) out[mono] = c.rat_value();
    return out;
}

// element with small random rational coefficients on every basis monomial
WeilElement random_element(const WeilAlgebraPtr& alg, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-4, 4);
    std::uniform_int_distribution<int> den(1, 3);
    std::map<Monomial, Coeff, MonoCmp> raw;
    for (const auto& mono : alg->basis()) raw[mono] = Coeff::rat(Rational(num(rng), den(rng)));
    return WeilElement::from_poly(alg, raw);
}

struct AlgebraCase {
    WeilAlgebraPtr alg;
    std::vector<Poly> extras;
};

std::vector<AlgebraCase> algebra_cases() {
    std::vector<AlgebraCase> out;
    auto add_disk = [&](int m, int l) { out.push_back({WeilAlgebra::disk(m, l), {}}); };
    add_disk(1, 1);
    add_disk(1, 4);
    add_disk(2, 1);
    add_disk(2, 2);
    add_disk(3, 1);
    add_disk(2, 3);
    auto add_quot = [&](int m, int l, const std::vector<std::string>& rels) {
        std::vector<Poly> polys;
        for (const auto& s : rels) polys.push_back(poly_of(s, m));
        out.push_back({WeilAlgebra::quotient(WeilAlgebra::disk(m, l), polys), polys});
    };
    add_quot(2, 2, {"e1*e2"});
    add_quot(3, 1, {"e1*e2", "e2*e3"});
    add_quot(2, 3, {"e1^2 - e2^2"});
    add_quot(3, 2, {"e1 - e2"});
    return out;
}

}  // namespace

TEST_CASE("basis monomial order is graded lex") {
    const auto d22 = WeilAlgebra::disk(2, 2);
    std::vector<std::string> names;
    for (const auto& mono : d22->basis()) names.push_back(mono.str());
    CHECK(names == std::vector<std::string>{"1", "e1", "e2", "e1^2", "e1*e2", "e2^2"});
    CHECK(d22->dimension() == 6);
    CHECK(WeilAlgebra::disk(1, 4)->dimension() == 5);
    CHECK(WeilAlgebra::disk(3, 1)->dimension() == 4);
    CHECK(WeilAlgebra::scalar()->is_trivial());
    CHECK(WeilAlgebra::scalar()->dimension() == 1);
}

TEST_CASE("dimensions and bases agree with an independent elimination") {
    for (const auto& [alg, extras] : algebra_cases()) {
        CAPTURE(alg->spec_string());
        const oracle::Ambient amb(alg->m(), alg->l());
        oracle::Span span = oracle::relation_span(amb, extras);
        // dimension = ambient minus the rank of the ideal image
        CHECK(alg->dimension() == amb.size() - span.rank());
        // the library basis is independent modulo the ideal and completes it
        for (const auto& mono : alg->basis()) {
            oracle::Vec unit(amb.size(), Rational(0));
            unit[amb.index_of.at(mono.exps)] = 1;
            CHECK(span.add(std::move(unit)));
        }
        CHECK(span.rank() == amb.size());
    }
}

TEST_CASE("products reduce to the same class as the oracle") {
    std::mt19937_64 rng(5);
    for (const auto& [alg, extras] : algebra_cases()) {
        CAPTURE(alg->spec_string());
        const oracle::Ambient amb(alg->m(), alg->l());
        const oracle::Span span = oracle::relation_span(amb, extras);
        for (int trial = 0; trial < 4; ++trial) {
            const WeilElement x = random_element(alg, rng);
            const WeilElement y = random_element(alg, rng);
            const WeilElement lib = x * y;
            // raw polynomial product, truncated to the ambient space
            std::map<Monomial, Rational, MonoCmp> raw;
            for (const auto& [ma, ca] : rational_coeffs(x))
                for (const auto& [mb, cb] : rational_coeffs(y)) raw[ma.times(mb)] += ca * cb;
            oracle::Vec diff = oracle::to_vec(amb, raw);
            const oracle::Vec libv = oracle::to_vec(amb, rational_coeffs(lib));
            for (size_t j = 0; j < diff.size(); ++j) diff[j] -= libv[j];
            CHECK(span.contains(std::move(diff)));
        }
    }
}

TEST_CASE("ring laws hold exactly on random rational elements") {
    std::mt19937_64 rng(7);
    const auto alg = WeilAlgebra::quotient(WeilAlgebra::disk(2, 3), {poly_of("e1^2 - e2^2", 2)});
    for (int trial = 0; trial < 6; ++trial) {
        const WeilElement a = random_element(alg, rng);
        const WeilElement b = random_element(alg, rng);
        const WeilElement c = random_element(alg, rng);
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * b == b * a);
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a + (b - b) == a);
    }
    // nilpotency of the maximal ideal: any nilpotent element dies at power l+1
    const WeilElement n = random_element(alg, rng).nilpotent_part();
    CHECK(n.pow_int(alg->l() + 1).is_zero());
}

TEST_CASE("inversion by geometric series") {
    const auto alg = WeilAlgebra::disk(1, 3);
    const WeilElement u = parse_element("2 + e1 - e1^3", alg);
    CHECK(u * u.pow_int(-1) == WeilElement::scalar(alg, Coeff::rat(1)));
    CHECK(u.pow_int(-2) * u * u == WeilElement::scalar(alg, Coeff::rat(1)));
    CHECK(parse_element("(1 + e1)^-1", alg).str() == "1 - e1 + e1^2 - e1^3");
    // zero scalar part is not invertible
    CHECK_THROWS_AS(WeilElement::generator(alg, 0).pow_int(-1), AlgebraError);
}

TEST_CASE("taylor extension is exactly rational at rational points") {
    const auto d14 = WeilAlgebra::disk(1, 4);
    const WeilElement arg = WeilElement::generator(d14, 0);  // 0 + e1
    const WeilElement ex = taylor_extend(parse("exp(x)"), {{"x", arg}});
    REQUIRE(ex.mode() == CoeffMode::Rational);
    Rational fact = 1;
    for (int k = 0; k <= 4; ++k) {
        Monomial mono{{k}};
        if (k > 0) fact *= k;
        CHECK(ex.coeff(mono).rat_value() == Rational(1) / fact);
    }
    // cos at 0 keeps exact alternating inverse factorials
    const WeilElement co = taylor_extend(parse("cos(x)"), {{"x", arg}});
    CHECK(co.str() == "1 - 1/2*e1^2 + 1/24*e1^4");
    // shifted rational point stays exact for polynomials
    const auto d12 = WeilAlgebra::disk(1, 2);
    const WeilElement shifted =
        taylor_extend(parse("x^3"), {{"x", WeilElement::scalar(d12, Coeff::rat(Rational(1, 2))) +
                                               WeilElement::generator(d12, 0)}});
    CHECK(shifted.str() == "1/8 + 3/4*e1 + 3/2*e1^2");
}

TEST_CASE("taylor extension degrades to float when a value is not exact") {
    const auto d12 = WeilAlgebra::disk(1, 2);
    const WeilElement arg = WeilElement::scalar(d12, Coeff::rat(1)) + WeilElement::generator(d12, 0);
    const WeilElement ex = taylor_extend(parse("exp(x)"), {{"x", arg}});
    REQUIRE(ex.mode() == CoeffMode::Float);
    CHECK(ex.coeff(Monomial{{0}}).float_value() == doctest::Approx(std::exp(1.0)));
    CHECK(ex.coeff(Monomial{{1}}).float_value() == doctest::Approx(std::exp(1.0)));
    CHECK(ex.coeff(Monomial{{2}}).float_value() == doctest::Approx(std::exp(1.0) / 2));
}

TEST_CASE("taylor extension with a symbolic base point") {
    const auto d13 = WeilAlgebra::disk(1, 3);
    const WeilElement arg = WeilElement::scalar(d13, Coeff::sym(parse("x"))) +
                            WeilElement::generator(d13, 0);
    const WeilElement s = taylor_extend(parse("sin(x)"), {{"x", arg}});
    REQUIRE(s.mode() == CoeffMode::Symbolic);
    CHECK(s.coeff(Monomial{{0}}).expr_value() == parse("sin(x)"));
    CHECK(s.coeff(Monomial{{1}}).expr_value() == parse("cos(x)"));
    CHECK(s.coeff(Monomial{{2}}).expr_value() == parse("-1/2*sin(x)"));
    CHECK(s.coeff(Monomial{{3}}).expr_value() == parse("-1/6*cos(x)"));
}

TEST_CASE("multivariate taylor extension") {
    const auto d21 = WeilAlgebra::disk(2, 1);
    const WeilElement x = WeilElement::scalar(d21, Coeff::rat(2)) + WeilElement::generator(d21, 0);
    const WeilElement y = WeilElement::scalar(d21, Coeff::rat(3)) + WeilElement::generator(d21, 1);
    CHECK(taylor_extend(parse("x*y"), {{"x", x}, {"y", y}}).str() == "6 + 3*e1 + 2*e2");
    // first-order mixed partials appear at l = 2
    const auto d22 = WeilAlgebra::disk(2, 2);
    const WeilElement x2 = WeilElement::scalar(d22, Coeff::rat(2)) + WeilElement::generator(d22, 0);
    const WeilElement y2 = WeilElement::scalar(d22, Coeff::rat(3)) + WeilElement::generator(d22, 1);
    CHECK(taylor_extend(parse("x*y"), {{"x", x2}, {"y", y2}}).str() ==
          "6 + 3*e1 + 2*e2 + e1*e2");
}

TEST_CASE("chain rule through nilpotent arguments") {
    // composite evaluation equals evaluation of the composite
    const auto alg = WeilAlgebra::disk(1, 3);
    const WeilElement t = WeilElement::generator(alg, 0);
    const WeilElement inner = taylor_extend(parse("x^2 + x"), {{"x", t}});
    const WeilElement lhs = taylor_extend(parse("exp(y)"), {{"y", inner}});
    const WeilElement rhs = taylor_extend(parse("exp(x^2 + x)"), {{"x", t}});
    CHECK(lhs == rhs);
}

TEST_CASE("element literals and generator names") {
    const auto d21 = WeilAlgebra::disk(2, 1);
    CHECK(parse_element("3 + 2*e1 + e1*e2", d21).str() == "3 + 2*e1");  // e1*e2 dies at l=1
    CHECK(element_from_expr(parse("e1 + e2"), d21) ==
          WeilElement::generator(d21, 0) + WeilElement::generator(d21, 1));
    CHECK_THROWS_AS(parse_element("e3", d21), AlgebraError);
    CHECK(generator_index("e2", 3) == 1);
    CHECK(generator_index("foo", 3) == -1);
    CHECK_THROWS_AS(generator_index("e9", 3), AlgebraError);
    // smooth names survive as symbolic scalars
    const WeilElement sym = parse_element("a + a*e1", d21);
    CHECK(sym.mode() == CoeffMode::Symbolic);
    CHECK(sym.coeff(Monomial{{1, 0}}).expr_value() == parse("a"));
}

TEST_CASE("algebra spec strings round trip") {
    const auto q = parse_algebra_spec("D(2,2);rel=e1*e2");
    CHECK(q->dimension() == 5);
    CHECK(parse_algebra_spec(q->spec_string())->same_as(*q));
    CHECK(parse_algebra_spec("D(1,4)")->dimension() == 5);
    CHECK_THROWS_AS(parse_algebra_spec("D(0,2)"), AlgebraError);
    CHECK_THROWS_AS(parse_algebra_spec("D(2)"), AlgebraError);
    CHECK_THROWS_AS(parse_algebra_spec("D(2,2);rel=1 + e1"), AlgebraError);  // constant term
    CHECK_THROWS_AS(parse_algebra_spec("D(2,2);rel=x"), AlgebraError);       // not a generator
}

TEST_CASE("coefficient modes promote upward") {
    const Coeff r = Coeff::rat(Rational(1, 2));
    const Coeff f = Coeff::flt(0.25);
    const Coeff s = Coeff::sym(parse("x"));
    CHECK((r + r).mode() == CoeffMode::Rational);
    CHECK((r * f).mode() == CoeffMode::Float);
    CHECK((r * f).float_value() == doctest::Approx(0.125));
    CHECK((r + s).mode() == CoeffMode::Symbolic);
    CHECK((r + s).expr_value() == parse("1/2 + x"));
    CHECK(Coeff::rat(0).is_zero());
    CHECK(!Coeff::flt(1e-30).is_zero());
}

TEST_CASE("width counts independent first-order directions") {
    CHECK(width(WeilAlgebra::disk(3, 1)) == 3);
    CHECK(width(WeilAlgebra::disk(1, 4)) == 1);
    CHECK(width(WeilAlgebra::quotient(WeilAlgebra::disk(3, 1), {poly_of("e1 - e2", 3)})) == 2);
    CHECK(width(WeilAlgebra::quotient(WeilAlgebra::disk(2, 2), {poly_of("e1*e2", 2)})) == 2);
    CHECK(width(WeilAlgebra::scalar()) == 0);
}

TEST_CASE("differential forms module and tangent slice") {
    CHECK(kaehler_forms(WeilAlgebra::disk(1, 1)).dimension() == 1);
    CHECK(kaehler_forms(WeilAlgebra::disk(1, 2)).dimension() == 2);
    CHECK(kaehler_forms(WeilAlgebra::disk(2, 1)).dimension() == 3);
    CHECK(kaehler_forms(WeilAlgebra::disk(2, 2)).dimension() == 8);
    for (int m = 1; m <= 2; ++m)
        for (int l = 1; l <= 3; ++l) {
            CAPTURE(m);
            CAPTURE(l);
            const auto disk = WeilAlgebra::disk(m, l);
            CHECK(kaehler_forms(disk).dimension() == tangent_algebra(disk).dimension());
        }
    // truncation kills the top-degree form coefficient in one variable
    const auto forms13 = kaehler_forms(WeilAlgebra::disk(1, 3));
    ModuleElement top{{ModuleAtom{Monomial{{3}}, 0}, Rational(1)}};
    CHECK(forms13.reduce(top).empty());
    // transport of a form to a function on the tangent slice
    const auto d21 = WeilAlgebra::disk(2, 1);
    const auto forms = kaehler_forms(d21);
    const auto slice = tangent_algebra(d21);
    ModuleElement form{{ModuleAtom{Monomial{{0, 1}}, 0}, Rational(1)}};  // e2 * de1
    const ModuleElement fn = form_to_tangent_function(forms, form, slice);
    CHECK(module_element_str(slice, fn) == "-e1*y2");
}

TEST_CASE("element printing") {
    const auto alg = WeilAlgebra::disk(2, 2);
    CHECK(parse_element("1 - 2*e1 + 1/3*e1*e2", alg).str() == "1 - 2*e1 + 1/3*e1*e2");
    CHECK(WeilElement(alg).str() == "0");
    CHECK(WeilElement::scalar(alg, Coeff::flt(2.5)).str() == "2.5");
}
