#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cahiers/bicomplex.hpp"
#include "cahiers/parser.hpp"

using namespace cahiers;

namespace {

const JetContext kWave({"t", "x"}, {"u"});
const JetContext kLine({"x"}, {"u"});

LocalForm form(const JetContext& ctx, const std::string& s) { return parse_form(ctx, s); }

LocalForm d_total(const LocalForm& w) { return d_H(w) + d_V(w); }

}  // namespace

TEST_CASE("wedge words canonicalize with parity signs") {
    CHECK(form(kWave, "dt*dx").str() == "dt*dx");
    CHECK(form(kWave, "dx*dt").str() == "-dt*dx");
    CHECK(form(kWave, "dx*dx").str() == "0");
    CHECK(form(kWave, "th(u)*dx").str() == "-dx*th(u)");
    CHECK(form(kWave, "th(u)*th(u)").str() == "0");
    CHECK(form(kWave, "dx*dt + dt*dx").str() == "0");
    // theta order: by field, then multi-index
    CHECK(form(kWave, "th(u,x)*th(u)").str() == "-th(u)*th(u,x)");
}

TEST_CASE("bidegrees") {
    CHECK(form(kWave, "u*dt*dx").bidegree() == std::pair{2, 0});
    CHECK(form(kWave, "th(u)*th(u,x)").bidegree() == std::pair{0, 2});
    CHECK(form(kWave, "dx*th(u)").bidegree() == std::pair{1, 1});
    CHECK(form(kWave, "u_x^2").bidegree() == std::pair{0, 0});
    CHECK(!form(kWave, "dx + th(u)").bidegree().has_value());
    CHECK(!LocalForm(kWave).bidegree().has_value());
}

TEST_CASE("vertical and horizontal differentials on functions") {
    CHECK(d_H(form(kLine, "u")).str() == "u_x*dx");
    CHECK(d_V(form(kLine, "u")).str() == "th(u)");
    CHECK(d_V(form(kLine, "x")).str() == "0");
    CHECK(d_H(form(kWave, "u*u_x")).str() == "(u*u_tx + u_t*u_x)*dt + (u_x^2 + u*u_xx)*dx");
    CHECK(d_V(form(kWave, "u*u_x")).str() == "u_x*th(u) + u*th(u,x)");
    // structure equation for contact covectors
    CHECK(d_H(form(kLine, "th(u)")).str() == "dx*th(u,x)");
    CHECK(d_V(form(kLine, "th(u)")).str() == "0");
    CHECK(d_H(form(kLine, "dx")).str() == "0");
}

TEST_CASE("graded commutativity of the wedge") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        const int pa = static_cast<int>(rng() % 2), qa = static_cast<int>(rng() % 2);
        const int pb = static_cast<int>(rng() % 2), qb = static_cast<int>(rng() % 2);
        const LocalForm a = random_form(kWave, 2, pa, qa, rng);
        const LocalForm b = random_form(kWave, 2, pb, qb, rng);
        const int sign = ((pa + qa) * (pb + qb)) % 2 == 0 ? 1 : -1;
        const LocalForm diff = wedge(a, b) - wedge(b, a).scaled(Expr(sign));
        CAPTURE(a.str());
        CAPTURE(b.str());
        CHECK(is_zero_form(diff, 600 + trial));
    }
    // associativity sample
    const LocalForm a = form(kWave, "u*dt");
    const LocalForm b = form(kWave, "u_x*dx + th(u)");
    const LocalForm c = form(kWave, "th(u,x)");
    CHECK(is_zero_form(wedge(wedge(a, b), c) - wedge(a, wedge(b, c))));
}

TEST_CASE("the differentials square to zero and anticommute") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 15; ++trial) {
        const JetContext& ctx = (trial % 2 == 0) ? kWave : kLine;
        const int d = static_cast<int>(ctx.coords().size());
        const int p = static_cast<int>(rng() % (d + 1));
        const int q = static_cast<int>(rng() % 3);
        const LocalForm w = random_form(ctx, 3, p, q, rng);
        CAPTURE(w.str());
        CHECK(is_zero_form(d_H(d_H(w)), 100 + trial));
        CHECK(is_zero_form(d_V(d_V(w)), 200 + trial));
        CHECK(is_zero_form(d_H(d_V(w)) + d_V(d_H(w)), 300 + trial));
    }
}

TEST_CASE("contraction is a graded derivation") {
    JetVectorField X;
    X.X["t"] = parse("u");
    X.X["x"] = parse("x + u_t");
    X.Y["u"] = parse("u^2");
    X.Y["u_x"] = parse("u_tx + 1");
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 8; ++trial) {
        const LocalForm a = random_form(kWave, 2, static_cast<int>(rng() % 2), static_cast<int>(rng() % 2), rng);
        const LocalForm b = random_form(kWave, 2, static_cast<int>(rng() % 2), static_cast<int>(rng() % 2), rng);
        const auto deg_a = a.bidegree();
        if (!deg_a) continue;
        const int sign = (deg_a->first + deg_a->second) % 2 == 0 ? 1 : -1;
        const LocalForm lhs = contract(X, wedge(a, b));
        const LocalForm rhs = wedge(contract(X, a), b) + wedge(a, contract(X, b)).scaled(Expr(sign));
        CAPTURE(a.str());
        CAPTURE(b.str());
        CHECK(is_zero_form(lhs - rhs, 700 + trial));
    }
}

TEST_CASE("contraction against basis covectors") {
    JetVectorField ddx;
    ddx.X["x"] = parse("1");
    CHECK(contract(ddx, form(kLine, "dx")).str() == "1");
    // iota of d/dx on a contact form exposes the -u_{I+mu} X^mu remainder
    CHECK(contract(ddx, form(kLine, "th(u)")).str() == "-u_x");
    // the total lift d/dx + u_x d/du + ... annihilates contact forms
    JetVectorField lift;
    lift.X["x"] = parse("1");
    lift.Y["u"] = parse("u_x");
    lift.Y["u_x"] = parse("u_xx");
    CHECK(contract(lift, form(kLine, "th(u)")).str() == "0");
    CHECK(contract(lift, form(kLine, "th(u,x)")).str() == "0");
    // degree-2 contraction walks positions with alternating signs
    JetVectorField ddt;
    ddt.X["t"] = parse("1");
    CHECK(contract(ddt, form(kWave, "dt*dx")).str() == "dx");
    CHECK(contract(ddt, form(kWave, "dx*dt")).str() == "-dx");
    // missing components read as zero
    JetVectorField empty;
    CHECK(contract(empty, form(kWave, "dt*dx")).str() == "0");
}

TEST_CASE("lie derivative along an evolutionary field") {
    // translation flow: Q = u_x moves the section; on the Lagrangian density
    // (1/2) u_x^2 dx it produces the total x-derivative of the density
    const JetVectorField Q = prolong_evolutionary(kLine, {{"u", parse("u_x")}}, 3);
    const LocalForm L = form(kLine, "1/2*u_x^2*dx");
    CHECK(lie_derivative(Q, L).str() == "u_x*u_xx*dx");
    // definitional identity: L_X = iota_X d + d iota_X on a random sample
    std::mt19937_64 rng(53);
    JetVectorField X;
    X.X["x"] = parse("u");
    X.Y["u"] = parse("x*u_x");
    X.Y["u_x"] = parse("u^2");
    for (int trial = 0; trial < 5; ++trial) {
        const LocalForm w = random_form(kLine, 2, static_cast<int>(rng() % 2), static_cast<int>(rng() % 2), rng);
        const LocalForm lhs = lie_derivative(X, w);
        const LocalForm rhs = contract(X, d_total(w)) + d_total(contract(X, w));
        CHECK(is_zero_form(lhs - rhs, 800 + trial));
    }
}

TEST_CASE("pullback along a prolonged section") {
    // contact forms die on prolongations
    const SectionData phi{{"u", parse("sin(x - t) + t*x^2")}};
    CHECK(pullback_along(form(kWave, "th(u)"), phi).is_structurally_zero());
    CHECK(pullback_along(form(kWave, "th(u,x)*dx"), phi).is_structurally_zero());
    CHECK(pullback_along(form(kWave, "u*th(u,t)"), phi).is_structurally_zero());
    // coefficients are substituted along the jet
    const LocalForm pulled = pullback_along(form(kLine, "u_x*dx"), {{"u", parse("0 - cos(x)")}});
    REQUIRE(pulled.terms().size() == 1);
    CHECK(pulled.str() == "sin(x)*dx");
    // mixed terms keep their horizontal remainder only
    const LocalForm mixed = pullback_along(form(kLine, "u*dx + u_x*th(u)"), {{"u", parse("x^2")}});
    CHECK(mixed.str() == "x^2*dx");
    // pullback intertwines d_H with the base differential: for a (0,0)-form f,
    // pullback(d_H f) equals differentiating the substituted coefficient
    const Expr f = parse("u*u_x + x");
    const SectionData psi{{"u", parse("x^3 + sin(x)")}};
    const LocalForm lhs = pullback_along(d_H(LocalForm::function(kLine, f)), psi);
    const auto jets = prolongation_map(kLine, psi, 2);
    LocalForm rhs(kLine);
    rhs.add_term(differentiate(substitute(f, {jets.begin(), jets.end()}), "x"),
                 {Covector::dx(0)});
    CHECK(is_zero_form(lhs - rhs, 900));
}

TEST_CASE("form parsing") {
    CHECK(form(kWave, "u_t*dt*dx - th(u,x)*dx + 2*th(u)").str() ==
          "u_t*dt*dx + dx*th(u,x) + 2*th(u)");
    CHECK(form(kLine, "du(u)").str() == "u_x*dx + th(u)");
    CHECK(form(kWave, "du(u,x)*dx").str() == "u_tx*dt*dx - dx*th(u,x)");
    CHECK(form(kLine, "u/2*dx").str() == "1/2*u*dx");
    CHECK(form(kLine, "-th(u)").str() == "-th(u)");
    CHECK(form(kLine, "sin(x)*cos(x)*dx").str() == "cos(x)*sin(x)*dx");
    // scalar-only input is a (0,0)-form
    CHECK(form(kWave, "u_x^2").bidegree() == std::pair{0, 0});
    // errors: unknown fields, malformed covectors, division by a covector
    CHECK_THROWS_AS(form(kWave, "th(v)"), ParseError);
    CHECK_THROWS_AS(form(kWave, "th(u,q)"), ParseError);
    CHECK_THROWS_AS(form(kWave, "th(u"), ParseError);
    CHECK_THROWS_AS(form(kWave, "u/dx"), ParseError);
    CHECK_THROWS_AS(form(kWave, "dx*"), ParseError);
}

TEST_CASE("random forms respect the requested bidegree") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 6; ++trial) {
        const LocalForm w = random_form(kWave, 3, 1, 1, rng);
        CHECK(w.bidegree() == std::pair{1, 1});
    }
    CHECK_THROWS_AS(random_form(kLine, 2, 2, 0, rng), FormError);  // p exceeds base dim
}

TEST_CASE("zero form formatting") {
    CHECK(LocalForm(kWave).str() == "0");
    CHECK((form(kWave, "dx") - form(kWave, "dx")).str() == "0");
    CHECK((form(kWave, "u*dt").scaled(parse("0"))).str() == "0");
}
