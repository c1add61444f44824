// End-to-end acceptance checks: one line of output per check, exit 0 only
// when every check passes within its runtime budget.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cahiers/bicomplex.hpp"
#include "cahiers/parser.hpp"
#include "cahiers/variational.hpp"

using namespace cahiers;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            detail = msg;
        }
    }
};

// ---------------------------------------------------------------- check 1
Outcome first_order_ad_matches_finite_differences() {
    Outcome r;
    const auto d11 = WeilAlgebra::disk(1, 1);
    const char* fns[] = {"sin(x)", "exp(x)", "x^3", "exp(sin(x))"};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> pick(-2.0, 2.0);
    const double h = 1e-5;
    for (const char* s : fns) {
        const Expr f = parse(s);
        for (int i = 0; i < 20; ++i) {
            const double p = pick(rng);
            const WeilElement arg =
                WeilElement::scalar(d11, Coeff::flt(p)) + WeilElement::generator(d11, 0);
            const double ad = taylor_extend(f, {{"x", arg}}).coeff(Monomial{{1}}).as_double();
            const double fd =
                (eval_numeric(f, {{"x", p + h}}) - eval_numeric(f, {{"x", p - h}})) / (2 * h);
            r.require(std::fabs(ad - fd) <= 1e-6 * std::max(1.0, std::fabs(fd)),
                      std::string(s) + " at x=" + std::to_string(p) + ": ad=" + std::to_string(ad) +
                          " fd=" + std::to_string(fd));
        }
    }
    return r;
}

// ---------------------------------------------------------------- check 2
Outcome fourth_order_ad_is_exactly_rational() {
    Outcome r;
    const auto d14 = WeilAlgebra::disk(1, 4);
    const WeilElement ex = taylor_extend(parse("exp(x)"), {{"x", WeilElement::generator(d14, 0)}});
    r.require(ex.mode() == CoeffMode::Rational, "expected rational coefficients");
    Rational fact = 1;
    for (int k = 0; k <= 4; ++k) {
        if (k > 0) fact *= k;
        if (ex.coeff(Monomial{{k}}).rat_value() != Rational(1) / fact)
            r.require(false, "coefficient of e1^" + std::to_string(k) + " is not 1/k!");
    }
    return r;
}

// ---------------------------------------------------------------- check 3
Outcome bicomplex_identities_on_random_forms() {
    Outcome r;
    const JetContext ctxs[] = {JetContext({"x"}, {"u"}), JetContext({"t", "x"}, {"u"}),
                               JetContext({"x"}, {"u", "v"}), JetContext({"t", "x"}, {"u", "v"})};
    std::mt19937_64 rng(0);
    for (int trial = 0; trial < 50; ++trial) {
        const JetContext& ctx = ctxs[trial % 4];
        const int d = static_cast<int>(ctx.coords().size());
        const int p = static_cast<int>(rng() % (std::min(d, 2) + 1));
        const int q = static_cast<int>(rng() % 3);
        const int order = static_cast<int>(rng() % 4);
        const LocalForm w = random_form(ctx, order, p, q, rng);
        const unsigned long long seed = 1000 + trial;
        if (!is_zero_form(d_H(d_H(w)), seed))
            r.require(false, "d_H^2 != 0 on " + w.str());
        if (!is_zero_form(d_V(d_V(w)), seed))
            r.require(false, "d_V^2 != 0 on " + w.str());
        if (!is_zero_form(d_H(d_V(w)) + d_V(d_H(w)), seed))
            r.require(false, "d_H d_V + d_V d_H != 0 on " + w.str());
    }
    return r;
}

// ---------------------------------------------------------------- check 4
Outcome euler_lagrange_golden_outputs() {
    Outcome r;
    const JetContext wave({"t", "x"}, {"u"});
    const JetContext line({"x"}, {"u"});
    const Expr el_wave =
        euler_lagrange(make_lagrangian(wave, parse("1/2*(u_t^2 - u_x^2)"))).component("u");
    r.require(el_wave == wave.canonicalize(parse("-u_tt + u_xx")), "wave density");
    const Expr el_exp =
        euler_lagrange(make_lagrangian(line, parse("1/2*u_x^2 - exp(u)"))).component("u");
    r.require(el_exp == line.canonicalize(parse("-u_xx - exp(u)")), "gradient + potential density");
    const Expr el_beam = euler_lagrange(make_lagrangian(line, parse("1/2*u_xx^2"))).component("u");
    r.require(el_beam == line.canonicalize(parse("u_xxxx")), "second-order density");
    return r;
}

// ---------------------------------------------------------------- check 5
Outcome first_variation_gap_on_random_instances() {
    Outcome r;
    const JetContext wave({"t", "x"}, {"u"});
    const Grid g = parse_grid(
        "t:0:6.283185307179586:64:periodic,x:0:6.283185307179586:64:periodic");
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> coef(-2, 2);
    const char* atoms[] = {"u", "u_t", "u_x", "u_tt", "u_tx", "u_xx"};
    auto density = [&]() {
        std::vector<Expr> terms;
        const int nterms = 2 + static_cast<int>(rng() % 2);
        for (int t = 0; t < nterms; ++t) {
            int c = coef(rng);
            if (c == 0) c = 1;
            Expr term = Expr(Rational(c, 2));
            const int nfac = 1 + static_cast<int>(rng() % 2);
            for (int f = 0; f < nfac; ++f) {
                Expr atom = Expr::var(atoms[rng() % 6]);
                if (rng() % 5 == 0) atom = sin(atom);
                term = term * atom;
            }
            terms.push_back(term);
        }
        return Expr::sum(std::move(terms));
    };
    auto trig = [&]() {
        std::vector<Expr> terms;
        terms.push_back(Expr(coef(rng)) * sin(parse("x + t")));
        terms.push_back(Expr(coef(rng)) * cos(parse("2*x - t")));
        terms.push_back(Expr(Rational(coef(rng), 2)) * cos(parse("t")));
        return Expr::sum(std::move(terms));
    };
    for (int trial = 0; trial < 20; ++trial) {
        const Lagrangian L = make_lagrangian(wave, density());
        const FirstVariation fv = first_variation(L, {{"u", trig()}}, {{"u", trig()}}, g);
        if (fv.gap > 1e-6)
            r.require(false, "trial " + std::to_string(trial) + ": gap " + std::to_string(fv.gap) +
                                 " for density " + print(L.density));
    }
    return r;
}

// ---------------------------------------------------------------- check 6
Outcome jacobi_operator_matches_linearized_equations() {
    Outcome r;
    const JetContext wave({"t", "x"}, {"u"});
    // nonlinear density so the linearization genuinely depends on the section
    const Lagrangian L = make_lagrangian(wave, parse("1/2*u_t^2 - 1/2*u_x^2 - 1/6*u^3"));
    const JacobiOperator J = jacobi(L);
    const SectionData phi{{"u", parse("sin(x - t) + 1/4*x*t")}};
    const SectionData Z{{"u", parse("cos(x + 2*t)")}};
    const Expr lin = apply_jacobi(J, phi, Z)[0].second;
    const Expr el = euler_lagrange(L).component("u");
    const double step = 1e-4;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> pick(0.2, 2.2);
    for (int i = 0; i < 50; ++i) {
        const Binding b{{"t", pick(rng)}, {"x", pick(rng)}};
        auto el_at = [&](double s) {
            const SectionData bumped{{"u", phi.at("u") + Expr::fnum(s) * Z.at("u")}};
            return eval_numeric(substitute(el, prolongation_map(wave, bumped, 2)), b);
        };
        const double fd = (el_at(step) - el_at(-step)) / (2 * step);
        const double sym = eval_numeric(lin, b);
        r.require(std::fabs(fd - sym) <= 1e-5 * std::max(1.0, std::fabs(sym)),
                  "linearization mismatch " + std::to_string(fd) + " vs " + std::to_string(sym));
    }
    // the travelling wave is a Jacobi field along itself for the wave equation
    const JacobiOperator Jw = jacobi(make_lagrangian(wave, parse("1/2*(u_t^2 - u_x^2)")));
    const Expr res = apply_jacobi(Jw, {{"u", parse("sin(x - t)")}}, {{"u", parse("sin(x - t)")}})[0].second;
    for (int i = 0; i < 50; ++i) {
        const Binding b{{"t", pick(rng)}, {"x", pick(rng)}};
        r.require(std::fabs(eval_numeric(res, b)) <= 1e-10, "wave Jacobi residual above 1e-10");
    }
    return r;
}

// ---------------------------------------------------------------- check 7
Outcome bundle_map_functoriality_and_tangent_module_laws() {
    Outcome r;
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> coef(-2, 2);
    const std::vector<WeilAlgebraPtr> algebras = {WeilAlgebra::disk(1, 1), WeilAlgebra::disk(1, 2),
                                                  WeilAlgebra::disk(2, 1)};
    const std::vector<std::string> xs{"x1", "x2"}, ys{"y1", "y2"}, zs{"z1", "z2"};
    auto random_map = [&](const std::vector<std::string>& in, const std::vector<std::string>& out) {
        SmoothMap f{in, out, {}};
        for (size_t j = 0; j < out.size(); ++j) {
            std::vector<Expr> terms;
            terms.push_back(Expr(coef(rng)));
            for (const auto& v : in) {
                terms.push_back(Expr(coef(rng)) * Expr::var(v));
                terms.push_back(Expr(coef(rng)) * Expr::var(v) * Expr::var(in[rng() % in.size()]));
            }
            f.components.push_back(Expr::sum(std::move(terms)));
        }
        return f;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const auto& alg = algebras[trial % algebras.size()];
        std::map<std::string, WeilElement> images;
        for (const auto& c : xs) {
            std::map<Monomial, Coeff, MonoCmp> raw;
            for (const auto& mono : alg->basis()) raw[mono] = Coeff::rat(Rational(coef(rng), 2));
            images.emplace(c, WeilElement::from_poly(alg, raw));
        }
        const AlgebraMorphism p =
            make_morphism(ThickenedSpec::plain(xs), ThickenedSpec{{}, alg}, std::move(images));
        const SmoothMap f = random_map(xs, ys);
        const SmoothMap g = random_map(ys, zs);
        std::map<std::string, Expr> sub;
        for (size_t j = 0; j < ys.size(); ++j) sub[ys[j]] = f.components[j];
        SmoothMap gf{xs, zs, {}};
        for (const Expr& comp : g.components) gf.components.push_back(substitute(comp, sub));
        if (!(weil_bundle_map(gf, p) == weil_bundle_map(g, weil_bundle_map(f, p))))
            r.require(false, "two-step and one-step pushforwards disagree");
    }
    // module laws for tangent vectors, exhaustively over a small rational range
    const std::vector<std::string> coords{"x", "y"};
    const std::vector<Expr> base{parse("1/2"), parse("-1")};
    auto vec = [&](const Rational& a, const Rational& b) {
        return make_tangent_morphism(coords, base, {Expr(a), Expr(b)});
    };
    auto comps = [](const AlgebraMorphism& m) {
        std::vector<std::string> out;
        for (const Expr& c : tangent_decompose(m).components) out.push_back(print(c));
        return out;
    };
    const Rational samples[] = {Rational(-2), Rational(-1, 2), Rational(0), Rational(1),
                                Rational(3, 2)};
    for (const Rational& a : samples)
        for (const Rational& b : samples)
            for (const Rational& s : samples) {
                const AlgebraMorphism X = vec(a, b);
                const AlgebraMorphism Y = vec(b, s);
                r.require(comps(tangent_add(X, Y)) == comps(tangent_add(Y, X)), "addition commutes");
                r.require(comps(tangent_scale(Expr(s), tangent_add(X, Y))) ==
                              comps(tangent_add(tangent_scale(Expr(s), X), tangent_scale(Expr(s), Y))),
                          "scaling distributes over addition");
                r.require(comps(tangent_scale(Expr(s), tangent_scale(Expr(2), X))) ==
                              comps(tangent_scale(Expr(s * 2), X)),
                          "scaling composes");
                r.require(comps(tangent_scale(Expr(1), X)) == comps(X), "unit scaling");
            }
    return r;
}

// ---------------------------------------------------------------- check 8
Outcome kaehler_and_tangent_slice_dimensions_agree() {
    Outcome r;
    for (int m = 1; m <= 3; ++m)
        for (int l = 1; l <= 3; ++l) {
            const auto disk = WeilAlgebra::disk(m, l);
            const int kf = kaehler_forms(disk).dimension();
            const int ts = tangent_algebra(disk).dimension();
            if (kf != ts)
                r.require(false, "D(" + std::to_string(m) + "," + std::to_string(l) + "): " +
                                     std::to_string(kf) + " vs " + std::to_string(ts));
        }
    return r;
}

// ---------------------------------------------------------------- check 9
Outcome perturbative_expansion_exactness_and_chart_covariance() {
    Outcome r;
    const Perturbation cosx = perturb_expand(parse("cos(x)"), {{"x", parse("0")}}, 4);
    r.require(cosx.str() == "1 - 1/2*h^2 + 1/24*h^4", "expansion of cos at 0: " + cosx.str());
    r.require(cosx.element.mode() == CoeffMode::Rational, "expected rational mode");

    const Expr S = parse("cos(x)");
    const Expr psi = parse("x + x^2");
    const Perturbation direct = perturb_expand(substitute(S, {{"x", psi}}), {{"x", parse("0")}}, 3);
    const Perturbation base = perturb_expand(S, {{"x", parse("0")}}, 3);
    const auto disk = WeilAlgebra::disk(1, 3);
    const WeilElement h = WeilElement::generator(disk, 0);
    const WeilElement lhs = taylor_extend(base.polynomial(), {{"h", h + h * h}});
    const WeilElement rhs = taylor_extend(direct.polynomial(), {{"h", h}});
    r.require(lhs == rhs, "chart covariance failed: " + lhs.str() + " vs " + rhs.str());
    r.require(lhs.mode() == CoeffMode::Rational, "chart covariance left rational mode");
    return r;
}

// ---------------------------------------------------------------- check 10
Outcome total_derivatives_intertwine_with_prolongation() {
    Outcome r;
    const JetContext wave({"t", "x"}, {"u"});
    const char* sections[] = {"sin(x - t) + t*x^2", "x^3 - t*x + 1", "cos(x)*sin(t)",
                              "exp(sin(x + t))"};
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 30; ++trial) {
        const Expr f = random_jet_expr(wave, 2, rng);
        const SectionData phi{{"u", parse(sections[trial % 4])}};
        const int mu = static_cast<int>(rng() % 2);
        try {
            chain_rule_identity(wave, f, phi, mu, 2000 + trial);
        } catch (const JetError& e) {
            r.require(false, std::string(e.what()) + " for f = " + print(f));
        }
    }
    return r;
}

struct Check {
    std::string name;
    std::optional<double> budget_seconds;
    std::function<Outcome()> fn;
};

}  // namespace

int main() {
    const std::vector<Check> checks = {
        {"first-order nilpotent AD matches central finite differences", 1.0,
         first_order_ad_matches_finite_differences},
        {"fourth-order expansion of exp has exact 1/k! coefficients", 1.0,
         fourth_order_ad_is_exactly_rational},
        {"d_H^2 = d_V^2 = d_H d_V + d_V d_H = 0 on 50 random forms", 30.0,
         bicomplex_identities_on_random_forms},
        {"Euler-Lagrange golden outputs", 1.0, euler_lagrange_golden_outputs},
        {"first-variation gap below 1e-6 on 20 random instances", 60.0,
         first_variation_gap_on_random_instances},
        {"Jacobi operator matches finite-difference linearization", std::nullopt,
         jacobi_operator_matches_linearized_equations},
        {"bundle maps compose functorially; tangent module laws hold", std::nullopt,
         bundle_map_functoriality_and_tangent_module_laws},
        {"differential-form and tangent-slice dimensions agree (m,l <= 3)", 5.0,
         kaehler_and_tangent_slice_dimensions_agree},
        {"perturbative expansion is exact and chart covariant", std::nullopt,
         perturbative_expansion_exactness_and_chart_covariance},
        {"total derivatives intertwine with prolongation on 30 triples", std::nullopt,
         total_derivatives_intertwine_with_prolongation},
    };

    bool all_ok = true;
    for (size_t i = 0; i < checks.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = checks[i].fn();
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (checks[i].budget_seconds && secs > *checks[i].budget_seconds) {
            out.ok = false;
            out.detail = "runtime " + std::to_string(secs) + "s exceeds budget " +
                         std::to_string(*checks[i].budget_seconds) + "s";
        }
        std::printf("[%s] %zu. %s (%.2fs)%s%s\n", out.ok ? "PASS" : "FAIL", i + 1,
                    checks[i].name.c_str(), secs, out.detail.empty() ? "" : " — ",
                    out.detail.c_str());
        all_ok = all_ok && out.ok;
    }
    return all_ok ? 0 : 1;
}
