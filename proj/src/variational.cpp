#include "cahiers/variational.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace cahiers {

Lagrangian make_lagrangian(const JetContext& ctx, const Expr& density) {
    const Expr canon = ctx.canonicalize(density);
    ctx.validate_strict(canon);
    return Lagrangian{ctx, canon};
}

const Expr& ELResult::component(const std::string& field) const {
    for (const auto& [name, e] : components)
        if (name == field) return e;
    throw VariationalError("unknown field '" + field + "'");
}

namespace {

// sorted multi-indices I such that u^field_I appears in e
std::vector<MultiIndex> present_indices(const JetContext& ctx, const Expr& e, int field) {
    std::vector<MultiIndex> out;
    for (const std::string& v : free_vars(e))
        if (auto jv = ctx.parse_jet_var(v))
            if (jv->first == field) out.push_back(jv->second);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

ELResult euler_lagrange(const Lagrangian& L) {
    ELResult out;
    for (std::size_t a = 0; a < L.ctx.fields().size(); ++a) {
        std::vector<Expr> terms;
        for (const MultiIndex& I : present_indices(L.ctx, L.density, static_cast<int>(a))) {
            const Expr partial = differentiate(L.density, L.ctx.jet_var_name(static_cast<int>(a), I));
            const Expr term = total_derivative(L.ctx, partial, I);
            terms.push_back(I.order() % 2 == 0 ? term : Expr::product(-1, {term}));
        }
        out.components.emplace_back(L.ctx.fields()[a], Expr::sum(std::move(terms)));
    }
    return out;
}

JacobiOperator jacobi(const Lagrangian& L) {
    const ELResult el = euler_lagrange(L);
    JacobiOperator J{L.ctx, {}};
    for (const auto& [row, ela] : el.components)
        for (std::size_t b = 0; b < L.ctx.fields().size(); ++b)
            for (const MultiIndex& I : present_indices(L.ctx, ela, static_cast<int>(b))) {
                Expr c = differentiate(ela, L.ctx.jet_var_name(static_cast<int>(b), I));
                if (!c.is_zero_structural())
                    J.coefficients.push_back({row, L.ctx.fields()[b], I, std::move(c)});
            }
    return J;
}

std::vector<std::pair<std::string, Expr>> apply_jacobi(const JacobiOperator& J, const SectionData& phi,
                                                       const SectionData& Z) {
    int order = 0;
    for (const JacobiCoefficient& c : J.coefficients) order = std::max(order, J.ctx.jet_order(c.coefficient));
    const std::map<std::string, Expr> jets = prolongation_map(J.ctx, phi, order);

    std::map<std::string, std::vector<Expr>> rows;
    for (const JacobiCoefficient& c : J.coefficients) {
        const auto it = Z.find(c.col_field);
        if (it == Z.end()) continue;
        Expr dz = it->second;
        for (int mu : c.I.indices) dz = differentiate(dz, J.ctx.coords()[mu]);
        rows[c.row_field].push_back(substitute(c.coefficient, jets) * dz);
    }
    std::vector<std::pair<std::string, Expr>> out;
    for (const std::string& f : J.ctx.fields()) {
        const auto it = rows.find(f);
        out.emplace_back(f, it == rows.end() ? Expr() : Expr::sum(std::move(it->second)));
    }
    return out;
}

bool Grid::all_periodic() const {
    return std::all_of(axes.begin(), axes.end(), [](const GridAxis& a) { return a.periodic; });
}

std::size_t Grid::total_points() const {
    std::size_t n = 1;
    for (const GridAxis& a : axes) n *= static_cast<std::size_t>(a.count);
    return n;
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) return out;
        start = pos + 1;
    }
}

}  // namespace

Grid parse_grid(const std::string& spec) {
    Grid g;
    for (const std::string& chunk : split_on(spec, ',')) {
        const std::vector<std::string> parts = split_on(chunk, ':');
        if (parts.size() < 4 || parts.size() > 5)
            throw VariationalError("bad grid axis '" + chunk + "': expected name:lo:hi:count[:periodic]");
        GridAxis a;
        a.name = parts[0];
        if (a.name.empty()) throw VariationalError("bad grid axis '" + chunk + "': empty coordinate name");
        try {
            std::size_t used = 0;
            a.lo = std::stod(parts[1], &used);
            if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
            a.hi = std::stod(parts[2], &used);
            if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
            a.count = std::stoi(parts[3], &used);
            if (used != parts[3].size()) throw std::invalid_argument(parts[3]);
        } catch (const std::exception&) {
            throw VariationalError("bad grid axis '" + chunk + "': malformed number");
        }
        if (parts.size() == 5 && parts[4] != "periodic")
            throw VariationalError("bad grid axis '" + chunk + "': trailing token must be 'periodic'");
        a.periodic = parts.size() == 5;
        if (a.count < 2) throw VariationalError("bad grid axis '" + chunk + "': need at least 2 points");
        if (!(a.hi > a.lo)) throw VariationalError("bad grid axis '" + chunk + "': upper bound must exceed lower");
        for (const GridAxis& prev : g.axes)
            if (prev.name == a.name) throw VariationalError("duplicate grid axis '" + a.name + "'");
        g.axes.push_back(std::move(a));
    }
    return g;
}

namespace {

void validate_grid(const JetContext& ctx, const Grid& g) {
    if (g.axes.size() != ctx.coords().size())
        throw VariationalError("grid must have one axis per base coordinate");
    for (std::size_t i = 0; i < g.axes.size(); ++i)
        if (g.axes[i].name != ctx.coords()[i])
            throw VariationalError("grid axes must match the base coordinates in declaration order (got '" +
                                   g.axes[i].name + "', expected '" + ctx.coords()[i] + "')");
}

struct Axis1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// rectangle rule on periodic axes (endpoint excluded), composite trapezoid otherwise
Axis1D axis_rule(const GridAxis& a) {
    Axis1D r;
    if (a.periodic) {
        const double h = (a.hi - a.lo) / a.count;
        for (int i = 0; i < a.count; ++i) {
            r.nodes.push_back(a.lo + i * h);
            r.weights.push_back(h);
        }
    } else {
        const double h = (a.hi - a.lo) / (a.count - 1);
        for (int i = 0; i < a.count; ++i) {
            r.nodes.push_back(a.lo + i * h);
            r.weights.push_back(i == 0 || i == a.count - 1 ? h / 2 : h);
        }
    }
    return r;
}

// deterministic row-major sweep (last axis fastest); weight is the product of
// the per-axis quadrature weights
void for_each_point(const Grid& g, const std::function<void(const Binding&, double)>& fn) {
    std::vector<Axis1D> rules;
    for (const GridAxis& a : g.axes) rules.push_back(axis_rule(a));
    std::vector<std::size_t> idx(rules.size(), 0);
    Binding b;
    while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            b[g.axes[i].name] = rules[i].nodes[idx[i]];
            w *= rules[i].weights[idx[i]];
        }
        fn(b, w);
        std::size_t k = rules.size();
        while (k > 0) {
            if (++idx[k - 1] < rules[k - 1].nodes.size()) break;
            idx[k - 1] = 0;
            --k;
        }
        if (k == 0) break;
    }
}

int max_jet_order(const JetContext& ctx, const std::vector<std::pair<std::string, Expr>>& comps) {
    int order = 0;
    for (const auto& [name, e] : comps) order = std::max(order, ctx.jet_order(e));
    return order;
}

}  // namespace

ResidualReport residual(const Lagrangian& L, const SectionData& phi, const Grid& g) {
    validate_grid(L.ctx, g);
    const ELResult el = euler_lagrange(L);
    const std::map<std::string, Expr> jets = prolongation_map(L.ctx, phi, max_jet_order(L.ctx, el.components));
    std::vector<Expr> bars;
    for (const auto& [name, e] : el.components) bars.push_back(substitute(e, jets));

    ResidualReport r;
    r.per_point.reserve(g.total_points());
    for_each_point(g, [&](const Binding& b, double) {
        double v = 0.0;
        for (const Expr& bar : bars) v = std::max(v, std::fabs(eval_numeric(bar, b)));
        r.per_point.push_back(v);
        r.max_abs = std::max(r.max_abs, v);
    });
    return r;
}

double action(const Lagrangian& L, const SectionData& phi, const Grid& g) {
    validate_grid(L.ctx, g);
    const std::map<std::string, Expr> jets = prolongation_map(L.ctx, phi, L.ctx.jet_order(L.density));
    const Expr integrand = substitute(L.density, jets);
    double acc = 0.0;
    for_each_point(g, [&](const Binding& b, double w) { acc += w * eval_numeric(integrand, b); });
    return acc;
}

WeilElement action_weil(const Lagrangian& L, const SectionData& phi, const Grid& g,
                        const WeilAlgebraPtr& alg, const std::vector<std::string>& params) {
    validate_grid(L.ctx, g);
    if (static_cast<int>(params.size()) != alg->m())
        throw VariationalError("need exactly one parameter name per algebra generator");
    const std::map<std::string, Expr> jets = prolongation_map(L.ctx, phi, L.ctx.jet_order(L.density));
    const Expr integrand = substitute(L.density, jets);

    WeilElement acc(alg, CoeffMode::Float);
    for_each_point(g, [&](const Binding& b, double w) {
        std::vector<std::pair<std::string, WeilElement>> args;
        for (const auto& [name, value] : b) args.emplace_back(name, WeilElement::scalar(alg, Coeff::flt(value)));
        for (std::size_t j = 0; j < params.size(); ++j)
            args.emplace_back(params[j], WeilElement::generator(alg, static_cast<int>(j)));
        acc = acc + taylor_extend(integrand, args).scaled(Coeff::flt(w));
    });
    return acc;
}

FirstVariation first_variation(const Lagrangian& L, const SectionData& phi, const SectionData& Z,
                               const Grid& g) {
    validate_grid(L.ctx, g);
    const double h = kFirstVariationStep;
    SectionData plus, minus;
    for (const auto& [f, e] : phi) {
        const auto it = Z.find(f);
        const Expr z = it == Z.end() ? Expr() : it->second;
        plus[f] = e + Expr::fnum(h) * z;
        minus[f] = e - Expr::fnum(h) * z;
    }
    const double lhs = (action(L, plus, g) - action(L, minus, g)) / (2 * h);

    const ELResult el = euler_lagrange(L);
    const std::map<std::string, Expr> jets = prolongation_map(L.ctx, phi, max_jet_order(L.ctx, el.components));
    std::vector<Expr> terms;
    for (const auto& [name, e] : el.components) {
        const auto it = Z.find(name);
        if (it == Z.end()) continue;
        terms.push_back(substitute(e, jets) * it->second);
    }
    const Expr integrand = Expr::sum(std::move(terms));
    double rhs = 0.0;
    for_each_point(g, [&](const Binding& b, double w) { rhs += w * eval_numeric(integrand, b); });

    return FirstVariation{lhs, rhs, std::fabs(lhs - rhs), !g.all_periodic()};
}

Perturbation perturb_expand(const Expr& S, const std::vector<std::pair<std::string, Expr>>& point, int k) {
    if (point.empty()) throw VariationalError("expansion point must bind at least one variable");
    if (k < 0) throw VariationalError("expansion order must be nonnegative");
    const int n = static_cast<int>(point.size());
    const WeilAlgebraPtr alg = WeilAlgebra::disk(n, k);

    std::vector<std::pair<std::string, WeilElement>> args;
    for (int i = 0; i < n; ++i) {
        const std::string& name = point[i].first;
        const Expr& value = point[i].second;
        Coeff c;
        try {
            if (auto r = eval_rational(value, {}))
                c = Coeff::rat(*r);
            else
                c = Coeff::flt(eval_numeric(value, {}));
        } catch (const EvalError&) {
            throw VariationalError("point value for '" + name + "' is not a closed numeric expression");
        }
        args.emplace_back(name, WeilElement::scalar(alg, c) + WeilElement::generator(alg, i));
    }

    std::vector<std::string> names;
    if (n == 1) {
        names.push_back("h");
    } else {
        for (int i = 1; i <= n; ++i) names.push_back("h" + std::to_string(i));
    }
    return Perturbation{taylor_extend(S, args), std::move(names)};
}

Expr Perturbation::polynomial() const {
    std::vector<Expr> terms;
    for (const auto& [mono, c] : element.coeffs()) {
        std::vector<Expr> factors{c.as_expr()};
        for (std::size_t i = 0; i < mono.exps.size(); ++i)
            if (mono.exps[i] > 0) factors.push_back(Expr::power(Expr::var(names[i]), mono.exps[i]));
        terms.push_back(Expr::product(1, std::move(factors)));
    }
    return Expr::sum(std::move(terms));
}

std::string Perturbation::str() const { return print(polynomial()); }

}  // namespace cahiers
