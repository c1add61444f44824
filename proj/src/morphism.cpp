#include "cahiers/morphism.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace cahiers {

namespace {

// generator-shaped for this spec's own Weil part, without throwing
bool is_own_generator_name(const std::string& name, int m) {
    try {
        return generator_index(name, m) >= 0;
    } catch (const AlgebraError&) {
        return true;  // e<k> with k > m is still generator shaped
    }
}

void validate_spec(const ThickenedSpec& spec) {
    if (!spec.weil) throw MorphismError("spec needs a Weil algebra (use the trivial one for R^k)");
    std::set<std::string> seen;
    for (const std::string& c : spec.coords) {
        if (!seen.insert(c).second) throw MorphismError("duplicate coordinate name '" + c + "'");
        if (is_own_generator_name(c, spec.weil->m()))
            throw MorphismError("coordinate name '" + c + "' collides with a nilpotent generator");
    }
}

Coeff coeff_from_expr(const Expr& e) {
    if (e.kind() == Kind::Constant) return Coeff::rat(e.rat_value());
    if (e.is_zero_structural()) return Coeff::rat(0);
    if (e.kind() == Kind::FloatConst) return Coeff::flt(e.float_value());
    return Coeff::sym(e);
}

// evaluate a relation polynomial on the nilpotent generator images
WeilElement evaluate_poly_on(const Poly& p, const std::vector<WeilElement>& gen_images,
                             const WeilAlgebraPtr& target) {
    WeilElement acc(target);
    for (const auto& [mono, q] : p) {
        WeilElement term = WeilElement::scalar(target, Coeff::rat(q));
        for (size_t i = 0; i < gen_images.size(); ++i)
            if (mono.exps[i] > 0) term = term * gen_images[i].pow_int(mono.exps[i]);
        acc = acc + term;
    }
    return acc;
}

}  // namespace

ThickenedSpec ThickenedSpec::plain(std::vector<std::string> coords) {
    return ThickenedSpec{std::move(coords), WeilAlgebra::scalar()};
}

bool ThickenedSpec::same_as(const ThickenedSpec& o) const {
    return coords == o.coords && weil && o.weil && weil->same_as(*o.weil);
}

std::string ThickenedSpec::str() const {
    std::string s = "(";
    for (size_t i = 0; i < coords.size(); ++i) s += (i ? "," : "") + coords[i];
    s += ")";
    if (!weil->is_trivial()) s += "x" + weil->spec_string();
    return s;
}

const WeilElement& AlgebraMorphism::image(const std::string& gen) const {
    auto it = images_.find(gen);
    if (it == images_.end()) throw MorphismError("no image for generator '" + gen + "'");
    return it->second;
}

bool AlgebraMorphism::operator==(const AlgebraMorphism& o) const {
    return source_.same_as(o.source_) && target_.same_as(o.target_) && images_ == o.images_;
}

AlgebraMorphism make_morphism(ThickenedSpec source, ThickenedSpec target,
                              std::map<std::string, WeilElement> images) {
    validate_spec(source);
    validate_spec(target);

    std::vector<std::string> gens = source.coords;
    for (int i = 0; i < source.weil->m(); ++i) gens.push_back("e" + std::to_string(i + 1));
    for (const std::string& g : gens)
        if (!images.count(g)) throw MorphismError("missing image for generator '" + g + "'");
    if (images.size() != gens.size()) throw MorphismError("image given for a name that is not a source generator");

    for (const auto& [gen, img] : images) {
        if (!img.algebra()->same_as(*target.weil))
            throw MorphismError("image of '" + gen + "' lives in the wrong target algebra");
        for (const auto& [mono, c] : img.coeffs())
            if (c.mode() == CoeffMode::Symbolic)
                for (const std::string& v : free_vars(c.expr_value()))
                    if (std::find(target.coords.begin(), target.coords.end(), v) == target.coords.end())
                        throw MorphismError("image of '" + gen + "' uses '" + v +
                                            "', which is not a target coordinate");
    }

    std::vector<WeilElement> nil_images;
    for (int i = 0; i < source.weil->m(); ++i) {
        const WeilElement& img = images.at("e" + std::to_string(i + 1));
        if (!img.scalar_part().is_zero())
            throw MorphismError("nilpotent generator e" + std::to_string(i + 1) +
                                " maps to an element with nonzero scalar part");
        nil_images.push_back(img);
    }

    // all source relations must vanish on the images: the truncation monomials
    // of degree l+1 and any extra relations of a quotient presentation
    if (source.weil->m() > 0) {
        std::vector<Poly> rels;
        std::function<void(Monomial&, int, int)> gen_trunc = [&](Monomial& cur, int pos, int remaining) {
            if (pos == source.weil->m()) {
                if (remaining == 0) {
                    Poly p;
                    p.emplace(cur, Rational(1));
                    rels.push_back(p);
                }
                return;
            }
            for (int k = remaining; k >= 0; --k) {
                cur.exps[pos] = k;
                gen_trunc(cur, pos + 1, remaining - k);
                cur.exps[pos] = 0;
            }
        };
        Monomial cur = Monomial::unit(source.weil->m());
        gen_trunc(cur, 0, source.weil->l() + 1);
        for (const Poly& r : source.weil->extra_relations()) rels.push_back(r);
        for (const Poly& r : rels) {
            const WeilElement value = evaluate_poly_on(r, nil_images, target.weil);
            if (!value.is_zero())
                throw MorphismError("images violate the source relation " + poly_str(r) + " (maps to " +
                                    value.str() + ")");
        }
    }

    AlgebraMorphism phi;
    phi.source_ = std::move(source);
    phi.target_ = std::move(target);
    phi.images_ = std::move(images);
    return phi;
}

AlgebraMorphism identity_morphism(const ThickenedSpec& spec) {
    std::map<std::string, WeilElement> images;
    for (const std::string& c : spec.coords)
        images.emplace(c, WeilElement::scalar(spec.weil, Coeff::sym(Expr::var(c))));
    for (int i = 0; i < spec.weil->m(); ++i)
        images.emplace("e" + std::to_string(i + 1), WeilElement::generator(spec.weil, i));
    return make_morphism(spec, spec, std::move(images));
}

WeilElement apply(const AlgebraMorphism& phi, const Expr& f) {
    std::vector<std::pair<std::string, WeilElement>> args;
    for (const std::string& v : free_vars(f)) {
        auto it = phi.images().find(v);
        if (it == phi.images().end())
            throw MorphismError("expression uses '" + v + "', which is not a source generator");
        args.emplace_back(v, it->second);
    }
    if (args.empty()) {
        if (std::optional<Rational> v = eval_rational(f, {}))
            return WeilElement::scalar(phi.target().weil, Coeff::rat(*v));
        return WeilElement::scalar(phi.target().weil, Coeff::flt(eval_numeric(f, {})));
    }
    return taylor_extend(f, args);
}

WeilElement apply_element(const AlgebraMorphism& phi, const WeilElement& elem) {
    if (!elem.algebra()->same_as(*phi.source().weil))
        throw MorphismError("element does not live over the morphism source");
    WeilElement acc(phi.target().weil);
    for (const auto& [mono, c] : elem.coeffs()) {
        WeilElement term = apply(phi, c.as_expr());
        for (int i = 0; i < phi.source().weil->m(); ++i)
            if (mono.exps[i] > 0)
                term = term * phi.image("e" + std::to_string(i + 1)).pow_int(mono.exps[i]);
        acc = acc + term;
    }
    return acc;
}

AlgebraMorphism compose(const AlgebraMorphism& after, const AlgebraMorphism& before) {
    if (!before.target().same_as(after.source()))
        throw MorphismError("morphisms are not composable: inner target differs from outer source");
    std::map<std::string, WeilElement> images;
    for (const auto& [gen, img] : before.images()) images.emplace(gen, apply_element(after, img));
    return make_morphism(before.source(), after.target(), std::move(images));
}

std::vector<double> milnor_point(const AlgebraMorphism& phi) {
    if (!phi.target().coords.empty() || !phi.target().weil->is_trivial())
        throw MorphismError("Milnor point needs target R (no coordinates, no thickening)");
    std::vector<double> point;
    for (const std::string& c : phi.source().coords) {
        const Coeff s = phi.image(c).scalar_part();
        point.push_back(s.mode() == CoeffMode::Symbolic ? eval_numeric(s.expr_value(), {}) : s.as_double());
    }
    return point;
}

AlgebraMorphism make_tangent_morphism(const std::vector<std::string>& coords, const std::vector<Expr>& base,
                                      const std::vector<Expr>& components) {
    if (base.size() != coords.size() || components.size() != coords.size())
        throw MorphismError("tangent data arity mismatch");
    const ThickenedSpec target{{}, WeilAlgebra::disk(1, 1)};
    std::map<std::string, WeilElement> images;
    for (size_t i = 0; i < coords.size(); ++i) {
        std::map<Monomial, Coeff, MonoCmp> raw;
        raw.emplace(Monomial::unit(1), coeff_from_expr(base[i]));
        raw.emplace(Monomial{{1}}, coeff_from_expr(components[i]));
        images.emplace(coords[i], WeilElement::from_poly(target.weil, raw));
    }
    return make_morphism(ThickenedSpec::plain(coords), target, std::move(images));
}

namespace {

bool is_dual_number_target(const ThickenedSpec& t) {
    return t.weil->m() == 1 && t.weil->l() == 1 && t.weil->is_disk();
}

}  // namespace

TangentVector tangent_decompose(const AlgebraMorphism& phi) {
    if (!is_dual_number_target(phi.target()))
        throw MorphismError("tangent decomposition needs a dual-number target D(1,1)");
    TangentVector v;
    v.coords = phi.source().coords;
    for (const std::string& c : v.coords) {
        const WeilElement& img = phi.image(c);
        v.base.push_back(img.scalar_part().as_expr());
        v.components.push_back(img.coeff(Monomial{{1}}).as_expr());
    }
    return v;
}

AlgebraMorphism tangent_scale(const Expr& t, const AlgebraMorphism& phi) {
    if (!is_dual_number_target(phi.target()))
        throw MorphismError("tangent scaling needs a dual-number target D(1,1)");
    const ThickenedSpec& tgt = phi.target();
    std::map<std::string, WeilElement> images;
    for (const std::string& c : tgt.coords)
        images.emplace(c, WeilElement::scalar(tgt.weil, Coeff::sym(Expr::var(c))));
    images.emplace("e1", WeilElement::generator(tgt.weil, 0).scaled(coeff_from_expr(t)));
    return compose(make_morphism(tgt, tgt, std::move(images)), phi);
}

AlgebraMorphism tangent_add(const AlgebraMorphism& phi1, const AlgebraMorphism& phi2) {
    if (!is_dual_number_target(phi1.target()) || !is_dual_number_target(phi2.target()))
        throw MorphismError("tangent addition needs dual-number targets D(1,1)");
    if (!phi1.source().same_as(phi2.source()) || !phi1.target().same_as(phi2.target()))
        throw MorphismError("tangent addition needs identical source and target specs");
    for (const std::string& g : phi1.source().coords)
        if (!(phi1.image(g).scalar_part() == phi2.image(g).scalar_part()))
            throw MorphismError("tangent vectors sit at different base points (generator '" + g + "')");

    const ThickenedSpec pair_spec{phi1.target().coords, WeilAlgebra::disk(2, 1)};
    std::map<std::string, WeilElement> images;
    for (const std::string& g : phi1.source().coords) {
        std::map<Monomial, Coeff, MonoCmp> raw;
        raw.emplace(Monomial::unit(2), phi1.image(g).scalar_part());
        raw.emplace(Monomial{{1, 0}}, phi1.image(g).coeff(Monomial{{1}}));
        raw.emplace(Monomial{{0, 1}}, phi2.image(g).coeff(Monomial{{1}}));
        images.emplace(g, WeilElement::from_poly(pair_spec.weil, raw));
    }
    const AlgebraMorphism combined = make_morphism(phi1.source(), pair_spec, std::move(images));

    // diagonal restriction e1 -> e, e2 -> e; sound because e1*e2 = 0 in D(2,1)
    std::map<std::string, WeilElement> diag_images;
    for (const std::string& c : pair_spec.coords)
        diag_images.emplace(c, WeilElement::scalar(phi1.target().weil, Coeff::sym(Expr::var(c))));
    diag_images.emplace("e1", WeilElement::generator(phi1.target().weil, 0));
    diag_images.emplace("e2", WeilElement::generator(phi1.target().weil, 0));
    const AlgebraMorphism diagonal = make_morphism(pair_spec, phi1.target(), std::move(diag_images));
    return compose(diagonal, combined);
}

AlgebraMorphism weil_bundle_map(const SmoothMap& f, const AlgebraMorphism& phi) {
    if (f.components.size() != f.out_coords.size())
        throw MorphismError("smooth map needs one component per output coordinate");
    if (phi.source().coords != f.in_coords || !phi.source().weil->is_trivial())
        throw MorphismError("morphism source does not match the map's input coordinates");
    std::map<std::string, WeilElement> images;
    for (size_t j = 0; j < f.out_coords.size(); ++j) images.emplace(f.out_coords[j], apply(phi, f.components[j]));
    return make_morphism(ThickenedSpec::plain(f.out_coords), phi.target(), std::move(images));
}

PathTangent path_restrict(const std::vector<Expr>& path, const std::string& t, const Expr& t0) {
    PathTangent out;
    const std::map<std::string, Expr> at0{{t, t0}};
    for (const Expr& comp : path) {
        out.position.push_back(substitute(comp, at0));
        out.velocity.push_back(substitute(differentiate(comp, t), at0));
    }
    return out;
}

}  // namespace cahiers
