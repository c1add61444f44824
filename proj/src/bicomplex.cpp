#include "cahiers/bicomplex.hpp"

#include <algorithm>

#include "cahiers/parser.hpp"

namespace cahiers {

bool Covector::operator<(const Covector& o) const {
    if (horizontal != o.horizontal) return horizontal;  // dx before theta
    if (index != o.index) return index < o.index;
    return I < o.I;
}

LocalForm::LocalForm(JetContext ctx) : ctx_(std::move(ctx)) {}

LocalForm LocalForm::function(const JetContext& ctx, const Expr& f) {
    LocalForm w(ctx);
    w.add_term(f, {});
    return w;
}

LocalForm LocalForm::dx(const JetContext& ctx, int mu) {
    LocalForm w(ctx);
    w.add_term(Expr(1), {Covector::dx(mu)});
    return w;
}

LocalForm LocalForm::theta(const JetContext& ctx, int field, const MultiIndex& I) {
    LocalForm w(ctx);
    w.add_term(Expr(1), {Covector::theta(field, I)});
    return w;
}

void LocalForm::add_term(const Expr& coeff, CovectorWord word) {
    // sort covectors by bubble passes, tracking permutation parity
    int sign = 1;
    for (size_t i = 1; i < word.size(); ++i)
        for (size_t j = i; j > 0 && word[j] < word[j - 1]; --j) {
            std::swap(word[j], word[j - 1]);
            sign = -sign;
        }
    for (size_t i = 1; i < word.size(); ++i)
        if (word[i] == word[i - 1]) return;  // repeated covector: the term is 0
    const Expr c = ctx_.canonicalize(sign == 1 ? coeff : Expr::product(-1, {coeff}));
    if (c.is_zero_structural()) return;
    auto it = terms_.find(word);
    if (it == terms_.end()) {
        terms_.emplace(std::move(word), c);
    } else {
        it->second = it->second + c;
        if (it->second.is_zero_structural()) terms_.erase(it);
    }
}

std::optional<std::pair<int, int>> LocalForm::bidegree() const {
    std::optional<std::pair<int, int>> bd;
    for (const auto& [word, coeff] : terms_) {
        int p = 0, q = 0;
        for (const Covector& v : word) (v.horizontal ? p : q) += 1;
        if (!bd)
            bd = {p, q};
        else if (*bd != std::make_pair(p, q))
            return std::nullopt;
    }
    return bd;
}

LocalForm LocalForm::operator+(const LocalForm& o) const {
    if (!(ctx_ == o.ctx_)) throw FormError("forms live over different jet contexts");
    LocalForm out = *this;
    for (const auto& [word, coeff] : o.terms_) out.add_term(coeff, word);
    return out;
}

LocalForm LocalForm::operator-(const LocalForm& o) const { return *this + o.scaled(Expr(-1)); }

LocalForm LocalForm::scaled(const Expr& c) const {
    LocalForm out(ctx_);
    for (const auto& [word, coeff] : terms_) out.add_term(coeff * c, word);
    return out;
}

std::string covector_str(const JetContext& ctx, const Covector& v) {
    if (v.horizontal) return "d" + ctx.coords()[v.index];
    std::string s = "th(" + ctx.fields()[v.index];
    for (int idx : v.I.indices) s += "," + ctx.coords()[idx];
    return s + ")";
}

namespace {

bool display_negative(const Expr& e) {
    if (e.kind() == Kind::Constant) return e.rat_value() < 0;
    if (e.kind() == Kind::FloatConst) return e.float_value() < 0;
    if (e.kind() == Kind::Product) return e.rat_value() < 0;
    return false;
}

}  // namespace

std::string LocalForm::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [word, coeff] : terms_) {
        Expr c = coeff;
        const bool neg = display_negative(c);
        if (neg) c = Expr::product(-1, {c});
        if (s.empty())
            s += neg ? "-" : "";
        else
            s += neg ? " - " : " + ";
        std::string body;
        if (!c.is_one() || word.empty()) body = print_factor(c);
        for (const Covector& v : word) {
            if (!body.empty()) body += "*";
            body += covector_str(ctx_, v);
        }
        s += body;
    }
    return s;
}

LocalForm wedge(const LocalForm& a, const LocalForm& b) {
    if (!(a.ctx() == b.ctx())) throw FormError("forms live over different jet contexts");
    LocalForm out(a.ctx());
    for (const auto& [wa, ca] : a.terms())
        for (const auto& [wb, cb] : b.terms()) {
            CovectorWord word = wa;
            word.insert(word.end(), wb.begin(), wb.end());
            out.add_term(ca * cb, std::move(word));
        }
    return out;
}

LocalForm d_V(const LocalForm& w) {
    const JetContext& ctx = w.ctx();
    LocalForm out(ctx);
    for (const auto& [word, coeff] : w.terms())
        for (const std::string& v : free_vars(coeff))
            if (auto jv = ctx.parse_jet_var(v)) {
                CovectorWord nw;
                nw.push_back(Covector::theta(jv->first, jv->second));
                nw.insert(nw.end(), word.begin(), word.end());
                out.add_term(differentiate(coeff, v), std::move(nw));
            }
    return out;
}

LocalForm d_H(const LocalForm& w) {
    const JetContext& ctx = w.ctx();
    const int d = static_cast<int>(ctx.coords().size());
    LocalForm out(ctx);
    for (const auto& [word, coeff] : w.terms()) {
        for (int mu = 0; mu < d; ++mu) {
            CovectorWord nw;
            nw.push_back(Covector::dx(mu));
            nw.insert(nw.end(), word.begin(), word.end());
            out.add_term(total_derivative(ctx, coeff, mu), std::move(nw));
        }
        for (size_t j = 0; j < word.size(); ++j) {
            if (word[j].horizontal) continue;  // d_H dx = 0
            for (int mu = 0; mu < d; ++mu) {
                CovectorWord nw(word.begin(), word.begin() + j);
                nw.push_back(Covector::theta(word[j].index, word[j].I.plus(mu)));
                nw.push_back(Covector::dx(mu));
                nw.insert(nw.end(), word.begin() + j + 1, word.end());
                // graded Leibniz prefix sign (-1)^j times the rule's own minus
                const int sign = (j % 2 == 0) ? -1 : 1;
                out.add_term(Expr::product(sign, {coeff}), std::move(nw));
            }
        }
    }
    return out;
}

LocalForm contract(const JetVectorField& X, const LocalForm& w) {
    const JetContext& ctx = w.ctx();
    LocalForm out(ctx);
    for (const auto& [word, coeff] : w.terms())
        for (size_t j = 0; j < word.size(); ++j) {
            Expr s;
            if (word[j].horizontal) {
                s = X.x_component(ctx.coords()[word[j].index]);
            } else {
                s = X.y_component(ctx.jet_var_name(word[j].index, word[j].I));
                for (size_t mu = 0; mu < ctx.coords().size(); ++mu) {
                    const Expr xc = X.x_component(ctx.coords()[mu]);
                    if (xc.is_zero_structural()) continue;
                    s = s - Expr::var(ctx.jet_var_name(word[j].index, word[j].I.plus(static_cast<int>(mu)))) * xc;
                }
            }
            if (s.is_zero_structural()) continue;
            CovectorWord nw(word.begin(), word.begin() + j);
            nw.insert(nw.end(), word.begin() + j + 1, word.end());
            const int sign = (j % 2 == 0) ? 1 : -1;
            out.add_term(Expr::product(sign, {coeff * s}), std::move(nw));
        }
    return out;
}

LocalForm lie_derivative(const JetVectorField& X, const LocalForm& w) {
    const LocalForm dw = d_H(w) + d_V(w);
    const LocalForm iw = contract(X, w);
    return contract(X, dw) + d_H(iw) + d_V(iw);
}

LocalForm pullback_along(const LocalForm& w, const SectionData& phi) {
    const JetContext& ctx = w.ctx();
    int order = 0;
    for (const auto& [word, coeff] : w.terms()) {
        order = std::max(order, ctx.jet_order(coeff));
        for (const Covector& v : word)
            if (!v.horizontal) order = std::max(order, v.I.order() + 1);
    }
    const std::map<std::string, Expr> jets = prolongation_map(ctx, phi, order);

    LocalForm out(ctx);
    for (const auto& [word, coeff] : w.terms()) {
        // expand each theta into its pulled-back horizontal remainder
        std::vector<std::pair<Expr, CovectorWord>> partial{{substitute(coeff, jets), {}}};
        for (const Covector& v : word) {
            std::vector<std::pair<Expr, CovectorWord>> next;
            for (const auto& [c, nw] : partial) {
                if (v.horizontal) {
                    CovectorWord ext = nw;
                    ext.push_back(v);
                    next.emplace_back(c, std::move(ext));
                    continue;
                }
                const Expr base = jets.at(ctx.jet_var_name(v.index, v.I));
                for (size_t mu = 0; mu < ctx.coords().size(); ++mu) {
                    // d(d_I phi) minus the prolonged u_{I+mu}: zero for honest jets
                    const Expr comp = differentiate(base, ctx.coords()[mu]) -
                                      jets.at(ctx.jet_var_name(v.index, v.I.plus(static_cast<int>(mu))));
                    if (comp.is_zero_structural()) continue;
                    CovectorWord ext = nw;
                    ext.push_back(Covector::dx(static_cast<int>(mu)));
                    next.emplace_back(c * comp, std::move(ext));
                }
            }
            partial = std::move(next);
        }
        for (auto& [c, nw] : partial) out.add_term(c, std::move(nw));
    }
    return out;
}

bool is_zero_form(const LocalForm& w, unsigned long long seed) {
    for (const auto& [word, coeff] : w.terms())
        if (is_zero(coeff, seed) != ZeroVerdict::Zero) return false;
    return true;
}

namespace {

// covector atom or scalar factor of the form DSL
struct FormFactor {
    bool is_scalar;
    Expr scalar;
    LocalForm form;
};

Covector parse_covector_args(Parser& p, const JetContext& ctx) {
    p.expect(TokKind::LParen, "'('");
    const Token field_tok = p.expect(TokKind::Ident, "field name");
    int field = -1;
    for (size_t i = 0; i < ctx.fields().size(); ++i)
        if (ctx.fields()[i] == field_tok.text) field = static_cast<int>(i);
    if (field < 0)
        throw ParseError(field_tok.offset, {"field name"}, "unknown field '" + field_tok.text + "'");
    MultiIndex I;
    while (p.accept(TokKind::Comma)) {
        const Token letters = p.expect(TokKind::Ident, "coordinate letters");
        for (char c : letters.text) {
            const int idx = ctx.coord_index(std::string(1, c));
            if (idx < 0)
                throw ParseError(letters.offset, {"coordinate letter"}, "unknown coordinate '" +
                                                                            std::string(1, c) + "'");
            I.indices.push_back(idx);
        }
    }
    std::sort(I.indices.begin(), I.indices.end());
    p.expect(TokKind::RParen, "')'");
    return Covector::theta(field, I);
}

// du^a_I = th^a_I + u^a_{I+mu} dx^mu
LocalForm du_expansion(const JetContext& ctx, int field, const MultiIndex& I) {
    LocalForm w(ctx);
    w.add_term(Expr(1), {Covector::theta(field, I)});
    for (size_t mu = 0; mu < ctx.coords().size(); ++mu)
        w.add_term(Expr::var(ctx.jet_var_name(field, I.plus(static_cast<int>(mu)))),
                   {Covector::dx(static_cast<int>(mu))});
    return w;
}

std::optional<FormFactor> try_parse_covector(Parser& p, const JetContext& ctx) {
    if (p.peek().kind != TokKind::Ident) return std::nullopt;
    const std::string& name = p.peek().text;
    if ((name == "th" || name == "du") && p.peek_ahead(1).kind == TokKind::LParen) {
        const bool is_du = name == "du";
        p.advance();
        const Covector v = parse_covector_args(p, ctx);
        LocalForm w(ctx);
        if (is_du)
            w = du_expansion(ctx, v.index, v.I);
        else
            w.add_term(Expr(1), {v});
        return FormFactor{false, Expr(), std::move(w)};
    }
    if (name.size() == 2 && name[0] == 'd') {
        const int mu = ctx.coord_index(name.substr(1));
        if (mu >= 0) {
            p.advance();
            return FormFactor{false, Expr(), LocalForm::dx(ctx, mu)};
        }
    }
    return std::nullopt;
}

LocalForm parse_form_term(Parser& p, const JetContext& ctx) {
    LocalForm acc = LocalForm::function(ctx, Expr(1));
    bool first = true;
    while (true) {
        bool divide = false;
        if (!first) {
            if (p.accept(TokKind::Star)) {
            } else if (p.accept(TokKind::Slash)) {
                divide = true;
            } else {
                break;
            }
        }
        first = false;
        if (auto cov = try_parse_covector(p, ctx)) {
            if (divide) p.fail({"scalar factor after '/'"});
            acc = wedge(acc, cov->form);
        } else {
            const Expr s = p.parse_factor();
            acc = acc.scaled(divide ? Expr(1) / s : s);
        }
    }
    return acc;
}

}  // namespace

LocalForm parse_form(const JetContext& ctx, const std::string& text) {
    Parser p(text);
    LocalForm acc(ctx);
    bool negative = p.accept(TokKind::Minus);
    while (true) {
        LocalForm term = parse_form_term(p, ctx);
        acc = acc + (negative ? term.scaled(Expr(-1)) : term);
        if (p.accept(TokKind::Plus))
            negative = false;
        else if (p.accept(TokKind::Minus))
            negative = true;
        else
            break;
    }
    p.expect_end();
    return acc;
}

Expr random_jet_expr(const JetContext& ctx, int max_order, std::mt19937_64& rng) {
    std::vector<Expr> atoms;
    for (const std::string& c : ctx.coords()) atoms.push_back(Expr::var(c));
    const std::vector<MultiIndex> idxs = ctx.multi_indices(max_order);
    for (size_t a = 0; a < ctx.fields().size(); ++a)
        for (const MultiIndex& I : idxs) atoms.push_back(Expr::var(ctx.jet_var_name(static_cast<int>(a), I)));

    std::uniform_int_distribution<int> term_count(1, 3), factor_count(1, 2), atom_pick(0, (int)atoms.size() - 1),
        coeff_pick(-3, 3), shape_pick(0, 9);
    std::vector<Expr> terms;
    const int nt = term_count(rng);
    for (int t = 0; t < nt; ++t) {
        int c = coeff_pick(rng);
        if (c == 0) c = 1;
        std::vector<Expr> factors;
        const int nf = factor_count(rng);
        for (int f = 0; f < nf; ++f) {
            Expr atom = atoms[atom_pick(rng)];
            switch (shape_pick(rng)) {
                case 0: atom = sin(atom); break;
                case 1: atom = cos(atom); break;
                case 2: atom = Expr::power(atom, 2); break;
                default: break;
            }
            factors.push_back(atom);
        }
        terms.push_back(Expr::product(c, std::move(factors)));
    }
    return Expr::sum(std::move(terms));
}

LocalForm random_form(const JetContext& ctx, int max_order, int p, int q, std::mt19937_64& rng) {
    const int d = static_cast<int>(ctx.coords().size());
    if (p > d) throw FormError("horizontal degree exceeds the base dimension");
    LocalForm out(ctx);
    const std::vector<MultiIndex> idxs = ctx.multi_indices(max_order);
    std::uniform_int_distribution<int> term_count(1, 2), field_pick(0, (int)ctx.fields().size() - 1),
        idx_pick(0, (int)idxs.size() - 1);
    const int nt = term_count(rng);
    for (int t = 0; t < nt; ++t) {
        CovectorWord word;
        // distinct horizontal covectors
        std::vector<int> mus(d);
        for (int i = 0; i < d; ++i) mus[i] = i;
        std::shuffle(mus.begin(), mus.end(), rng);
        for (int i = 0; i < p; ++i) word.push_back(Covector::dx(mus[i]));
        int guard = 0;
        while (static_cast<int>(word.size()) < p + q && guard < 100) {
            const Covector v = Covector::theta(field_pick(rng), idxs[idx_pick(rng)]);
            if (std::find(word.begin(), word.end(), v) == word.end()) word.push_back(v);
            ++guard;
        }
        out.add_term(random_jet_expr(ctx, max_order, rng), std::move(word));
    }
    return out;
}

}  // namespace cahiers
