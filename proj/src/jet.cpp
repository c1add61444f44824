#include "cahiers/jet.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

namespace cahiers {

MultiIndex MultiIndex::plus(int mu) const {
    MultiIndex out = *this;
    out.indices.insert(std::upper_bound(out.indices.begin(), out.indices.end(), mu), mu);
    return out;
}

bool MultiIndex::operator<(const MultiIndex& o) const {
    if (indices.size() != o.indices.size()) return indices.size() < o.indices.size();
    return indices < o.indices;
}

JetContext::JetContext(std::vector<std::string> coords, std::vector<std::string> fields)
    : coords_(std::move(coords)), fields_(std::move(fields)) {
    std::set<std::string> seen;
    for (const std::string& c : coords_) {
        if (c.size() != 1 || !std::isalpha(static_cast<unsigned char>(c[0])))
            throw JetError("coordinate name '" + c + "' must be a single letter");
        if (!seen.insert(c).second) throw JetError("duplicate name '" + c + "'");
    }
    if (coords_.empty()) throw JetError("a jet context needs at least one coordinate");
    if (fields_.empty()) throw JetError("a jet context needs at least one field");
    for (const std::string& f : fields_) {
        if (f.empty() || f.find('_') != std::string::npos)
            throw JetError("field name '" + f + "' must be nonempty and free of '_'");
        if (!seen.insert(f).second) throw JetError("duplicate name '" + f + "'");
    }
}

int JetContext::coord_index(const std::string& name) const {
    for (size_t i = 0; i < coords_.size(); ++i)
        if (coords_[i] == name) return static_cast<int>(i);
    return -1;
}

std::string JetContext::jet_var_name(int field, const MultiIndex& I) const {
    std::string name = fields_[field];
    if (!I.indices.empty()) {
        name += "_";
        for (int idx : I.indices) name += coords_[idx];
    }
    return name;
}

std::optional<std::pair<int, MultiIndex>> JetContext::parse_jet_var(const std::string& name) const {
    const size_t us = name.find('_');
    const std::string head = us == std::string::npos ? name : name.substr(0, us);
    int field = -1;
    for (size_t i = 0; i < fields_.size(); ++i)
        if (fields_[i] == head) field = static_cast<int>(i);
    if (field < 0) return std::nullopt;
    MultiIndex I;
    if (us != std::string::npos) {
        const std::string letters = name.substr(us + 1);
        if (letters.empty()) return std::nullopt;
        for (char c : letters) {
            const int idx = coord_index(std::string(1, c));
            if (idx < 0) return std::nullopt;
            I.indices.push_back(idx);
        }
        std::sort(I.indices.begin(), I.indices.end());
    }
    return std::make_pair(field, I);
}

Expr JetContext::canonicalize(const Expr& e) const {
    std::map<std::string, Expr> renames;
    for (const std::string& v : free_vars(e))
        if (auto jv = parse_jet_var(v)) {
            const std::string canon = jet_var_name(jv->first, jv->second);
            if (canon != v) renames.emplace(v, Expr::var(canon));
        }
    return renames.empty() ? e : substitute(e, renames);
}

int JetContext::jet_order(const Expr& e) const {
    int order = 0;
    for (const std::string& v : free_vars(e))
        if (auto jv = parse_jet_var(v)) order = std::max(order, jv->second.order());
    return order;
}

std::vector<MultiIndex> JetContext::multi_indices(int n) const {
    std::vector<MultiIndex> out;
    MultiIndex cur;
    std::function<void(int, int)> rec = [&](int from, int remaining) {
        out.push_back(cur);
        if (remaining == 0) return;
        for (int i = from; i < static_cast<int>(coords_.size()); ++i) {
            cur.indices.push_back(i);
            rec(i, remaining - 1);
            cur.indices.pop_back();
        }
    };
    rec(0, n);
    std::sort(out.begin(), out.end());
    return out;
}

void JetContext::validate_strict(const Expr& e) const {
    for (const std::string& v : free_vars(e)) {
        if (coord_index(v) >= 0) continue;
        if (parse_jet_var(v)) continue;
        throw JetError("variable '" + v + "' is neither a coordinate nor a jet variable of the context");
    }
}

std::vector<std::pair<std::string, Expr>> prolong(const JetContext& ctx, const SectionData& phi, int n) {
    if (n < 0) throw JetError("prolongation order must be nonnegative");
    for (const auto& [field, expr] : phi) {
        if (std::find(ctx.fields().begin(), ctx.fields().end(), field) == ctx.fields().end())
            throw JetError("section component '" + field + "' is not a field of the context");
        // a section lives on the base: its jet variables are *produced* here,
        // so any appearing inside would be silently treated as constants
        for (const std::string& v : free_vars(expr))
            if (ctx.parse_jet_var(v))
                throw JetError("section component '" + field + "' mentions jet variable '" + v + "'");
    }
    std::vector<std::pair<std::string, Expr>> table;
    const std::vector<MultiIndex> idxs = ctx.multi_indices(n);
    for (size_t a = 0; a < ctx.fields().size(); ++a) {
        auto it = phi.find(ctx.fields()[a]);
        if (it == phi.end()) throw JetError("section is missing field '" + ctx.fields()[a] + "'");
        // derivatives are built up from the parent index, dropping the largest
        // entry; sortedness makes the choice canonical and Clairaut makes it
        // irrelevant
        std::map<MultiIndex, Expr> derivs;
        for (const MultiIndex& I : idxs) {
            if (I.indices.empty()) {
                derivs.emplace(I, it->second);
                continue;
            }
            MultiIndex parent = I;
            const int last = parent.indices.back();
            parent.indices.pop_back();
            derivs.emplace(I, differentiate(derivs.at(parent), ctx.coords()[last]));
        }
        for (const MultiIndex& I : idxs)
            table.emplace_back(ctx.jet_var_name(static_cast<int>(a), I), derivs.at(I));
    }
    return table;
}

std::map<std::string, Expr> prolongation_map(const JetContext& ctx, const SectionData& phi, int n) {
    std::map<std::string, Expr> out;
    for (auto& [name, expr] : prolong(ctx, phi, n)) out.emplace(name, expr);
    return out;
}

Expr total_derivative(const JetContext& ctx, const Expr& f, int mu) {
    if (mu < 0 || mu >= static_cast<int>(ctx.coords().size())) throw JetError("coordinate index out of range");
    const Expr canon = ctx.canonicalize(f);
    Expr acc = differentiate(canon, ctx.coords()[mu]);
    for (const std::string& v : free_vars(canon))
        if (auto jv = ctx.parse_jet_var(v)) {
            const std::string shifted = ctx.jet_var_name(jv->first, jv->second.plus(mu));
            acc = acc + differentiate(canon, v) * Expr::var(shifted);
        }
    return acc;
}

Expr total_derivative(const JetContext& ctx, const Expr& f, const std::string& coord) {
    const int mu = ctx.coord_index(coord);
    if (mu < 0) throw JetError("unknown coordinate '" + coord + "'");
    return total_derivative(ctx, f, mu);
}

Expr total_derivative(const JetContext& ctx, const Expr& f, const MultiIndex& I) {
    Expr acc = f;
    for (int mu : I.indices) acc = total_derivative(ctx, acc, mu);
    return acc;
}

void chain_rule_identity(const JetContext& ctx, const Expr& f, const SectionData& phi, int mu,
                         unsigned long long seed) {
    const Expr canon = ctx.canonicalize(f);
    const int order = ctx.jet_order(canon) + 1;
    const std::map<std::string, Expr> jets = prolongation_map(ctx, phi, order);
    const Expr lhs = differentiate(substitute(canon, jets), ctx.coords()[mu]);
    const Expr rhs = substitute(total_derivative(ctx, canon, mu), jets);
    const ZeroCheck check = is_zero_check(lhs - rhs, seed);
    if (check.verdict != ZeroVerdict::Zero) {
        std::string binding;
        if (check.witness)
            for (const auto& [name, val] : *check.witness)
                binding += (binding.empty() ? "" : ", ") + name + "=" + std::to_string(val);
        throw JetError("chain rule violated: total derivative does not intertwine with prolongation at {" +
                       binding + "}");
    }
}

Expr JetVectorField::x_component(const std::string& coord) const {
    auto it = X.find(coord);
    return it == X.end() ? Expr() : it->second;
}

Expr JetVectorField::y_component(const std::string& jet_var) const {
    auto it = Y.find(jet_var);
    return it == Y.end() ? Expr() : it->second;
}

std::pair<JetVectorField, JetVectorField> split_vector_field(const JetContext& ctx, const JetVectorField& X,
                                                             int n) {
    JetVectorField norm;
    for (const auto& [coord, expr] : X.X) {
        if (ctx.coord_index(coord) < 0) throw JetError("'" + coord + "' is not a coordinate of the context");
        norm.X.emplace(coord, ctx.canonicalize(expr));
    }
    for (const auto& [name, expr] : X.Y) {
        auto jv = ctx.parse_jet_var(name);
        if (!jv) throw JetError("'" + name + "' is not a jet variable of the context");
        norm.Y.emplace(ctx.jet_var_name(jv->first, jv->second), ctx.canonicalize(expr));
    }

    JetVectorField h, v;
    h.X = norm.X;
    for (size_t a = 0; a < ctx.fields().size(); ++a)
        for (const MultiIndex& I : ctx.multi_indices(n)) {
            const std::string name = ctx.jet_var_name(static_cast<int>(a), I);
            Expr horizontal;
            for (size_t mu = 0; mu < ctx.coords().size(); ++mu) {
                const Expr xc = norm.x_component(ctx.coords()[mu]);
                if (xc.is_zero_structural()) continue;
                horizontal =
                    horizontal + xc * Expr::var(ctx.jet_var_name(static_cast<int>(a), I.plus(static_cast<int>(mu))));
            }
            const Expr vertical = norm.y_component(name) - horizontal;
            if (!horizontal.is_zero_structural()) h.Y.emplace(name, horizontal);
            if (!vertical.is_zero_structural()) v.Y.emplace(name, vertical);
        }
    return {h, v};
}

JetVectorField prolong_evolutionary(const JetContext& ctx, const SectionData& Q, int n) {
    JetVectorField out;
    for (size_t a = 0; a < ctx.fields().size(); ++a) {
        auto it = Q.find(ctx.fields()[a]);
        if (it == Q.end()) throw JetError("characteristic is missing field '" + ctx.fields()[a] + "'");
        std::map<MultiIndex, Expr> derivs;
        for (const MultiIndex& I : ctx.multi_indices(n)) {
            if (I.indices.empty()) {
                derivs.emplace(I, ctx.canonicalize(it->second));
            } else {
                MultiIndex parent = I;
                const int last = parent.indices.back();
                parent.indices.pop_back();
                derivs.emplace(I, total_derivative(ctx, derivs.at(parent), last));
            }
            const Expr val = derivs.at(I);
            if (!val.is_zero_structural()) out.Y.emplace(ctx.jet_var_name(static_cast<int>(a), I), val);
        }
    }
    return out;
}

std::vector<std::pair<std::string, Expr>> ev_pushforward(const JetContext& ctx, const SectionData& phi,
                                                         const SectionData& Z, const TangentVector& X, int n) {
    if (X.coords != ctx.coords()) throw JetError("tangent vector coordinates do not match the context");
    std::map<std::string, Expr> at_p;
    for (size_t mu = 0; mu < ctx.coords().size(); ++mu) at_p.emplace(ctx.coords()[mu], X.base[mu]);

    const std::map<std::string, Expr> phi_jets = prolongation_map(ctx, phi, n + 1);
    const std::map<std::string, Expr> z_jets = prolongation_map(ctx, Z, n);

    std::vector<std::pair<std::string, Expr>> out;
    for (size_t mu = 0; mu < ctx.coords().size(); ++mu)
        out.emplace_back(ctx.coords()[mu], X.components[mu]);
    for (size_t a = 0; a < ctx.fields().size(); ++a)
        for (const MultiIndex& I : ctx.multi_indices(n)) {
            Expr comp;
            for (size_t mu = 0; mu < ctx.coords().size(); ++mu) {
                const Expr& deriv = phi_jets.at(ctx.jet_var_name(static_cast<int>(a), I.plus(static_cast<int>(mu))));
                comp = comp + X.components[mu] * substitute(deriv, at_p);
            }
            comp = comp + substitute(z_jets.at(ctx.jet_var_name(static_cast<int>(a), I)), at_p);
            out.emplace_back(ctx.jet_var_name(static_cast<int>(a), I), comp);
        }
    return out;
}

}  // namespace cahiers
