#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cahiers/jet.hpp"

namespace cahiers {

struct FormError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A degree-1 covector: either dx^mu (horizontal) or the contact form
// theta^a_I (index = field, I = multi-index).
struct Covector {
    bool horizontal;
    int index;
    MultiIndex I;  // empty for horizontal covectors

    static Covector dx(int mu) { return Covector{true, mu, {}}; }
    static Covector theta(int field, MultiIndex I) { return Covector{false, field, std::move(I)}; }
    bool operator==(const Covector& o) const {
        return horizontal == o.horizontal && index == o.index && I == o.I;
    }
    // all dx (by coordinate) before all theta (by field, then multi-index)
    bool operator<(const Covector& o) const;
};

using CovectorWord = std::vector<Covector>;

// Inhomogeneous local form: sum of coefficient * sorted covector word.
// Homogeneous (p,q)-forms report their bidegree; contraction with a mixed
// vector field may legitimately produce mixed-bidegree results.
class LocalForm {
public:
    explicit LocalForm(JetContext ctx);
    static LocalForm function(const JetContext& ctx, const Expr& f);  // (0,0)
    static LocalForm dx(const JetContext& ctx, int mu);
    static LocalForm theta(const JetContext& ctx, int field, const MultiIndex& I);

    const JetContext& ctx() const { return ctx_; }
    const std::map<CovectorWord, Expr>& terms() const { return terms_; }
    bool is_structurally_zero() const { return terms_.empty(); }

    // sorts the word with permutation parity, drops repeated covectors,
    // combines like terms, erases structurally zero coefficients
    void add_term(const Expr& coeff, CovectorWord word);

    std::optional<std::pair<int, int>> bidegree() const;  // nullopt when mixed or zero

    LocalForm operator+(const LocalForm& o) const;
    LocalForm operator-(const LocalForm& o) const;
    LocalForm scaled(const Expr& c) const;
    std::string str() const;

private:
    JetContext ctx_;
    std::map<CovectorWord, Expr> terms_;
};

std::string covector_str(const JetContext& ctx, const Covector& v);

LocalForm wedge(const LocalForm& a, const LocalForm& b);

// d_V f = sum (df/du^a_I) theta^a_I; d_V dx = 0; d_V theta = 0.
LocalForm d_V(const LocalForm& w);

// d_H f = D_mu f dx^mu; d_H dx = 0; d_H theta^a_I = -theta^a_{I+mu} ^ dx^mu.
LocalForm d_H(const LocalForm& w);

// iota_X dx^mu = X^mu; iota_X theta^a_I = Y^a_I - u^a_{I+mu} X^mu; extended as
// a degree -1 graded derivation. Missing vector-field components are zero.
LocalForm contract(const JetVectorField& X, const LocalForm& w);

// L_X = iota_X (d_H + d_V) + (d_H + d_V) iota_X
LocalForm lie_derivative(const JetVectorField& X, const LocalForm& w);

// Pullback along the prolonged section: coefficients are evaluated on the jet
// of phi and each theta^a_I is expanded into its horizontal remainder, which
// vanishes for exact prolongations.
LocalForm pullback_along(const LocalForm& w, const SectionData& phi);

// Probabilistic zero test applied to every coefficient.
bool is_zero_form(const LocalForm& w, unsigned long long seed = kDefaultSeed);

// Sum of terms; '*' wedges covectors (written dx, dt, th(u), th(u,x)) and
// multiplies scalars; du(u,x) is converted to the contact basis on the spot.
LocalForm parse_form(const JetContext& ctx, const std::string& text);

// Deterministic random (p,q)-form with polynomial/trig coefficients of jet
// order <= max_order; used by the identity-check suites.
LocalForm random_form(const JetContext& ctx, int max_order, int p, int q, std::mt19937_64& rng);

Expr random_jet_expr(const JetContext& ctx, int max_order, std::mt19937_64& rng);

}  // namespace cahiers
