#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cahiers/morphism.hpp"

namespace cahiers {

struct JetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Symmetric multi-index: base-coordinate indices stored sorted ascending.
struct MultiIndex {
    std::vector<int> indices;

    int order() const { return static_cast<int>(indices.size()); }
    MultiIndex plus(int mu) const;  // insert preserving sort
    bool operator==(const MultiIndex& o) const { return indices == o.indices; }
    bool operator<(const MultiIndex& o) const;  // by order, then lexicographic
};

// Names the base coordinates and field components; jet variables are written
// "<field>_<letters>" with the letters sorted into declaration order, and the
// bare field name is the order-0 variable.
class JetContext {
public:
    JetContext(std::vector<std::string> coords, std::vector<std::string> fields);

    const std::vector<std::string>& coords() const { return coords_; }
    const std::vector<std::string>& fields() const { return fields_; }
    int coord_index(const std::string& name) const;  // -1 when unknown

    std::string jet_var_name(int field, const MultiIndex& I) const;
    // accepts unsorted letters; nullopt when not a jet variable of this context
    std::optional<std::pair<int, MultiIndex>> parse_jet_var(const std::string& name) const;

    // rewrites jet variables to canonical sorted names, leaves other names alone
    Expr canonicalize(const Expr& e) const;
    // highest |I| among jet variables present (0 when none)
    int jet_order(const Expr& e) const;
    // all multi-indices with |I| <= n, sorted
    std::vector<MultiIndex> multi_indices(int n) const;
    // throws when a variable is neither a coordinate nor a jet variable
    void validate_strict(const Expr& e) const;

    bool operator==(const JetContext& o) const { return coords_ == o.coords_ && fields_ == o.fields_; }

private:
    std::vector<std::string> coords_;
    std::vector<std::string> fields_;
};

using SectionData = std::map<std::string, Expr>;  // field name -> expression

// u^a_I -> d_I phi^a for |I| <= n, listed field-major in multi-index order.
std::vector<std::pair<std::string, Expr>> prolong(const JetContext& ctx, const SectionData& phi, int n);

std::map<std::string, Expr> prolongation_map(const JetContext& ctx, const SectionData& phi, int n);

// D_mu = d/dx^mu + sum over jet variables present of u^a_{I+mu} d/du^a_I
Expr total_derivative(const JetContext& ctx, const Expr& f, int mu);
Expr total_derivative(const JetContext& ctx, const Expr& f, const std::string& coord);
// iterated along a multi-index
Expr total_derivative(const JetContext& ctx, const Expr& f, const MultiIndex& I);

// Asserts d/dx^mu (f after prolongation) == (D_mu f) after prolongation, via
// the probabilistic zero test; throws JetError with the witness binding.
void chain_rule_identity(const JetContext& ctx, const Expr& f, const SectionData& phi, int mu,
                         unsigned long long seed = kDefaultSeed);

struct JetVectorField {
    std::map<std::string, Expr> X;  // per coordinate name; absent = 0
    std::map<std::string, Expr> Y;  // per canonical jet variable name; absent = 0

    Expr x_component(const std::string& coord) const;
    Expr y_component(const std::string& jet_var) const;
};

// X_H = X^mu (d/dx^mu + sum u^a_{I+mu} d/du^a_I), X_V = X - X_H, with the
// vertical components reported for all |I| <= n.
std::pair<JetVectorField, JetVectorField> split_vector_field(const JetContext& ctx, const JetVectorField& X,
                                                             int n);

// Vertical field with Y^a_I = D_I Q^a for |I| <= n.
JetVectorField prolong_evolutionary(const JetContext& ctx, const SectionData& Q, int n);

// Tangent vector at the prolonged section: x-components X^mu and
// u^a_I-components sum_mu X^mu d_{I+mu} phi^a (p) + d_I Z^a (p).
std::vector<std::pair<std::string, Expr>> ev_pushforward(const JetContext& ctx, const SectionData& phi,
                                                         const SectionData& Z, const TangentVector& X, int n);

}  // namespace cahiers
