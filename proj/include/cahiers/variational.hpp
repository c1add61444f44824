#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cahiers/jet.hpp"
#include "cahiers/weil.hpp"

namespace cahiers {

struct VariationalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Local Lagrangian density over a jet context (the volume form dx^1...dx^d
// is implicit).
struct Lagrangian {
    JetContext ctx;
    Expr density;  // canonical finite-order jet expression
};

// Canonicalizes the density and rejects variables that are neither base
// coordinates nor jet variables of the context.
Lagrangian make_lagrangian(const JetContext& ctx, const Expr& density);

struct ELResult {
    std::vector<std::pair<std::string, Expr>> components;  // field name -> EL_a
    const Expr& component(const std::string& field) const;
};

// EL_a = sum over sorted multi-indices I (including the empty one) of
// (-1)^{|I|} D_I (dL/du^a_I), with the literal partial derivative.
ELResult euler_lagrange(const Lagrangian& L);

// One coefficient dEL_row/du^col_I of the linearized Euler-Lagrange operator.
struct JacobiCoefficient {
    std::string row_field;
    std::string col_field;
    MultiIndex I;
    Expr coefficient;
};

struct JacobiOperator {
    JetContext ctx;
    std::vector<JacobiCoefficient> coefficients;  // row-major, multi-index order
};

JacobiOperator jacobi(const Lagrangian& L);

// Substitutes the prolongation of phi into the coefficients and contracts
// with d_I Z^b; missing perturbation components are zero. Returns per row
// field an expression in the base coordinates.
std::vector<std::pair<std::string, Expr>> apply_jacobi(const JacobiOperator& J, const SectionData& phi,
                                                       const SectionData& Z);

struct GridAxis {
    std::string name;
    double lo;
    double hi;
    int count;
    bool periodic;
};

struct Grid {
    std::vector<GridAxis> axes;
    bool all_periodic() const;
    std::size_t total_points() const;
};

// "name:lo:hi:count[:periodic]", comma-separated per axis; count >= 2.
Grid parse_grid(const std::string& spec);

inline constexpr double kOnShellTolerance = 1e-8;
inline constexpr double kFirstVariationStep = 1e-5;

struct ResidualReport {
    double max_abs = 0.0;
    std::vector<double> per_point;  // max over fields, row-major in axis order
    bool on_shell(double tau = kOnShellTolerance) const { return max_abs <= tau; }
};

ResidualReport residual(const Lagrangian& L, const SectionData& phi, const Grid& g);

// Quadrature of the density along the prolonged section: rectangle rule on
// periodic axes, composite trapezoid otherwise.
double action(const Lagrangian& L, const SectionData& phi, const Grid& g);

// Same quadrature with section components that mention nilpotent parameters:
// params[j] is bound to the j-th generator of alg and the result integrates
// coefficientwise.
WeilElement action_weil(const Lagrangian& L, const SectionData& phi, const Grid& g,
                        const WeilAlgebraPtr& alg, const std::vector<std::string>& params);

struct FirstVariation {
    double lhs;  // central finite difference of action(phi + t Z) at t = 0
    double rhs;  // quadrature of sum_a EL_a(j phi) * Z^a
    double gap;
    bool boundary_flag;  // true on non-periodic grids: boundary terms not accounted
};

FirstVariation first_variation(const Lagrangian& L, const SectionData& phi, const SectionData& Z,
                               const Grid& g);

// Truncated expansion of S around the point: coefficients of the order-k jet
// attached to nilpotent displacements named h (or h1..hn).
struct Perturbation {
    WeilElement element;             // over the n-generator order-k disk algebra
    std::vector<std::string> names;  // display names, parallel to the generators
    Expr polynomial() const;
    std::string str() const;
};

Perturbation perturb_expand(const Expr& S, const std::vector<std::pair<std::string, Expr>>& point, int k);

}  // namespace cahiers
