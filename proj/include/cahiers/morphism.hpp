#pragma once

#include <map>
#include <string>
#include <vector>

#include "cahiers/weil.hpp"

namespace cahiers {

struct MorphismError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// O(R^k x D) = C^inf(x_1..x_k) tensor O(D); weil is the trivial algebra when
// there is no infinitesimal thickening.
struct ThickenedSpec {
    std::vector<std::string> coords;
    WeilAlgebraPtr weil;

    static ThickenedSpec plain(std::vector<std::string> coords);
    bool same_as(const ThickenedSpec& o) const;
    std::string str() const;
};

// Algebra map determined by generator images: one target element per smooth
// coordinate and per nilpotent generator e1..em of the source.
class AlgebraMorphism {
public:
    const ThickenedSpec& source() const { return source_; }
    const ThickenedSpec& target() const { return target_; }
    const std::map<std::string, WeilElement>& images() const { return images_; }
    const WeilElement& image(const std::string& gen) const;
    bool operator==(const AlgebraMorphism& o) const;
    bool operator!=(const AlgebraMorphism& o) const { return !(*this == o); }

private:
    friend AlgebraMorphism make_morphism(ThickenedSpec, ThickenedSpec, std::map<std::string, WeilElement>);
    ThickenedSpec source_;
    ThickenedSpec target_;
    std::map<std::string, WeilElement> images_;
};

// Validates that nilpotent generators map to nilpotent elements and that every
// source relation (truncation monomials and extra relations) vanishes on the
// images; reports the offending relation otherwise.
AlgebraMorphism make_morphism(ThickenedSpec source, ThickenedSpec target,
                              std::map<std::string, WeilElement> images);

AlgebraMorphism identity_morphism(const ThickenedSpec& spec);

// Evaluates f (an expression in source generators) on the images via Taylor
// extension around the images' scalar parts.
WeilElement apply(const AlgebraMorphism& phi, const Expr& f);

// Pushes a whole element of the source algebra through the morphism.
WeilElement apply_element(const AlgebraMorphism& phi, const WeilElement& elem);

AlgebraMorphism compose(const AlgebraMorphism& after, const AlgebraMorphism& before);

// Target must be R itself (no coordinates, trivial Weil part): the morphism is
// evaluation at a unique point, which this returns.
std::vector<double> milnor_point(const AlgebraMorphism& phi);

struct TangentVector {
    std::vector<std::string> coords;  // source coordinate names
    std::vector<Expr> base;           // scalar parts of the images
    std::vector<Expr> components;     // e-coefficients of the images
};

// x_i -> base_i + comp_i * e over the dual numbers
AlgebraMorphism make_tangent_morphism(const std::vector<std::string>& coords, const std::vector<Expr>& base,
                                      const std::vector<Expr>& components);

// Target Weil part must be the dual numbers D(1,1).
TangentVector tangent_decompose(const AlgebraMorphism& phi);

// Precomposition with the scaling e -> t*e on the dual-number target.
AlgebraMorphism tangent_scale(const Expr& t, const AlgebraMorphism& phi);

// Combines two tangent vectors at the same base into one D(2,1)-valued
// morphism (sound because e1*e2 = 0 there) and restricts along the diagonal
// e1 -> e, e2 -> e.
AlgebraMorphism tangent_add(const AlgebraMorphism& phi1, const AlgebraMorphism& phi2);

// Smooth map R^n -> R^m by component expressions in in_coords.
struct SmoothMap {
    std::vector<std::string> in_coords;
    std::vector<std::string> out_coords;
    std::vector<Expr> components;  // one per out coordinate
};

// The Weil-bundle functor on points: sends a D-point of R^n to the D-point of
// R^m with generator images apply(phi, f_j).
AlgebraMorphism weil_bundle_map(const SmoothMap& f, const AlgebraMorphism& phi);

struct PathTangent {
    std::vector<Expr> position;  // path components at t0
    std::vector<Expr> velocity;  // their t-derivatives at t0
};

// Restriction of a smooth path of maps to t = t0 together with its derivative;
// agrees with substituting t -> t0 + e over the dual numbers.
PathTangent path_restrict(const std::vector<Expr>& path, const std::string& t, const Expr& t0);

}  // namespace cahiers
