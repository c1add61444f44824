#pragma once

#include <string>

#include <json.hpp>

#include "cahiers/expr.hpp"
#include "cahiers/morphism.hpp"
#include "cahiers/weil.hpp"

namespace cahiers {

using Json = nlohmann::json;

// Schema violations carry the JSON pointer of the offending node.
struct JsonError : std::runtime_error {
    std::string path;
    JsonError(std::string path_, const std::string& message)
        : std::runtime_error("at '" + (path_.empty() ? std::string("/") : path_) + "': " + message),
          path(std::move(path_)) {}
};

// Wrapper over the underlying parser that reports malformed text as JsonError.
Json parse_json(const std::string& text);

Json rational_to_json(const Rational& r);  // {"num": "...", "den": "..."} decimal strings
Rational rational_from_json(const Json& j, const std::string& path = "");

Json expr_to_json(const Expr& e);
Expr expr_from_json(const Json& j, const std::string& path = "");

// Presentation {m, l, relations, basis}; deserialization rebuilds the algebra
// and checks that the recorded basis order matches exactly.
Json algebra_to_json(const WeilAlgebraPtr& alg);
WeilAlgebraPtr algebra_from_json(const Json& j, const std::string& path = "");

Json element_to_json(const WeilElement& e);  // {"algebra", "mode", "coeffs"}
WeilElement element_from_json(const Json& j, const std::string& path = "");

// {"source": {"coords", "algebra"}, "target": {...}, "images": {gen: coeffs}};
// deserialization re-runs full morphism validation.
Json morphism_to_json(const AlgebraMorphism& phi);
AlgebraMorphism morphism_from_json(const Json& j, const std::string& path = "");

}  // namespace cahiers
