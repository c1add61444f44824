#include "cahiers/json_io.hpp"

#include "cahiers/parser.hpp"

namespace cahiers {

namespace {

const Json& field(const Json& j, const std::string& path, const char* name) {
    if (!j.is_object()) throw JsonError(path, "expected an object");
    const auto it = j.find(name);
    if (it == j.end()) throw JsonError(path, std::string("missing field '") + name + "'");
    return *it;
}

std::string str_field(const Json& j, const std::string& path, const char* name) {
    const Json& f = field(j, path, name);
    if (!f.is_string()) throw JsonError(path + "/" + name, "expected a string");
    return f.get<std::string>();
}

int int_field(const Json& j, const std::string& path, const char* name) {
    const Json& f = field(j, path, name);
    if (!f.is_number_integer()) throw JsonError(path + "/" + name, "expected an integer");
    return f.get<int>();
}

BigInt bigint_from(const Json& j, const std::string& path) {
    if (!j.is_string()) throw JsonError(path, "expected a decimal string");
    try {
        return BigInt(j.get<std::string>());
    } catch (const std::exception&) {
        throw JsonError(path, "malformed integer '" + j.get<std::string>() + "'");
    }
}

}  // namespace

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw JsonError("", std::string("malformed JSON: ") + e.what());
    }
}

Json rational_to_json(const Rational& r) {
    return Json{{"num", rat_num(r).str()}, {"den", rat_den(r).str()}};
}

Rational rational_from_json(const Json& j, const std::string& path) {
    const BigInt num = bigint_from(field(j, path, "num"), path + "/num");
    const BigInt den = bigint_from(field(j, path, "den"), path + "/den");
    if (den == 0) throw JsonError(path + "/den", "denominator must be nonzero");
    return Rational(num, den);
}

Json expr_to_json(const Expr& e) {
    switch (e.kind()) {
        case Kind::Constant:
            return Json{{"kind", "num"}, {"value", rational_to_json(e.rat_value())}};
        case Kind::FloatConst:
            return Json{{"kind", "float"}, {"value", e.float_value()}};
        case Kind::Variable:
            return Json{{"kind", "var"}, {"name", e.var_name()}};
        case Kind::Sum: {
            Json terms = Json::array();
            for (const Expr& t : e.operands()) terms.push_back(expr_to_json(t));
            return Json{{"kind", "sum"}, {"terms", std::move(terms)}};
        }
        case Kind::Product: {
            Json factors = Json::array();
            for (const Expr& f : e.operands()) factors.push_back(expr_to_json(f));
            return Json{{"kind", "product"},
                        {"coeff", rational_to_json(e.rat_value())},
                        {"factors", std::move(factors)}};
        }
        case Kind::Power:
            return Json{{"kind", "power"},
                        {"base", expr_to_json(e.operands()[0])},
                        {"exp", rational_to_json(e.rat_value())}};
        case Kind::Apply:
            return Json{{"kind", "apply"}, {"fn", fn_name(e.fn())}, {"arg", expr_to_json(e.operands()[0])}};
    }
    throw JsonError("", "unreachable expression kind");
}

Expr expr_from_json(const Json& j, const std::string& path) {
    const std::string kind = str_field(j, path, "kind");
    if (kind == "num") return Expr::num(rational_from_json(field(j, path, "value"), path + "/value"));
    if (kind == "float") {
        const Json& v = field(j, path, "value");
        if (!v.is_number()) throw JsonError(path + "/value", "expected a number");
        return Expr::fnum(v.get<double>());
    }
    if (kind == "var") return Expr::var(str_field(j, path, "name"));
    if (kind == "sum") {
        const Json& terms = field(j, path, "terms");
        if (!terms.is_array()) throw JsonError(path + "/terms", "expected an array");
        std::vector<Expr> out;
        for (std::size_t i = 0; i < terms.size(); ++i)
            out.push_back(expr_from_json(terms[i], path + "/terms/" + std::to_string(i)));
        return Expr::sum(std::move(out));
    }
    if (kind == "product") {
        const Rational coeff = rational_from_json(field(j, path, "coeff"), path + "/coeff");
        const Json& factors = field(j, path, "factors");
        if (!factors.is_array()) throw JsonError(path + "/factors", "expected an array");
        std::vector<Expr> out;
        for (std::size_t i = 0; i < factors.size(); ++i)
            out.push_back(expr_from_json(factors[i], path + "/factors/" + std::to_string(i)));
        return Expr::product(coeff, std::move(out));
    }
    if (kind == "power")
        return Expr::power(expr_from_json(field(j, path, "base"), path + "/base"),
                           rational_from_json(field(j, path, "exp"), path + "/exp"));
    if (kind == "apply") {
        const std::string fn = str_field(j, path, "fn");
        const auto f = fn_from_name(fn);
        if (!f) throw JsonError(path + "/fn", "unknown function '" + fn + "'");
        return Expr::apply(*f, expr_from_json(field(j, path, "arg"), path + "/arg"));
    }
    throw JsonError(path + "/kind", "unknown kind '" + kind + "'");
}

Json algebra_to_json(const WeilAlgebraPtr& alg) {
    Json relations = Json::array();
    for (const Poly& r : alg->extra_relations()) relations.push_back(poly_str(r));
    Json basis = Json::array();
    for (const Monomial& b : alg->basis()) basis.push_back(b.str());
    return Json{{"m", alg->m()}, {"l", alg->l()}, {"relations", std::move(relations)},
                {"basis", std::move(basis)}};
}

namespace {

Monomial monomial_from_string(const std::string& s, int m, const std::string& path) {
    try {
        const Poly p = expr_to_poly(parse(s), m);
        if (p.size() == 1 && p.begin()->second == 1) return p.begin()->first;
    } catch (const std::exception&) {
    }
    throw JsonError(path, "malformed monomial '" + s + "'");
}

}  // namespace

WeilAlgebraPtr algebra_from_json(const Json& j, const std::string& path) {
    const int m = int_field(j, path, "m");
    const int l = int_field(j, path, "l");
    WeilAlgebraPtr alg;
    try {
        if (m == 0) {
            alg = WeilAlgebra::scalar();
        } else {
            alg = WeilAlgebra::disk(m, l);
            const Json& relations = field(j, path, "relations");
            if (!relations.is_array()) throw JsonError(path + "/relations", "expected an array");
            std::vector<Poly> extra;
            for (std::size_t i = 0; i < relations.size(); ++i) {
                const Json& r = relations[i];
                const std::string rp = path + "/relations/" + std::to_string(i);
                if (!r.is_string()) throw JsonError(rp, "expected a polynomial string");
                try {
                    extra.push_back(expr_to_poly(parse(r.get<std::string>()), m));
                } catch (const std::exception& e) {
                    throw JsonError(rp, std::string("malformed relation: ") + e.what());
                }
            }
            if (!extra.empty()) alg = WeilAlgebra::quotient(alg, std::move(extra));
        }
    } catch (const JsonError&) {
        throw;
    } catch (const std::exception& e) {
        throw JsonError(path, e.what());
    }
    if (j.contains("basis")) {
        const Json& basis = j["basis"];
        if (!basis.is_array()) throw JsonError(path + "/basis", "expected an array");
        if (static_cast<int>(basis.size()) != alg->dimension())
            throw JsonError(path + "/basis", "basis size does not match the presentation");
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const std::string bp = path + "/basis/" + std::to_string(i);
            if (!basis[i].is_string()) throw JsonError(bp, "expected a monomial string");
            if (basis[i].get<std::string>() != alg->basis()[i].str())
                throw JsonError(bp, "basis order mismatch: got '" + basis[i].get<std::string>() +
                                        "', presentation yields '" + alg->basis()[i].str() + "'");
        }
    }
    return alg;
}

namespace {

const char* mode_name(CoeffMode m) {
    switch (m) {
        case CoeffMode::Rational: return "rational";
        case CoeffMode::Float: return "float";
        case CoeffMode::Symbolic: return "symbolic";
    }
    return "rational";
}

Json coeff_to_json(const Coeff& c) {
    switch (c.mode()) {
        case CoeffMode::Rational: return rational_to_json(c.rat_value());
        case CoeffMode::Float: return Json(c.float_value());
        case CoeffMode::Symbolic: return expr_to_json(c.expr_value());
    }
    throw JsonError("", "unreachable coefficient mode");
}

Coeff coeff_from_json(const Json& j, CoeffMode mode, const std::string& path) {
    switch (mode) {
        case CoeffMode::Rational: return Coeff::rat(rational_from_json(j, path));
        case CoeffMode::Float:
            if (!j.is_number()) throw JsonError(path, "expected a number");
            return Coeff::flt(j.get<double>());
        case CoeffMode::Symbolic: return Coeff::sym(expr_from_json(j, path));
    }
    throw JsonError(path, "unreachable coefficient mode");
}

Json coeffs_to_json(const WeilElement& e) {
    Json coeffs = Json::object();
    for (const auto& [mono, c] : e.coeffs()) coeffs[mono.str()] = coeff_to_json(c);
    return coeffs;
}

WeilElement element_from_parts(const WeilAlgebraPtr& alg, const std::string& mode_s, const Json& coeffs,
                               const std::string& path) {
    CoeffMode mode;
    if (mode_s == "rational")
        mode = CoeffMode::Rational;
    else if (mode_s == "float")
        mode = CoeffMode::Float;
    else if (mode_s == "symbolic")
        mode = CoeffMode::Symbolic;
    else
        throw JsonError(path + "/mode", "unknown mode '" + mode_s + "'");
    if (!coeffs.is_object()) throw JsonError(path + "/coeffs", "expected an object");
    std::map<Monomial, Coeff, MonoCmp> raw;
    for (const auto& [key, value] : coeffs.items()) {
        const std::string cp = path + "/coeffs/" + key;
        const Monomial mono = monomial_from_string(key, alg->m(), cp);
        raw[mono] = coeff_from_json(value, mode, cp);
    }
    try {
        WeilElement out = WeilElement::from_poly(alg, raw);
        return out.mode() == mode ? out : out.promoted(mode);
    } catch (const std::exception& e) {
        throw JsonError(path + "/coeffs", e.what());
    }
}

}  // namespace

Json element_to_json(const WeilElement& e) {
    return Json{{"algebra", algebra_to_json(e.algebra())},
                {"mode", mode_name(e.mode())},
                {"coeffs", coeffs_to_json(e)}};
}

WeilElement element_from_json(const Json& j, const std::string& path) {
    const WeilAlgebraPtr alg = algebra_from_json(field(j, path, "algebra"), path + "/algebra");
    return element_from_parts(alg, str_field(j, path, "mode"), field(j, path, "coeffs"), path);
}

namespace {

Json spec_to_json(const ThickenedSpec& spec) {
    Json coords = Json::array();
    for (const std::string& c : spec.coords) coords.push_back(c);
    return Json{{"coords", std::move(coords)}, {"algebra", algebra_to_json(spec.weil)}};
}

ThickenedSpec spec_from_json(const Json& j, const std::string& path) {
    const Json& coords = field(j, path, "coords");
    if (!coords.is_array()) throw JsonError(path + "/coords", "expected an array");
    ThickenedSpec spec;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (!coords[i].is_string())
            throw JsonError(path + "/coords/" + std::to_string(i), "expected a string");
        spec.coords.push_back(coords[i].get<std::string>());
    }
    spec.weil = algebra_from_json(field(j, path, "algebra"), path + "/algebra");
    return spec;
}

}  // namespace

Json morphism_to_json(const AlgebraMorphism& phi) {
    Json images = Json::object();
    for (const auto& [gen, elem] : phi.images())
        images[gen] = Json{{"mode", mode_name(elem.mode())}, {"coeffs", coeffs_to_json(elem)}};
    return Json{{"source", spec_to_json(phi.source())},
                {"target", spec_to_json(phi.target())},
                {"images", std::move(images)}};
}

AlgebraMorphism morphism_from_json(const Json& j, const std::string& path) {
    ThickenedSpec source = spec_from_json(field(j, path, "source"), path + "/source");
    ThickenedSpec target = spec_from_json(field(j, path, "target"), path + "/target");
    const Json& images = field(j, path, "images");
    if (!images.is_object()) throw JsonError(path + "/images", "expected an object");
    std::map<std::string, WeilElement> out;
    for (const auto& [gen, value] : images.items()) {
        const std::string ip = path + "/images/" + gen;
        out.emplace(gen, element_from_parts(target.weil, str_field(value, ip, "mode"),
                                            field(value, ip, "coeffs"), ip));
    }
    try {
        return make_morphism(std::move(source), std::move(target), std::move(out));
    } catch (const MorphismError& e) {
        throw JsonError(path + "/images", e.what());
    }
}

}  // namespace cahiers
