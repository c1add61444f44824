#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cahiers/rational.hpp"

namespace cahiers {

enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Atan };

const char* fn_name(Fn f);
std::optional<Fn> fn_from_name(const std::string& name);

enum class Kind { Constant, FloatConst, Variable, Sum, Product, Power, Apply };

using Binding = std::map<std::string, double>;

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnboundVariable : EvalError {
    using EvalError::EvalError;
};
struct DomainError : EvalError {
    using EvalError::EvalError;
};

struct ExprNode;

// Immutable symbolic expression; every public constructor canonicalizes, so two
// structurally equal expressions always share one key string.
class Expr {
public:
    Expr();  // canonical zero (the empty sum)
    Expr(int v);
    Expr(long long v);
    Expr(const Rational& v);

    static Expr num(const Rational& v);
    static Expr fnum(double v);
    static Expr var(const std::string& name);
    static Expr sum(std::vector<Expr> terms);
    static Expr product(const Rational& coeff, std::vector<Expr> factors);
    static Expr power(const Expr& base, const Rational& exponent);
    static Expr apply(Fn f, const Expr& arg);

    Kind kind() const;
    const Rational& rat_value() const;    // Constant value / Product coefficient / Power exponent
    double float_value() const;           // FloatConst
    const std::string& var_name() const;  // Variable
    Fn fn() const;                        // Apply
    const std::vector<Expr>& operands() const;  // Sum terms / Product factors / Power base / Apply arg

    bool is_zero_structural() const;  // empty sum
    bool is_one() const;
    const std::string& key() const;

    bool operator==(const Expr& other) const;
    bool operator!=(const Expr& other) const;
    bool operator<(const Expr& other) const;  // key order

private:
    explicit Expr(std::shared_ptr<const ExprNode> node);
    std::shared_ptr<const ExprNode> node_;
    friend struct ExprBuilder;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

Expr pow(const Expr& base, const Rational& exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr tan(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);
Expr atan(const Expr& a);

Expr differentiate(const Expr& e, const std::string& v);
double eval_numeric(const Expr& e, const Binding& b);

// Exact evaluation; nullopt when some value is not exactly representable
// (e.g. exp(1)); unbound variables still throw.
std::optional<Rational> eval_rational(const Expr& e, const std::map<std::string, Rational>& b);

Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements);
void collect_free_vars(const Expr& e, std::set<std::string>& out);
std::set<std::string> free_vars(const Expr& e);

std::string print(const Expr& e);
// Rendering suitable for use as one factor of a product (sums get parens).
std::string print_factor(const Expr& e);

enum class ZeroVerdict { Zero, NonZero };

struct ZeroCheck {
    ZeroVerdict verdict;
    // witness of non-vanishing, when found numerically
    std::optional<Binding> witness;
    double witness_value = 0.0;
};

inline constexpr int kZeroSamples = 12;
inline constexpr double kZeroTol = 1e-9;
inline constexpr unsigned long long kDefaultSeed = 0;

ZeroCheck is_zero_check(const Expr& e, unsigned long long seed = kDefaultSeed,
                        int samples = kZeroSamples, double tol = kZeroTol);
ZeroVerdict is_zero(const Expr& e, unsigned long long seed = kDefaultSeed,
                    int samples = kZeroSamples, double tol = kZeroTol);

}  // namespace cahiers
