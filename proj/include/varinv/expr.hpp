#pragma once

#include "varinv/rational.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace varinv {

// Immutable symbolic expression DAG with exact rational constants.
//
// Construction goes through the smart constructors below, which keep every
// value in a normal form: sums are flat with like terms collected over
// rational coefficients, products are flat with same-base rational powers
// merged and the coefficient folded, rational constants are exact.
// simplify() is therefore idempotent and structural equality is a usable
// equality test on normalized values.

enum class Kind : unsigned char {
    Num,   // rational constant
    Sym,   // named symbol
    Pow,   // base^exponent, rational exponent != 0, 1; sqrt is Pow(., 1/2)
    Sin,
    Cos,
    Exp,
    Log,
    Mul,   // flat product; optional leading Num coefficient
    Add,   // flat sum; like terms merged
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    Kind kind;
    Rat value;               // Num; also the exponent for Pow
    std::string name;        // Sym
    std::vector<Expr> kids;  // Pow/fn: 1 child; Add/Mul: >= 2 children
    std::size_t hash = 0;
};

// --- construction -----------------------------------------------------------

Expr make_num(const Rat& r);
Expr make_num(long long n);
Expr make_sym(const std::string& name);
Expr add(std::vector<Expr> terms);
Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr neg(const Expr& a);
Expr mul(std::vector<Expr> factors);
Expr mul(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr pow(const Expr& base, const Rat& exponent);
Expr pow(const Expr& base, long long exponent);
Expr sqrt(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);

inline Expr zero() { return make_num(0); }
inline Expr one() { return make_num(1); }

// --- predicates / access ----------------------------------------------------

inline bool is_num(const Expr& e) { return e->kind == Kind::Num; }
inline bool is_zero(const Expr& e) { return e->kind == Kind::Num && e->value == 0; }
inline bool is_one(const Expr& e) { return e->kind == Kind::Num && e->value == 1; }

// Total order on normalized expressions; drives canonical child ordering.
int compare(const Expr& a, const Expr& b);
bool equal(const Expr& a, const Expr& b);

// Re-normalizes an arbitrary tree through the smart constructors.
// Identity on values built by them.
Expr simplify(const Expr& e);

// Exact partial derivative w.r.t. a symbol, normalized.
Expr differentiate(const Expr& e, const std::string& sym);

// Substitute a symbol by an expression, renormalizing.
Expr substitute(const Expr& e, const std::string& sym, const Expr& repl);

// Collect free symbol names.
void collect_symbols(const Expr& e, std::vector<std::string>& out);
bool depends_on(const Expr& e, const std::string& sym);

// Canonical text form; parse(print(e)) is structurally equal to e.
std::string to_string(const Expr& e);

struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace varinv
