#pragma once

#include "varinv/expr.hpp"
#include "varinv/zerotest.hpp"

#include <set>
#include <string>
#include <vector>

namespace varinv {

// Optional user-supplied eigendata accepted after residual validation; the
// fallback for systems whose characteristic polynomial the symbolic solver
// cannot crack.
struct UserEigenData {
    std::vector<Expr> lambdas;              // size n
    std::vector<std::vector<Expr>> vectors; // n rows of n components
};

// A system of n second-order ODEs d2x^a = F^a(t, x, dx) together with its
// sampling domain. Velocity of coordinate q is the symbol `dq`.
struct Sode {
    int n = 0;
    std::vector<std::string> coords;
    std::vector<Expr> forces;
    Domain domain;
    UserEigenData user_eigen; // empty lambdas -> not supplied

    std::string velocity(int a) const { return "d" + coords[static_cast<std::size_t>(a)]; }
    const std::string& coord(int a) const { return coords[static_cast<std::size_t>(a)]; }
    const Expr& force(int a) const { return forces[static_cast<std::size_t>(a)]; }

    // t, coordinates, velocities — the full symbol scope, in sampling order
    std::vector<std::string> all_symbols() const;
    std::set<std::string> symbol_set() const;

    // throws std::invalid_argument when names collide or forces use
    // undeclared symbols
    void validate() const;
};

} // namespace varinv
