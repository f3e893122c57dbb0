#pragma once

#include "varinv/eigensystem.hpp"

#include <map>
#include <string>
#include <vector>

namespace varinv {

// Structure functions of the Massa-Pagani covariant derivative in the lifted
// eigenframe, plus the curvature contractions rho^a_{bc} = phi^{aV}(R(X_b^H,
// X_c^H)). Coordinate formulas:
//   tau^{aG}_b  = phi^a_c (Gamma(X_b^c) + X_b^e conn^c_e)
//   tau^{aV}_bc = phi^a_d X_b^e dX_c^d/du^e
//   tau^{aH}_bc = phi^a_f (X_b^H(X_c^f) + X_b^e X_c^d dconn^f_e/du^d)
//   rho^a_bc    = phi^a_d R^d_{ef} X_b^e X_c^f
struct TauTable {
    int n = 0;
    std::vector<std::vector<Expr>> tau_G;              // [a][b]
    std::vector<std::vector<std::vector<Expr>>> tau_V; // [a][b][c]
    std::vector<std::vector<std::vector<Expr>>> tau_H; // [a][b][c]
    std::vector<std::vector<std::vector<Expr>>> rho;   // [a][b][c]

    const Expr& G(int a, int b) const { return tau_G[std::size_t(a)][std::size_t(b)]; }
    const Expr& V(int a, int b, int c) const {
        return tau_V[std::size_t(a)][std::size_t(b)][std::size_t(c)];
    }
    const Expr& H(int a, int b, int c) const {
        return tau_H[std::size_t(a)][std::size_t(b)][std::size_t(c)];
    }
    const Expr& R(int a, int b, int c) const {
        return rho[std::size_t(a)][std::size_t(b)][std::size_t(c)];
    }
    // A^{aV/H}_{cd} := tau^{aV/H}_{cd} - 2 tau^{aV/H}_{dc}
    Expr AV(int a, int c, int d) const { return sub(V(a, c, d), mul(make_num(2), V(a, d, c))); }
    Expr AH(int a, int c, int d) const { return sub(H(a, c, d), mul(make_num(2), H(a, d, c))); }
};

TauTable compute_tau_table(const Sode& s, const GeometryData& g, const EigenSystem& es);

// Jacobi-identity consistency suite: evaluates both sides of every identity
// family over all index combinations at sampled points and reports the max
// normalized residual per family. Residuals are |lhs-rhs|/(1+max magnitude).
struct JacobiReport {
    std::map<std::string, double> family_max; // family label -> max residual
    double overall_max = 0.0;
};

JacobiReport jacobi_identity_residuals(const Sode& s, const GeometryData& g, const TauTable& tt,
                                       const EigenSystem& es, int points,
                                       std::uint64_t seed = 0x5eed,
                                       EvalMode mode = EvalMode::Parallel);

} // namespace varinv
