#pragma once

#include "varinv/sode.hpp"

#include <vector>

namespace varinv {

// Adapted-frame calculus on the evolution space of a Sode: the dynamical
// vector field, the nonlinear connection, the Jacobi endomorphism and the
// curvature of the connection, plus the frame derivations acting on
// expressions. Built once per Sode and shared read-only afterwards.
struct GeometryData {
    std::vector<std::vector<Expr>> conn;              // conn[a][b]
    std::vector<std::vector<Expr>> phi;               // phi[a][b]
    std::vector<std::vector<std::vector<Expr>>> curv; // curv[d][a][b], antisymmetric in (a,b)
};

// Gamma(f) = df/dt + sum_a u^a df/dx^a + sum_a F^a df/du^a
Expr gamma_apply(const Sode& s, const Expr& f);

// V_a(f) = df/du^a
Expr vertical_apply(const Sode& s, int a, const Expr& f);

// H_a(f) = df/dx^a - conn^b_a df/du^b  (needs the connection)
Expr horizontal_apply(const Sode& s, const GeometryData& g, int a, const Expr& f);

std::vector<std::vector<Expr>> connection_coefficients(const Sode& s);
std::vector<std::vector<Expr>> jacobi_endomorphism(const Sode& s,
                                                   const std::vector<std::vector<Expr>>& conn);
std::vector<std::vector<std::vector<Expr>>> curvature_tensor(const Sode& s);

GeometryData build_geometry(const Sode& s);

} // namespace varinv
