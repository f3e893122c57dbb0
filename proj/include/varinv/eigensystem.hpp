#pragma once

#include "varinv/geometry.hpp"
#include "varinv/sode.hpp"
#include "varinv/zerotest.hpp"

#include <optional>
#include <string>
#include <vector>

namespace varinv {

struct EigenSystem {
    int n = 0;
    std::vector<Expr> lambdas;                 // sorted: rational constants first
    std::vector<std::vector<Expr>> vectors;    // vectors[a][b], row a = eigenvector a
    std::vector<std::vector<Expr>> coframe;    // coframe[a][b]; coframe . vectors^T = I
    bool real_distinct = false;
    bool repeated = false;
    bool complex_evs = false;
    bool non_diagonalisable = false;
    bool rescaled_offdiag = false;  // off-diagonal tau^Gamma vanish (precondition for rescaling)
    bool rescaled_diag = false;     // every diagonal tau^Gamma killed by a scaling
    std::vector<bool> rescale_ok;   // per-index outcome of the scaling search
};

enum class EigenStatus {
    Ok,                // distinct real eigenvalues, full system built
    Repeated,          // diagonalisable with a repeated eigenvalue (case C)
    NonDiagonalisable, // repeated eigenvalue with deficient eigenspace (case D)
    Complex,           // complex eigenvalue pair on the domain
    RootFailure,       // symbolic root extraction failed and no usable user data
};

struct EigenOutcome {
    EigenStatus status = EigenStatus::RootFailure;
    EigenSystem es;           // fully populated iff status == Ok
    std::vector<Expr> lambdas_found; // whatever roots were identified (diagnostics)
    std::string detail;
};

// Symbolic eigen-structure of the Jacobi endomorphism (n <= 4). Block
// decomposition over invariant coordinate subspaces, closed-form roots per
// block, symbolic nullspaces, exact dual coframe. User eigendata on the Sode
// is validated and used as the fallback when root extraction fails.
EigenOutcome eigensystem(const Sode& s, const GeometryData& g, const ZeroTester& zt);

// Exact inverse-transpose via adjugate/determinant; throws ExprError when the
// vector matrix is singular under the zero tester.
std::vector<std::vector<Expr>> dual_coframe(const std::vector<std::vector<Expr>>& vectors,
                                            const ZeroTester& zt);

// tau^{aGamma}_b = phi^a_c (Gamma(X_b^c) + X_b^e conn^c_e); shared between the
// rescaling search here and the full structure-function table.
std::vector<std::vector<Expr>> tau_gamma_matrix(const Sode& s, const GeometryData& g,
                                                const std::vector<std::vector<Expr>>& vectors,
                                                const std::vector<std::vector<Expr>>& coframe);

// Rescales eigenvectors X_a -> sigma_a X_a looking for Gamma(sigma_a) +
// tau^{aGamma}_a sigma_a = 0 via a monomial ansatz over {t, x^b, u^b,
// lambda_a}. No-op (with flags recording why) when off-diagonal tau^Gamma do
// not vanish.
EigenSystem rescale_eigenvectors(const EigenSystem& es, const Sode& s, const GeometryData& g,
                                 const ZeroTester& zt);

} // namespace varinv
