#pragma once

#include "varinv/tau.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace varinv {

// Basis 1-forms of the lifted adapted coframe {dt, phi^{aV}, phi^{aH}},
// encoded as small integers with the fixed total order
//   T < V(1) < ... < V(n) < H(1) < ... < H(n).
struct CoBasis {
    int n;
    int T() const { return 0; }
    int V(int a) const { return 1 + a; }
    int H(int a) const { return 1 + n + a; }
    bool is_V(int id) const { return id >= 1 && id <= n; }
    bool is_H(int id) const { return id > n; }
    int index_of(int id) const { return is_V(id) ? id - 1 : id - 1 - n; }
    int dim() const { return 2 * n + 1; }
    std::string name(int id) const;
};

// Exterior form of degree <= 3 over the adapted coframe with Expr
// coefficients. Keys are strictly increasing basis-id tuples; absent key
// means zero coefficient.
struct AdaptedForm {
    int degree = 0;
    std::map<std::vector<int>, Expr> coeff;

    static AdaptedForm zero_form(int degree) { return AdaptedForm{degree, {}}; }
    static AdaptedForm function(const Expr& f);           // degree 0
    static AdaptedForm basis1(int id, const Expr& c);     // c * (basis 1-form)

    bool is_zero_syntactic() const;
    AdaptedForm& accumulate(std::vector<int> idx, const Expr& c); // sorts, signs, merges
};

AdaptedForm operator+(const AdaptedForm& a, const AdaptedForm& b);
AdaptedForm operator-(const AdaptedForm& a, const AdaptedForm& b);
AdaptedForm scale(const Expr& f, const AdaptedForm& a);

struct DegreeOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// graded-antisymmetric product; throws DegreeOverflow past degree 3
AdaptedForm wedge(const AdaptedForm& a, const AdaptedForm& b);

// Frame context bundling everything the structure equations need.
struct FrameContext {
    const Sode& s;
    const GeometryData& g;
    const EigenSystem& es;
    const TauTable& tt;
    CoBasis basis() const { return CoBasis{s.n}; }

    // df = Gamma(f) dt + X_b^V(f) phi^{bV} + X_b^H(f) phi^{bH}
    AdaptedForm d_function(const Expr& f) const;
    // structure equations for d(phi^{aV}), d(phi^{aH}); d(dt) = 0
    AdaptedForm d_basis(int id) const;
};

// exterior derivative via the structure equations; degree <= 2 input
AdaptedForm exterior_derivative(const AdaptedForm& w, const FrameContext& fc);

enum class Divisibility { Divisible, DivisibleNumeric, NotDivisible, Indeterminate };

struct DivisibilityResult {
    Divisibility verdict;
    std::optional<Point> witness;  // for NotDivisible
    std::string detail;
};

// whether w (degree 2) = beta ^ alpha for some 1-form beta, i.e. w ^ alpha = 0
DivisibilityResult divisibility_test(const AdaptedForm& w, const AdaptedForm& alpha,
                                     const FrameContext& fc, const ZeroTester& zt);

std::string to_string(const AdaptedForm& w, const CoBasis& basis);

} // namespace varinv
