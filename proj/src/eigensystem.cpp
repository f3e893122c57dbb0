#include "varinv/eigensystem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace varinv {

namespace {

using Mat = std::vector<std::vector<Expr>>;

std::size_t expr_size(const Expr& e) {
    std::size_t s = 1;
    for (const auto& k : e->kids) s += expr_size(k);
    return s;
}

// --- strongly connected components of the off-diagonal dependency graph ----
// Edge j -> i whenever Phi^i_j != 0 (i != j). SCCs give invariant blocks in
// block-triangular order; the spectrum is the union of the block spectra.
std::vector<std::vector<int>> phi_blocks(const Mat& phi, const ZeroTester& zt, int n) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && !zt.is_zero(phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]))
                adj[static_cast<std::size_t>(j)].push_back(i);

    // Tarjan
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<bool> onstack(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int counter = 0;
    std::function<void(int)> strongconnect = [&](int v) {
        index[static_cast<std::size_t>(v)] = low[static_cast<std::size_t>(v)] = counter++;
        stack.push_back(v);
        onstack[static_cast<std::size_t>(v)] = true;
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (index[static_cast<std::size_t>(w)] < 0) {
                strongconnect(w);
                low[static_cast<std::size_t>(v)] =
                    std::min(low[static_cast<std::size_t>(v)], low[static_cast<std::size_t>(w)]);
            } else if (onstack[static_cast<std::size_t>(w)]) {
                low[static_cast<std::size_t>(v)] =
                    std::min(low[static_cast<std::size_t>(v)], index[static_cast<std::size_t>(w)]);
            }
        }
        if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
            std::vector<int> comp;
            while (true) {
                int w = stack.back();
                stack.pop_back();
                onstack[static_cast<std::size_t>(w)] = false;
                comp.push_back(w);
                if (w == v) break;
            }
            std::sort(comp.begin(), comp.end());
            comps.push_back(std::move(comp));
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[static_cast<std::size_t>(v)] < 0) strongconnect(v);
    return comps;
}

struct RootAccum {
    std::vector<Expr> roots;
    bool complex_found = false;
    bool failed = false;
    std::string detail;
};

// sign of an expression sampled over the domain: +1 / -1 / 0 (mixed or zero)
int sampled_sign(const Expr& e, const ZeroTester& zt) {
    auto r = zt.test(e);
    if (r.verdict != ZeroVerdict::NonZero) return 0;
    std::vector<std::string> syms;
    collect_symbols(e, syms);
    std::sort(syms.begin(), syms.end());
    Sampler sampler(syms, zt.domain, zt.seed + 17);
    bool pos = false, neg = false;
    for (int i = 0; i < zt.trials; ++i) {
        auto row = sampler.draw();
        try {
            double v = eval_point(e, sampler.as_point(row));
            (v >= 0 ? pos : neg) = true;
        } catch (const EvalError&) {
            continue;
        }
    }
    if (pos && !neg) return 1;
    if (neg && !pos) return -1;
    return 0;
}

void quadratic_roots(const Expr& tr, const Expr& det, const ZeroTester& zt, RootAccum& out) {
    Expr disc = sub(pow(tr, 2), mul(make_num(4), det));
    auto dz = zt.test(disc);
    if (dz.verdict != ZeroVerdict::NonZero) {
        // double root tr/2
        Expr r = mul(make_num(Rat(1, 2)), tr);
        out.roots.push_back(r);
        out.roots.push_back(r);
        return;
    }
    int sign = sampled_sign(disc, zt);
    if (sign < 0) {
        out.complex_found = true;
        out.detail = "negative discriminant " + to_string(disc);
        return;
    }
    if (sign == 0) {
        out.failed = true;
        out.detail = "discriminant changes sign on the sampling domain: " + to_string(disc);
        return;
    }
    Expr s = sqrt(disc);
    out.roots.push_back(mul(make_num(Rat(1, 2)), add(tr, s)));
    out.roots.push_back(mul(make_num(Rat(1, 2)), sub(tr, s)));
}

// characteristic polynomial coefficients of a k x k block via
// Faddeev-LeVerrier: p(l) = l^k - c1 l^(k-1) + c2 l^(k-2) - ...
std::vector<Expr> char_invariants(const Mat& m) {
    std::size_t k = m.size();
    Mat M(k, std::vector<Expr>(k, zero()));
    std::vector<Expr> cs;
    Mat A = m;
    // M1 = A, c1 = tr A; M_{j+1} = A (M_j - c_j I)
    for (std::size_t j = 1; j <= k; ++j) {
        if (j == 1) {
            M = A;
        } else {
            Mat prev = M;
            for (std::size_t i = 0; i < k; ++i) prev[i][i] = sub(prev[i][i], cs.back());
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < k; ++c) {
                    std::vector<Expr> terms;
                    for (std::size_t e = 0; e < k; ++e) terms.push_back(mul(A[r][e], prev[e][c]));
                    M[r][c] = add(std::move(terms));
                }
        }
        std::vector<Expr> diag;
        for (std::size_t i = 0; i < k; ++i) diag.push_back(M[i][i]);
        cs.push_back(mul(make_num(Rat(1, static_cast<long long>(j))), add(std::move(diag))));
    }
    return cs; // c1..ck with  det = ck (sign handled by caller)
}

bool all_rational(const Mat& m) {
    for (const auto& row : m)
        for (const auto& e : row)
            if (!is_num(e)) return false;
    return true;
}

// all rational roots of a monic rational polynomial l^k - c1 l^{k-1} + c2 ... ;
// peels them off and returns the (possibly empty) unfactored remainder
// coefficients in the same alternating convention
std::vector<Rat> rational_poly_from_invariants(const std::vector<Expr>& cs) {
    // p(l) = l^k + a_{k-1} l^{k-1} + ... + a_0 with a_{k-j} = (-1)^j c_j
    std::size_t k = cs.size();
    std::vector<Rat> a(k + 1);
    a[k] = 1;
    Rat sign = -1;
    for (std::size_t j = 1; j <= k; ++j) {
        a[k - j] = sign * cs[j - 1]->value;
        sign = -sign;
    }
    return a; // coefficients a[0..k], a[k] = 1
}

std::vector<Rat> divisors_of(const Rat& v) {
    std::vector<Rat> out;
    Int n = num(v) < 0 ? Int(-num(v)) : num(v);
    Int d = den(v);
    if (n == 0) return out;
    // denominators of candidate roots divide the lcm of coefficient dens via
    // scaling; keep it simple: try divisors of numerator over divisors of a
    // small denominator range
    std::vector<Int> nd, dd;
    for (Int i = 1; i * i <= n; ++i)
        if (n % i == 0) {
            nd.push_back(i);
            if (i * i != n) nd.push_back(n / i);
        }
    for (Int i = 1; i * i <= d; ++i)
        if (d % i == 0) {
            dd.push_back(i);
            if (i * i != d) dd.push_back(d / i);
        }
    dd.push_back(d);
    for (const auto& p : nd)
        for (const auto& q : dd) {
            out.push_back(Rat(p, q));
            out.push_back(Rat(-p, q));
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void rational_block_roots(const Mat& m, const ZeroTester& zt, RootAccum& out) {
    auto cs = char_invariants(m);
    std::vector<Rat> a = rational_poly_from_invariants(cs);
    std::size_t k = a.size() - 1;
    auto eval_poly = [&](const std::vector<Rat>& p, const Rat& x) {
        Rat v = 0;
        for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
        return v;
    };
    // peel rational roots
    while (k > 2) {
        if (a[0] == 0) {
            out.roots.push_back(zero());
            a.erase(a.begin());
            --k;
            continue;
        }
        bool found = false;
        for (const Rat& cand : divisors_of(a[0])) {
            if (eval_poly(a, cand) == 0) {
                out.roots.push_back(make_num(cand));
                // synthetic division by (x - cand): quotient b[0..k-1], monic
                std::vector<Rat> b(k);
                b[k - 1] = a[k];
                for (std::size_t i = k - 1; i-- > 0;) b[i] = a[i + 1] + cand * b[i + 1];
                a = std::move(b);
                --k;
                found = true;
                break;
            }
        }
        if (!found) {
            out.failed = true;
            out.detail = "no rational root of a degree-" + std::to_string(k) + " factor";
            return;
        }
    }
    if (k == 1) {
        out.roots.push_back(make_num(Rat(-a[0])));
        return;
    }
    if (k == 2) {
        // l^2 + a1 l + a0: trace = -a1, det = a0
        quadratic_roots(make_num(Rat(-a[1])), make_num(a[0]), zt, out);
    }
}

void block_roots(const Mat& phi, const std::vector<int>& block, const ZeroTester& zt,
                 RootAccum& out) {
    std::size_t k = block.size();
    Mat m(k, std::vector<Expr>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            m[i][j] = phi[static_cast<std::size_t>(block[i])][static_cast<std::size_t>(block[j])];

    if (k == 1) {
        out.roots.push_back(m[0][0]);
        return;
    }
    if (all_rational(m)) {
        rational_block_roots(m, zt, out);
        return;
    }
    if (k == 2) {
        Expr tr = add(m[0][0], m[1][1]);
        Expr det = sub(mul(m[0][0], m[1][1]), mul(m[0][1], m[1][0]));
        quadratic_roots(tr, det, zt, out);
        return;
    }
    if (k == 3) {
        // try simple candidate roots, then deflate to a quadratic via the
        // invariants c1, c2, c3
        auto cs = char_invariants(m);
        const Expr& c1 = cs[0];
        const Expr& c2 = cs[1];
        const Expr& c3 = cs[2]; // det
        std::vector<Expr> candidates = {zero(), m[0][0], m[1][1], m[2][2]};
        for (const Expr& cand : candidates) {
            // p(l) = l^3 - c1 l^2 + c2 l - c3
            Expr val = add({pow(cand, 3), neg(mul(c1, pow(cand, 2))), mul(c2, cand), neg(c3)});
            if (zt.test(val).verdict == ZeroVerdict::NonZero) continue;
            Expr t2 = sub(c1, cand);                  // remaining trace
            Expr d2 = sub(c2, mul(cand, t2));          // remaining det
            // verify the deflation is exact: c3 == cand * d2 when cand != 0;
            // for cand == 0, d2 must equal c2 and c3 must vanish
            Expr rem = sub(c3, mul(cand, d2));
            if (zt.test(rem).verdict == ZeroVerdict::NonZero) continue;
            out.roots.push_back(cand);
            quadratic_roots(t2, d2, zt, out);
            return;
        }
        out.failed = true;
        out.detail = "no closed-form root of a symbolic cubic block";
        return;
    }
    out.failed = true;
    out.detail = "symbolic block of size " + std::to_string(k) + " not supported";
}

// --- eigenvalue ordering: rational constants first ascending, then by
// canonical printed form -----------------------------------------------------
bool lambda_less(const Expr& a, const Expr& b) {
    bool an = is_num(a), bn = is_num(b);
    if (an && bn) return a->value < b->value;
    if (an != bn) return an;
    return to_string(a) < to_string(b);
}

// --- nullspace of (Phi - lambda I) ------------------------------------------

struct PivotChoice {
    int row = -1;
    bool rational = false;
    std::size_t size = 0;
};

std::vector<Expr> nullspace_vector(const Mat& phi, const Expr& lambda, const ZeroTester& zt,
                                   int n) {
    Mat m(static_cast<std::size_t>(n), std::vector<Expr>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                i == j ? sub(phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], lambda)
                       : phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

    std::vector<int> pivot_row_of_col(static_cast<std::size_t>(n), -1);
    std::vector<bool> row_used(static_cast<std::size_t>(n), false);
    for (int c = 0; c < n; ++c) {
        PivotChoice best;
        for (int r = 0; r < n; ++r) {
            if (row_used[static_cast<std::size_t>(r)]) continue;
            const Expr& e = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (zt.is_zero(e)) continue;
            PivotChoice cand{r, is_num(e), expr_size(e)};
            if (best.row < 0 || (cand.rational && !best.rational) ||
                (cand.rational == best.rational && cand.size < best.size))
                best = cand;
        }
        if (best.row < 0) continue; // free column
        int pr = best.row;
        row_used[static_cast<std::size_t>(pr)] = true;
        pivot_row_of_col[static_cast<std::size_t>(c)] = pr;
        for (int r = 0; r < n; ++r) {
            if (r == pr) continue;
            const Expr& head = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (zt.is_zero(head)) {
                m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = zero();
                continue;
            }
            Expr factor = div(head, m[static_cast<std::size_t>(pr)][static_cast<std::size_t>(c)]);
            for (int cc = 0; cc < n; ++cc) {
                m[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)] = sub(
                    m[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)],
                    mul(factor, m[static_cast<std::size_t>(pr)][static_cast<std::size_t>(cc)]));
            }
            m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = zero();
        }
    }

    int free_col = -1;
    for (int c = 0; c < n; ++c)
        if (pivot_row_of_col[static_cast<std::size_t>(c)] < 0) {
            free_col = c;
            break;
        }
    if (free_col < 0) throw ExprError("eigenvalue " + to_string(lambda) + " has trivial nullspace");

    std::vector<Expr> v(static_cast<std::size_t>(n), zero());
    v[static_cast<std::size_t>(free_col)] = one();
    for (int c = 0; c < n; ++c) {
        int pr = pivot_row_of_col[static_cast<std::size_t>(c)];
        if (pr < 0) continue;
        // pivot row: m[pr][c] v_c + sum over free columns = 0
        std::vector<Expr> rhs;
        for (int cc = 0; cc < n; ++cc) {
            if (cc == c) continue;
            if (pivot_row_of_col[static_cast<std::size_t>(cc)] >= 0) continue;
            rhs.push_back(mul(m[static_cast<std::size_t>(pr)][static_cast<std::size_t>(cc)],
                              v[static_cast<std::size_t>(cc)]));
        }
        v[static_cast<std::size_t>(c)] =
            neg(div(add(std::move(rhs)), m[static_cast<std::size_t>(pr)][static_cast<std::size_t>(c)]));
    }
    return v;
}

// --- normalization: clear denominators, divide rational content, fix sign ---

Expr denominator_part(const Expr& e);

Expr denominator_of_product(const Expr& e) {
    std::vector<Expr> parts;
    auto handle_factor = [&](const Expr& f) {
        if (f->kind == Kind::Pow && f->value < 0) parts.push_back(pow(f->kids[0], Rat(-f->value)));
    };
    if (e->kind == Kind::Mul)
        for (const auto& k : e->kids) handle_factor(k);
    else
        handle_factor(e);
    return parts.empty() ? one() : mul(std::move(parts));
}

Expr denominator_part(const Expr& e) {
    if (e->kind == Kind::Add) {
        // least common denominator over terms: product of bases at max power
        std::vector<std::pair<Expr, Rat>> bases;
        for (const auto& term : e->kids) {
            Expr d = denominator_of_product(term);
            std::vector<Expr> fs = d->kind == Kind::Mul ? d->kids : std::vector<Expr>{d};
            for (const auto& f : fs) {
                if (is_one(f)) continue;
                Expr base = f->kind == Kind::Pow ? f->kids[0] : f;
                Rat ex = f->kind == Kind::Pow ? f->value : Rat(1);
                bool merged = false;
                for (auto& [b, x] : bases)
                    if (equal(b, base)) {
                        x = std::max(x, ex);
                        merged = true;
                    }
                if (!merged) bases.push_back({base, ex});
            }
        }
        std::vector<Expr> fs;
        for (const auto& [b, x] : bases) fs.push_back(pow(b, x));
        return fs.empty() ? one() : mul(std::move(fs));
    }
    return denominator_of_product(e);
}

Rat rational_content(const Expr& e) {
    switch (e->kind) {
    case Kind::Num:
        return e->value;
    case Kind::Mul:
        if (e->kids[0]->kind == Kind::Num) return e->kids[0]->value;
        return Rat(1);
    case Kind::Add: {
        Rat g = 0;
        for (const auto& k : e->kids) g = rat_gcd(g, rational_content(k));
        return g;
    }
    default:
        return Rat(1);
    }
}

Rat leading_sign_coeff(const Expr& e) {
    switch (e->kind) {
    case Kind::Num:
        return e->value;
    case Kind::Mul:
        if (e->kids[0]->kind == Kind::Num) return e->kids[0]->value;
        return Rat(1);
    case Kind::Add:
        return leading_sign_coeff(e->kids[0]);
    default:
        return Rat(1);
    }
}

void normalize_vector(std::vector<Expr>& v) {
    for (int guard = 0; guard < 12; ++guard) {
        Expr d = one();
        for (const auto& e : v) {
            Expr de = denominator_part(e);
            if (!is_one(de)) {
                d = de;
                break;
            }
        }
        if (is_one(d)) break;
        for (auto& e : v) e = mul(e, d);
    }
    Rat g = 0;
    for (const auto& e : v)
        if (!is_zero(e)) g = rat_gcd(g, rational_content(e));
    if (g != 0 && g != 1)
        for (auto& e : v) e = mul(e, make_num(Rat(1 / g)));
    for (const auto& e : v) {
        if (is_zero(e)) continue;
        if (leading_sign_coeff(e) < 0)
            for (auto& x : v) x = neg(x);
        break;
    }
}

} // namespace

std::vector<std::vector<Expr>> dual_coframe(const std::vector<std::vector<Expr>>& vectors,
                                            const ZeroTester& zt) {
    std::size_t n = vectors.size();
    // phi = (X^T)^{-1} = adj(X^T)/det(X^T); det via cofactor expansion (n<=4)
    std::function<Expr(const Mat&)> det = [&](const Mat& m) -> Expr {
        std::size_t k = m.size();
        if (k == 1) return m[0][0];
        std::vector<Expr> terms;
        for (std::size_t j = 0; j < k; ++j) {
            Mat minor(k - 1, std::vector<Expr>(k - 1));
            for (std::size_t r = 1; r < k; ++r) {
                std::size_t cc = 0;
                for (std::size_t c = 0; c < k; ++c) {
                    if (c == j) continue;
                    minor[r - 1][cc++] = m[r][c];
                }
            }
            Expr t = mul(m[0][j], det(minor));
            terms.push_back(j % 2 == 0 ? t : neg(t));
        }
        return add(std::move(terms));
    };

    Mat xt(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) xt[i][j] = vectors[j][i];

    Expr D = det(xt);
    if (zt.is_zero(D)) throw ExprError("degenerate eigenbasis: det = " + to_string(D));

    Mat out(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // adj(X^T)_{ij} = cofactor_{ji}(X^T)
            Mat minor(n - 1, std::vector<Expr>(n - 1));
            std::size_t rr = 0;
            for (std::size_t r = 0; r < n; ++r) {
                if (r == j) continue;
                std::size_t cc = 0;
                for (std::size_t c = 0; c < n; ++c) {
                    if (c == i) continue;
                    minor[rr][cc++] = xt[r][c];
                }
                ++rr;
            }
            Expr cof = n == 1 ? one() : det(minor);
            if ((i + j) % 2 == 1) cof = neg(cof);
            out[i][j] = div(cof, D);
        }
    }
    return out;
}

std::vector<std::vector<Expr>> tau_gamma_matrix(const Sode& s, const GeometryData& g,
                                                const std::vector<std::vector<Expr>>& vectors,
                                                const std::vector<std::vector<Expr>>& coframe) {
    std::size_t n = static_cast<std::size_t>(s.n);
    Mat tg(n, std::vector<Expr>(n));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            std::vector<Expr> terms;
            for (std::size_t c = 0; c < n; ++c) {
                std::vector<Expr> inner;
                inner.push_back(gamma_apply(s, vectors[b][c]));
                for (std::size_t e = 0; e < n; ++e)
                    inner.push_back(mul(vectors[b][e], g.conn[c][e]));
                terms.push_back(mul(coframe[a][c], add(std::move(inner))));
            }
            tg[a][b] = add(std::move(terms));
        }
    }
    return tg;
}

namespace {

// least squares fit of sum_i p_i basis_i(x) = target(x) over sampled points;
// rounds to the nearest multiple of `grid` and verifies symbolically
std::optional<std::vector<Rat>> fit_exponents(const std::vector<Expr>& basis, const Expr& target,
                                              const ZeroTester& zt,
                                              const std::vector<Rat>& grids) {
    std::vector<std::string> syms;
    for (const auto& b : basis) collect_symbols(b, syms);
    collect_symbols(target, syms);
    std::sort(syms.begin(), syms.end());
    syms.erase(std::unique(syms.begin(), syms.end()), syms.end());

    std::size_t k = basis.size();
    std::size_t m = 2 * k + 6;
    Sampler sampler(syms, zt.domain, zt.seed + 99);
    std::vector<std::vector<double>> A;
    std::vector<double> y;
    int attempts = 0;
    while (A.size() < m && attempts < static_cast<int>(m) * 8) {
        ++attempts;
        auto row = sampler.draw();
        Point p = sampler.as_point(row);
        try {
            std::vector<double> arow(k);
            for (std::size_t i = 0; i < k; ++i) arow[i] = eval_point(basis[i], p);
            double t = eval_point(target, p);
            A.push_back(std::move(arow));
            y.push_back(t);
        } catch (const EvalError&) {
            continue;
        }
    }
    if (A.size() < k + 2) return std::nullopt;

    // normal equations, plain Gaussian elimination with partial pivoting
    std::vector<std::vector<double>> N(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t r = 0; r < A.size(); ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) N[i][j] += A[r][i] * A[r][j];
            N[i][k] += A[r][i] * y[r];
        }
    }
    for (std::size_t i = 0; i < k; ++i) N[i][i] += 1e-12;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (std::fabs(N[r][c]) > std::fabs(N[piv][c])) piv = r;
        std::swap(N[c], N[piv]);
        if (std::fabs(N[c][c]) < 1e-14) return std::nullopt;
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c) continue;
            double f = N[r][c] / N[c][c];
            for (std::size_t j = c; j <= k; ++j) N[r][j] -= f * N[c][j];
        }
    }
    std::vector<Rat> p(k);
    for (std::size_t i = 0; i < k; ++i) {
        double v = N[i][k] / N[i][i];
        // snap to the exponent grid
        double g = to_double(grids[i]);
        double snapped = std::round(v / g) * g;
        if (std::fabs(snapped - v) > 1e-5) return std::nullopt;
        if (std::fabs(snapped) > 2.0 + 1e-9) return std::nullopt;
        long long q = static_cast<long long>(std::llround(snapped / g));
        p[i] = grids[i] * q;
    }
    return p;
}

} // namespace

EigenSystem rescale_eigenvectors(const EigenSystem& es_in, const Sode& s, const GeometryData& g,
                                 const ZeroTester& zt) {
    EigenSystem es = es_in;
    es.rescale_ok.assign(static_cast<std::size_t>(es.n), false);
    Mat tg = tau_gamma_matrix(s, g, es.vectors, es.coframe);

    bool offdiag_zero = true;
    for (int a = 0; a < es.n && offdiag_zero; ++a)
        for (int b = 0; b < es.n && offdiag_zero; ++b)
            if (a != b && !zt.is_zero(tg[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]))
                offdiag_zero = false;
    es.rescaled_offdiag = offdiag_zero;
    if (!offdiag_zero) {
        es.rescaled_diag = false;
        return es;
    }

    bool all_ok = true;
    for (int a = 0; a < es.n; ++a) {
        Expr tau = tg[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)];
        if (zt.is_zero(tau)) {
            es.rescale_ok[static_cast<std::size_t>(a)] = true;
            continue;
        }
        // sigma = prod s_i^{p_i}  with  sum p_i Gamma(s_i)/s_i = -tau
        std::vector<Expr> cand;
        std::vector<Rat> grid;
        cand.push_back(make_sym("t"));
        grid.push_back(Rat(1, 4)); // t admits quarter powers
        for (int b = 0; b < s.n; ++b) {
            cand.push_back(make_sym(s.coord(b)));
            grid.push_back(Rat(1, 2));
            cand.push_back(make_sym(s.velocity(b)));
            grid.push_back(Rat(1, 2));
        }
        const Expr& lam = es.lambdas[static_cast<std::size_t>(a)];
        if (!is_num(lam) && !zt.is_zero(lam)) {
            cand.push_back(lam);
            grid.push_back(Rat(1, 4));
        }
        std::vector<Expr> basis;
        for (const auto& c : cand) basis.push_back(div(gamma_apply(s, c), c));
        auto fit = fit_exponents(basis, neg(tau), zt, grid);
        if (!fit) {
            all_ok = false;
            continue;
        }
        // verify symbolically
        std::vector<Expr> check_terms = {tau};
        std::vector<Expr> sigma_factors;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if ((*fit)[i] == 0) continue;
            check_terms.push_back(mul(make_num((*fit)[i]), basis[i]));
            sigma_factors.push_back(pow(cand[i], (*fit)[i]));
        }
        if (!zt.is_zero(add(std::move(check_terms)))) {
            all_ok = false;
            continue;
        }
        Expr sigma = sigma_factors.empty() ? one() : mul(std::move(sigma_factors));
        for (int b = 0; b < s.n; ++b)
            es.vectors[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                mul(sigma, es.vectors[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
        es.rescale_ok[static_cast<std::size_t>(a)] = true;
    }
    es.coframe = dual_coframe(es.vectors, zt);

    // confirm on the rebuilt frame
    if (all_ok) {
        Mat check = tau_gamma_matrix(s, g, es.vectors, es.coframe);
        for (int a = 0; a < es.n; ++a)
            if (!zt.is_zero(check[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)]))
                all_ok = false;
    }
    es.rescaled_diag = all_ok;
    return es;
}

EigenOutcome eigensystem(const Sode& s, const GeometryData& g, const ZeroTester& zt) {
    EigenOutcome out;
    const int n = s.n;

    std::vector<Expr> lambdas;
    bool complex_found = false, root_failed = false;
    std::string detail;

    if (n > 4) {
        root_failed = true;
        detail = "symbolic path limited to n <= 4";
    } else {
        auto blocks = phi_blocks(g.phi, zt, n);
        RootAccum acc;
        for (const auto& blk : blocks) {
            block_roots(g.phi, blk, zt, acc);
            if (acc.failed || acc.complex_found) break;
        }
        complex_found = acc.complex_found;
        root_failed = acc.failed;
        detail = acc.detail;
        if (!root_failed && !complex_found) lambdas = acc.roots;
    }

    if (complex_found) {
        out.status = EigenStatus::Complex;
        out.detail = detail;
        return out;
    }

    if (root_failed || static_cast<int>(lambdas.size()) != n) {
        if (!s.user_eigen.lambdas.empty()) {
            // residual-validate the user-supplied eigendata
            const auto& ue = s.user_eigen;
            if (static_cast<int>(ue.lambdas.size()) != n ||
                static_cast<int>(ue.vectors.size()) != n) {
                out.status = EigenStatus::RootFailure;
                out.detail = "user eigendata has wrong shape";
                return out;
            }
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    std::vector<Expr> terms;
                    for (int c = 0; c < n; ++c)
                        terms.push_back(mul(g.phi[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)],
                                            ue.vectors[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)]));
                    terms.push_back(neg(mul(ue.lambdas[static_cast<std::size_t>(a)],
                                            ue.vectors[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)])));
                    if (!zt.is_zero(add(std::move(terms)))) {
                        out.status = EigenStatus::RootFailure;
                        out.detail = "user eigendata fails the eigen-residual test";
                        return out;
                    }
                }
            EigenSystem es;
            es.n = n;
            es.lambdas = ue.lambdas;
            es.vectors = ue.vectors;
            es.coframe = dual_coframe(es.vectors, zt);
            es.real_distinct = true;
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    if (zt.is_zero(sub(es.lambdas[static_cast<std::size_t>(a)],
                                       es.lambdas[static_cast<std::size_t>(b)])))
                        es.real_distinct = false;
            if (!es.real_distinct) {
                out.status = EigenStatus::Repeated;
                out.lambdas_found = es.lambdas;
                return out;
            }
            out.status = EigenStatus::Ok;
            out.es = std::move(es);
            out.detail = "user-supplied eigendata (validated)";
            return out;
        }
        out.status = EigenStatus::RootFailure;
        out.detail = detail.empty() ? "root extraction failed" : detail;
        return out;
    }

    out.lambdas_found = lambdas;

    // multiplicity structure
    std::vector<int> mult(lambdas.size(), 1);
    bool any_repeat = false;
    for (std::size_t a = 0; a < lambdas.size(); ++a)
        for (std::size_t b = a + 1; b < lambdas.size(); ++b)
            if (zt.is_zero(sub(lambdas[a], lambdas[b]))) {
                any_repeat = true;
                ++mult[a];
            }
    if (any_repeat) {
        // distinguish diagonalisable (case C) from deficient (case D) by the
        // numeric rank of (Phi - lambda I) at sample points
        for (std::size_t a = 0; a < lambdas.size(); ++a) {
            if (mult[a] == 1) continue;
            int multiplicity = 0;
            for (std::size_t b = 0; b < lambdas.size(); ++b)
                if (zt.is_zero(sub(lambdas[a], lambdas[b]))) ++multiplicity;
            // sample rank
            std::vector<std::string> syms = s.all_symbols();
            Sampler sampler(syms, zt.domain, zt.seed + 7);
            auto row = sampler.draw();
            Point p = sampler.as_point(row);
            std::vector<std::vector<double>> md(static_cast<std::size_t>(n),
                                                std::vector<double>(static_cast<std::size_t>(n)));
            bool ok = true;
            for (int i = 0; i < n && ok; ++i)
                for (int j = 0; j < n && ok; ++j) {
                    try {
                        double v = eval_point(g.phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], p);
                        if (i == j) v -= eval_point(lambdas[a], p);
                        md[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
                    } catch (const EvalError&) {
                        ok = false;
                    }
                }
            int rank = 0;
            if (ok) {
                // Gaussian elimination rank with tolerance
                auto m2 = md;
                for (int c = 0; c < n; ++c) {
                    int piv = -1;
                    double best = 1e-9;
                    for (int r = rank; r < n; ++r)
                        if (std::fabs(m2[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) > best) {
                            best = std::fabs(m2[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
                            piv = r;
                        }
                    if (piv < 0) continue;
                    std::swap(m2[static_cast<std::size_t>(piv)], m2[static_cast<std::size_t>(rank)]);
                    for (int r = 0; r < n; ++r) {
                        if (r == rank) continue;
                        double f = m2[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] /
                                   m2[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)];
                        for (int cc = 0; cc < n; ++cc)
                            m2[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)] -=
                                f * m2[static_cast<std::size_t>(rank)][static_cast<std::size_t>(cc)];
                    }
                    ++rank;
                }
            }
            if (ok && n - rank < multiplicity) {
                out.status = EigenStatus::NonDiagonalisable;
                out.detail = "eigenvalue " + to_string(lambdas[a]) + " has deficient eigenspace";
                return out;
            }
        }
        out.status = EigenStatus::Repeated;
        return out;
    }

    // distinct real eigenvalues: canonical order, eigenvectors, coframe
    std::sort(lambdas.begin(), lambdas.end(), lambda_less);
    EigenSystem es;
    es.n = n;
    es.lambdas = lambdas;
    es.vectors.resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        auto v = nullspace_vector(g.phi, lambdas[static_cast<std::size_t>(a)], zt, n);
        normalize_vector(v);
        es.vectors[static_cast<std::size_t>(a)] = std::move(v);
    }
    es.coframe = dual_coframe(es.vectors, zt);
    es.real_distinct = true;
    out.status = EigenStatus::Ok;
    out.es = std::move(es);
    return out;
}

} // namespace varinv
