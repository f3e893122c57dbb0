#include "varinv/tau.hpp"

#include <algorithm>
#include <cmath>

namespace varinv {

TauTable compute_tau_table(const Sode& s, const GeometryData& g, const EigenSystem& es) {
    const std::size_t n = static_cast<std::size_t>(s.n);
    TauTable tt;
    tt.n = s.n;
    tt.tau_G = tau_gamma_matrix(s, g, es.vectors, es.coframe);
    tt.tau_V.assign(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
    tt.tau_H.assign(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
    tt.rho.assign(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));

    const auto& X = es.vectors;
    const auto& ph = es.coframe;

    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t c = 0; c < n; ++c) {
                std::vector<Expr> tv, th, tr;
                for (std::size_t d = 0; d < n; ++d) {
                    // tau^{aV}_{bc} = phi^a_d X_b^e dX_c^d/du^e
                    std::vector<Expr> inner;
                    for (std::size_t e = 0; e < n; ++e)
                        inner.push_back(
                            mul(X[b][e], differentiate(X[c][d], s.velocity(static_cast<int>(e)))));
                    tv.push_back(mul(ph[a][d], add(std::move(inner))));
                }
                for (std::size_t f = 0; f < n; ++f) {
                    // tau^{aH}_{bc} = phi^a_f (X_b^H(X_c^f) + X_b^e X_c^d dconn^f_e/du^d)
                    std::vector<Expr> inner;
                    for (std::size_t e = 0; e < n; ++e) {
                        inner.push_back(mul(X[b][e], horizontal_apply(s, g, static_cast<int>(e),
                                                                      X[c][f])));
                        for (std::size_t d = 0; d < n; ++d)
                            inner.push_back(mul({X[b][e], X[c][d],
                                                 differentiate(g.conn[f][e],
                                                               s.velocity(static_cast<int>(d)))}));
                    }
                    th.push_back(mul(ph[a][f], add(std::move(inner))));
                }
                for (std::size_t d = 0; d < n; ++d) {
                    // rho^a_{bc} = phi^a_d R^d_{ef} X_b^e X_c^f
                    for (std::size_t e = 0; e < n; ++e)
                        for (std::size_t f = 0; f < n; ++f)
                            tr.push_back(mul({ph[a][d], g.curv[d][e][f], X[b][e], X[c][f]}));
                }
                tt.tau_V[a][b][c] = add(std::move(tv));
                tt.tau_H[a][b][c] = add(std::move(th));
                tt.rho[a][b][c] = add(std::move(tr));
            }
        }
    }
    return tt;
}

namespace {

struct IdentityBuilder {
    const Sode& s;
    const GeometryData& g;
    const TauTable& tt;
    const EigenSystem& es;

    Expr XV(int b, const Expr& f) const {
        std::vector<Expr> terms;
        for (int e = 0; e < s.n; ++e)
            terms.push_back(mul(es.vectors[std::size_t(b)][std::size_t(e)],
                                differentiate(f, s.velocity(e))));
        return add(std::move(terms));
    }
    Expr XH(int b, const Expr& f) const {
        std::vector<Expr> terms;
        for (int e = 0; e < s.n; ++e)
            terms.push_back(mul(es.vectors[std::size_t(b)][std::size_t(e)],
                                horizontal_apply(s, g, e, f)));
        return add(std::move(terms));
    }
    Expr G(const Expr& f) const { return gamma_apply(s, f); }
    Expr lam(int a) const { return es.lambdas[std::size_t(a)]; }
    Expr delta(int a, int b) const { return a == b ? one() : zero(); }

    // every family returns lhs - rhs
    Expr f1a(int a, int b, int c) const {
        std::vector<Expr> rhs;
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(neg(mul(tt.V(e, b, c), tt.G(a, e))));
            rhs.push_back(neg(mul(tt.G(e, c), tt.V(a, b, e))));
            rhs.push_back(mul(tt.V(a, e, c), tt.G(e, b)));
        }
        rhs.push_back(neg(tt.H(a, b, c)));
        rhs.push_back(XV(b, tt.G(a, c)));
        return sub(G(tt.V(a, b, c)), add(std::move(rhs)));
    }
    Expr f1b(int a, int b, int c) const {
        std::vector<Expr> rhs;
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(neg(mul(tt.H(e, c, b), tt.G(a, e))));
            rhs.push_back(mul(tt.G(e, c), tt.H(a, e, b)));
            rhs.push_back(mul(tt.G(e, b), tt.H(a, c, e)));
        }
        rhs.push_back(neg(XH(c, tt.G(a, b))));
        rhs.push_back(neg(mul(XV(b, lam(c)), delta(a, c))));
        rhs.push_back(mul(lam(c), sub(tt.V(a, c, b), tt.V(a, b, c))));
        rhs.push_back(mul(lam(a), tt.V(a, b, c)));
        rhs.push_back(tt.R(a, b, c));
        return sub(G(tt.H(a, c, b)), add(std::move(rhs)));
    }
    Expr f2a(int a, int b, int c) const {
        std::vector<Expr> rhs;
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(mul(tt.G(e, c), tt.R(a, b, e)));
            rhs.push_back(mul(tt.G(e, b), tt.R(a, e, c)));
            rhs.push_back(neg(mul(tt.G(a, e), tt.R(e, b, c))));
        }
        rhs.push_back(mul(sub(lam(c), lam(a)), tt.H(a, b, c)));
        rhs.push_back(neg(mul(sub(lam(b), lam(a)), tt.H(a, c, b))));
        rhs.push_back(mul(XH(b, lam(c)), delta(a, c)));
        rhs.push_back(neg(mul(XH(c, lam(b)), delta(a, b))));
        return sub(G(tt.R(a, b, c)), add(std::move(rhs)));
    }
    Expr f2b(int a, int b, int c) const {
        std::vector<Expr> rhs;
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(neg(mul(sub(tt.H(e, b, c), tt.H(e, c, b)), tt.G(a, e))));
            rhs.push_back(mul(tt.G(e, c), sub(tt.H(a, b, e), tt.H(a, e, b))));
            rhs.push_back(neg(mul(tt.G(e, b), sub(tt.H(a, c, e), tt.H(a, e, c)))));
        }
        rhs.push_back(neg(mul(lam(c), tt.V(a, c, b))));
        rhs.push_back(mul(lam(b), tt.V(a, b, c)));
        rhs.push_back(XH(c, tt.G(a, b)));
        rhs.push_back(neg(XH(b, tt.G(a, c))));
        rhs.push_back(tt.R(a, b, c));
        return sub(G(sub(tt.H(a, b, c), tt.H(a, c, b))), add(std::move(rhs)));
    }
    Expr frho3(int a, int b, int c) const {
        std::vector<Expr> rhs;
        rhs.push_back(mul(XV(b, lam(c)), delta(a, c)));
        rhs.push_back(neg(mul(XV(c, lam(b)), delta(a, b))));
        rhs.push_back(mul(tt.V(a, b, c), sub(lam(c), lam(a))));
        rhs.push_back(neg(mul(tt.V(a, c, b), sub(lam(b), lam(a)))));
        return sub(mul(make_num(3), tt.R(a, b, c)), add(std::move(rhs)));
    }
    Expr f3a(int a, int b, int c, int d) const {
        std::vector<Expr> rhs;
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(mul(tt.V(e, a, c), tt.V(d, b, e)));
            rhs.push_back(neg(mul(tt.V(e, b, c), tt.V(d, a, e))));
            rhs.push_back(mul(tt.V(d, e, c), sub(tt.V(e, a, b), tt.V(e, b, a))));
        }
        return sub(sub(XV(a, tt.V(d, b, c)), XV(b, tt.V(d, a, c))), add(std::move(rhs)));
    }
    Expr f3b(int a, int b, int c, int d) const {
        std::vector<Expr> rhs;
        rhs.push_back(XH(c, sub(tt.V(d, a, b), tt.V(d, b, a))));
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(neg(mul(tt.V(e, b, c), tt.H(d, e, a))));
            rhs.push_back(mul(tt.V(e, a, c), tt.H(d, e, b)));
            rhs.push_back(mul(tt.H(d, c, e), sub(tt.V(e, a, b), tt.V(e, b, a))));
            rhs.push_back(mul(tt.H(e, c, a), sub(tt.V(d, b, e), tt.V(d, e, b))));
            rhs.push_back(neg(mul(tt.H(e, c, b), sub(tt.V(d, a, e), tt.V(d, e, a)))));
        }
        return sub(sub(XV(a, tt.H(d, c, b)), XV(b, tt.H(d, c, a))), add(std::move(rhs)));
    }
    Expr f4a(int a, int b, int c, int d) const {
        std::vector<Expr> rhs;
        rhs.push_back(XV(b, sub(tt.H(d, a, c), tt.H(d, c, a))));
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(neg(mul(tt.V(e, b, c), sub(tt.H(d, a, e), tt.H(d, e, a)))));
            rhs.push_back(neg(mul(tt.H(e, c, b), tt.V(d, e, a))));
            rhs.push_back(neg(mul(sub(tt.H(e, c, a), tt.H(e, a, c)), tt.V(d, b, e))));
            rhs.push_back(mul(tt.V(e, b, a), sub(tt.H(d, c, e), tt.H(d, e, c))));
            rhs.push_back(mul(tt.H(e, a, b), tt.V(d, e, c)));
        }
        return sub(sub(XH(a, tt.V(d, b, c)), XH(c, tt.V(d, b, a))), add(std::move(rhs)));
    }
    Expr f4b(int a, int b, int c, int d) const {
        std::vector<Expr> rhs;
        rhs.push_back(XV(b, tt.R(d, c, a)));
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(mul(tt.V(e, b, c), tt.R(d, a, e)));
            rhs.push_back(neg(mul(tt.H(e, c, b), tt.H(d, a, e))));
            rhs.push_back(mul(tt.R(e, c, a), sub(tt.V(d, b, e), tt.V(d, e, b))));
            rhs.push_back(mul(tt.H(e, a, b), tt.H(d, c, e)));
            rhs.push_back(neg(mul(tt.H(d, e, b), sub(tt.H(e, c, a), tt.H(e, a, c)))));
            rhs.push_back(neg(mul(tt.V(e, b, a), tt.R(d, c, e))));
        }
        return sub(sub(XH(a, tt.H(d, c, b)), XH(c, tt.H(d, a, b))), add(std::move(rhs)));
    }
    Expr f5(int a, int b, int c, int d) const {
        std::vector<Expr> lhs;
        lhs.push_back(XV(a, sub(tt.V(d, b, c), tt.V(d, c, b))));
        lhs.push_back(XV(b, sub(tt.V(d, c, a), tt.V(d, a, c))));
        lhs.push_back(XV(c, sub(tt.V(d, a, b), tt.V(d, b, a))));
        std::vector<Expr> rhs;
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(neg(mul(sub(tt.V(d, a, e), tt.V(d, e, a)), sub(tt.V(e, b, c), tt.V(e, c, b)))));
            rhs.push_back(neg(mul(sub(tt.V(d, b, e), tt.V(d, e, b)), sub(tt.V(e, c, a), tt.V(e, a, c)))));
            rhs.push_back(neg(mul(sub(tt.V(d, c, e), tt.V(d, e, c)), sub(tt.V(e, a, b), tt.V(e, b, a)))));
        }
        return sub(add(std::move(lhs)), add(std::move(rhs)));
    }
    Expr f6a(int a, int b, int c, int d) const {
        std::vector<Expr> lhs;
        lhs.push_back(XH(a, sub(tt.H(d, b, c), tt.H(d, c, b))));
        lhs.push_back(XH(b, sub(tt.H(d, c, a), tt.H(d, a, c))));
        lhs.push_back(XH(c, sub(tt.H(d, a, b), tt.H(d, b, a))));
        std::vector<Expr> rhs;
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(mul(tt.V(d, e, a), tt.R(e, b, c)));
            rhs.push_back(mul(tt.V(d, e, b), tt.R(e, c, a)));
            rhs.push_back(mul(tt.V(d, e, c), tt.R(e, a, b)));
            rhs.push_back(neg(mul(sub(tt.H(d, a, e), tt.H(d, e, a)), sub(tt.H(e, b, c), tt.H(e, c, b)))));
            rhs.push_back(neg(mul(sub(tt.H(d, b, e), tt.H(d, e, b)), sub(tt.H(e, c, a), tt.H(e, a, c)))));
            rhs.push_back(neg(mul(sub(tt.H(d, c, e), tt.H(d, e, c)), sub(tt.H(e, a, b), tt.H(e, b, a)))));
        }
        return sub(add(std::move(lhs)), add(std::move(rhs)));
    }
    Expr f6b(int a, int b, int c, int d) const {
        std::vector<Expr> lhs;
        lhs.push_back(XH(a, tt.R(d, b, c)));
        lhs.push_back(XH(b, tt.R(d, c, a)));
        lhs.push_back(XH(c, tt.R(d, a, b)));
        std::vector<Expr> rhs;
        for (int e = 0; e < s.n; ++e) {
            rhs.push_back(mul(sub(tt.H(e, c, b), tt.H(e, b, c)), tt.R(d, a, e)));
            rhs.push_back(mul(sub(tt.H(e, a, c), tt.H(e, c, a)), tt.R(d, b, e)));
            rhs.push_back(mul(sub(tt.H(e, b, a), tt.H(e, a, b)), tt.R(d, c, e)));
            rhs.push_back(neg(mul(tt.H(d, a, e), tt.R(e, b, c))));
            rhs.push_back(neg(mul(tt.H(d, b, e), tt.R(e, c, a))));
            rhs.push_back(neg(mul(tt.H(d, c, e), tt.R(e, a, b))));
        }
        return sub(add(std::move(lhs)), add(std::move(rhs)));
    }
};

} // namespace

JacobiReport jacobi_identity_residuals(const Sode& s, const GeometryData& g, const TauTable& tt,
                                       const EigenSystem& es, int points, std::uint64_t seed,
                                       EvalMode mode) {
    IdentityBuilder ib{s, g, tt, es};
    const int n = s.n;

    struct Entry {
        std::string family;
        Expr residual;
    };
    std::vector<Entry> entries;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                entries.push_back({"1a", ib.f1a(a, b, c)});
                entries.push_back({"1b", ib.f1b(a, b, c)});
                entries.push_back({"2a", ib.f2a(a, b, c)});
                entries.push_back({"2b", ib.f2b(a, b, c)});
                entries.push_back({"rho3", ib.frho3(a, b, c)});
                for (int d = 0; d < n; ++d) {
                    entries.push_back({"3a", ib.f3a(a, b, c, d)});
                    entries.push_back({"3b", ib.f3b(a, b, c, d)});
                    entries.push_back({"4a", ib.f4a(a, b, c, d)});
                    entries.push_back({"4b", ib.f4b(a, b, c, d)});
                    entries.push_back({"5", ib.f5(a, b, c, d)});
                    entries.push_back({"6a", ib.f6a(a, b, c, d)});
                    entries.push_back({"6b", ib.f6b(a, b, c, d)});
                }
            }

    std::vector<std::string> syms = s.all_symbols();
    std::sort(syms.begin(), syms.end());
    Sampler ps(syms, s.domain, seed);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < points * 3; ++i) pts.push_back(ps.draw());

    std::vector<CompiledExpr> progs;
    progs.reserve(entries.size());
    for (const auto& e : entries) progs.push_back(compile_expr(e.residual, syms));
    BatchResult br = eval_batch(progs, pts, mode);

    JacobiReport rep;
    for (std::size_t r = 0; r < entries.size(); ++r) {
        int used = 0;
        double worst = 0;
        for (std::size_t c = 0; c < pts.size() && used < points; ++c) {
            if (br.stat(r, c) != kEvalOk) continue;
            ++used;
            double res = std::fabs(br.val(r, c)) / (1.0 + br.mag(r, c));
            worst = std::max(worst, res);
        }
        if (used == 0)
            throw IndeterminateError("identity residual evaluation starved by domain errors");
        auto& slot = rep.family_max[entries[r].family];
        slot = std::max(slot, worst);
        rep.overall_max = std::max(rep.overall_max, worst);
    }
    return rep;
}

} // namespace varinv
