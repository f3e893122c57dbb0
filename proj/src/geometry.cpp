#include "varinv/geometry.hpp"

namespace varinv {

Expr gamma_apply(const Sode& s, const Expr& f) {
    std::vector<Expr> terms;
    terms.push_back(differentiate(f, "t"));
    for (int a = 0; a < s.n; ++a) {
        terms.push_back(mul(make_sym(s.velocity(a)), differentiate(f, s.coord(a))));
        terms.push_back(mul(s.force(a), differentiate(f, s.velocity(a))));
    }
    return add(std::move(terms));
}

Expr vertical_apply(const Sode& s, int a, const Expr& f) {
    return differentiate(f, s.velocity(a));
}

Expr horizontal_apply(const Sode& s, const GeometryData& g, int a, const Expr& f) {
    std::vector<Expr> terms;
    terms.push_back(differentiate(f, s.coord(a)));
    for (int b = 0; b < s.n; ++b)
        terms.push_back(neg(mul(g.conn[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)],
                                differentiate(f, s.velocity(b)))));
    return add(std::move(terms));
}

std::vector<std::vector<Expr>> connection_coefficients(const Sode& s) {
    std::vector<std::vector<Expr>> conn(static_cast<std::size_t>(s.n),
                                        std::vector<Expr>(static_cast<std::size_t>(s.n)));
    for (int a = 0; a < s.n; ++a)
        for (int b = 0; b < s.n; ++b)
            conn[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                mul(make_num(Rat(-1, 2)), differentiate(s.force(a), s.velocity(b)));
    return conn;
}

std::vector<std::vector<Expr>> jacobi_endomorphism(const Sode& s,
                                                   const std::vector<std::vector<Expr>>& conn) {
    auto at = [&](int a, int b) -> const Expr& {
        return conn[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    };
    std::vector<std::vector<Expr>> phi(static_cast<std::size_t>(s.n),
                                       std::vector<Expr>(static_cast<std::size_t>(s.n)));
    for (int a = 0; a < s.n; ++a) {
        for (int b = 0; b < s.n; ++b) {
            std::vector<Expr> terms;
            terms.push_back(neg(differentiate(s.force(a), s.coord(b))));
            for (int c = 0; c < s.n; ++c) terms.push_back(neg(mul(at(c, b), at(a, c))));
            terms.push_back(neg(gamma_apply(s, at(a, b))));
            phi[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = add(std::move(terms));
        }
    }
    return phi;
}

std::vector<std::vector<std::vector<Expr>>> curvature_tensor(const Sode& s) {
    auto d2 = [&](int d, const std::string& s1, const std::string& s2) {
        return differentiate(differentiate(s.force(d), s1), s2);
    };
    std::vector<std::vector<std::vector<Expr>>> R(
        static_cast<std::size_t>(s.n),
        std::vector<std::vector<Expr>>(static_cast<std::size_t>(s.n),
                                       std::vector<Expr>(static_cast<std::size_t>(s.n))));
    for (int d = 0; d < s.n; ++d) {
        for (int a = 0; a < s.n; ++a) {
            for (int b = 0; b < s.n; ++b) {
                std::vector<Expr> terms;
                terms.push_back(d2(d, s.coord(a), s.velocity(b)));
                terms.push_back(neg(d2(d, s.coord(b), s.velocity(a))));
                std::vector<Expr> inner;
                for (int c = 0; c < s.n; ++c) {
                    inner.push_back(mul(differentiate(s.force(c), s.velocity(a)),
                                        d2(d, s.velocity(c), s.velocity(b))));
                    inner.push_back(neg(mul(differentiate(s.force(c), s.velocity(b)),
                                            d2(d, s.velocity(c), s.velocity(a)))));
                }
                terms.push_back(mul(make_num(Rat(1, 2)), add(std::move(inner))));
                R[static_cast<std::size_t>(d)][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                    mul(make_num(Rat(1, 2)), add(std::move(terms)));
            }
        }
    }
    return R;
}

GeometryData build_geometry(const Sode& s) {
    GeometryData g;
    g.conn = connection_coefficients(s);
    g.phi = jacobi_endomorphism(s, g.conn);
    g.curv = curvature_tensor(s);
    return g;
}

} // namespace varinv
