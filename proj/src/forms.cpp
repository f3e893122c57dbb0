#include "varinv/forms.hpp"

#include <algorithm>
#include <sstream>

namespace varinv {

std::string CoBasis::name(int id) const {
    if (id == 0) return "dt";
    if (is_V(id)) return "phi" + std::to_string(index_of(id) + 1) + "V";
    return "phi" + std::to_string(index_of(id) + 1) + "H";
}

AdaptedForm AdaptedForm::function(const Expr& f) {
    AdaptedForm w{0, {}};
    if (!is_zero(f)) w.coeff[{}] = f;
    return w;
}

AdaptedForm AdaptedForm::basis1(int id, const Expr& c) {
    AdaptedForm w{1, {}};
    if (!is_zero(c)) w.coeff[{id}] = c;
    return w;
}

bool AdaptedForm::is_zero_syntactic() const { return coeff.empty(); }

AdaptedForm& AdaptedForm::accumulate(std::vector<int> idx, const Expr& c) {
    if (is_zero(c)) return *this;
    // sort with sign; repeated ids annihilate
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i)
        for (std::size_t j = i; j > 0 && idx[j] < idx[j - 1]; --j) {
            std::swap(idx[j], idx[j - 1]);
            sign = -sign;
        }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return *this;
    Expr cc = sign > 0 ? c : neg(c);
    auto it = coeff.find(idx);
    if (it == coeff.end()) {
        coeff.emplace(std::move(idx), cc);
    } else {
        it->second = add(it->second, cc);
        if (is_zero(it->second)) coeff.erase(it);
    }
    return *this;
}

AdaptedForm operator+(const AdaptedForm& a, const AdaptedForm& b) {
    AdaptedForm out = a;
    for (const auto& [k, v] : b.coeff) out.accumulate(k, v);
    return out;
}

AdaptedForm operator-(const AdaptedForm& a, const AdaptedForm& b) {
    AdaptedForm out = a;
    for (const auto& [k, v] : b.coeff) out.accumulate(k, neg(v));
    return out;
}

AdaptedForm scale(const Expr& f, const AdaptedForm& a) {
    AdaptedForm out{a.degree, {}};
    if (is_zero(f)) return out;
    for (const auto& [k, v] : a.coeff) out.accumulate(k, mul(f, v));
    return out;
}

AdaptedForm wedge(const AdaptedForm& a, const AdaptedForm& b) {
    int deg = a.degree + b.degree;
    if (deg > 3)
        throw DegreeOverflow("wedge would exceed degree 3 (got " + std::to_string(deg) + ")");
    AdaptedForm out{deg, {}};
    for (const auto& [ka, va] : a.coeff)
        for (const auto& [kb, vb] : b.coeff) {
            std::vector<int> idx = ka;
            idx.insert(idx.end(), kb.begin(), kb.end());
            out.accumulate(std::move(idx), mul(va, vb));
        }
    return out;
}

AdaptedForm FrameContext::d_function(const Expr& f) const {
    CoBasis cb = basis();
    AdaptedForm out{1, {}};
    out.accumulate({cb.T()}, gamma_apply(s, f));
    for (int b = 0; b < s.n; ++b) {
        std::vector<Expr> tv, th;
        for (int e = 0; e < s.n; ++e) {
            tv.push_back(mul(es.vectors[std::size_t(b)][std::size_t(e)],
                             differentiate(f, s.velocity(e))));
            th.push_back(mul(es.vectors[std::size_t(b)][std::size_t(e)],
                             horizontal_apply(s, g, e, f)));
        }
        out.accumulate({cb.V(b)}, add(std::move(tv)));
        out.accumulate({cb.H(b)}, add(std::move(th)));
    }
    return out;
}

AdaptedForm FrameContext::d_basis(int id) const {
    CoBasis cb = basis();
    AdaptedForm out{2, {}};
    if (id == cb.T()) return out; // d(dt) = 0
    int a = cb.index_of(id);
    if (cb.is_V(id)) {
        // d phi^{aV} = -tau^{aG}_b dt^phi^{bV} - lambda_a dt^phi^{aH}
        //              + tau^{aH}_{cb} phi^{bV}^phi^{cH}
        //              + tau^{aV}_{cb} phi^{bV}^phi^{cV}
        //              - 1/2 rho^a_{bc} phi^{bH}^phi^{cH}
        for (int b = 0; b < s.n; ++b) {
            out.accumulate({cb.T(), cb.V(b)}, neg(tt.G(a, b)));
            for (int c = 0; c < s.n; ++c) {
                out.accumulate({cb.V(b), cb.H(c)}, tt.H(a, c, b));
                out.accumulate({cb.V(b), cb.V(c)}, tt.V(a, c, b));
                out.accumulate({cb.H(b), cb.H(c)}, mul(make_num(Rat(-1, 2)), tt.R(a, b, c)));
            }
        }
        out.accumulate({cb.T(), cb.H(a)}, neg(es.lambdas[std::size_t(a)]));
        return out;
    }
    // d phi^{aH} = dt^phi^{aV} - tau^{aG}_b dt^phi^{bH}
    //              + tau^{aH}_{cb} phi^{bH}^phi^{cH} - tau^{aV}_{bc} phi^{bV}^phi^{cH}
    out.accumulate({cb.T(), cb.V(a)}, one());
    for (int b = 0; b < s.n; ++b) {
        out.accumulate({cb.T(), cb.H(b)}, neg(tt.G(a, b)));
        for (int c = 0; c < s.n; ++c) {
            out.accumulate({cb.H(b), cb.H(c)}, tt.H(a, c, b));
            out.accumulate({cb.V(b), cb.H(c)}, neg(tt.V(a, b, c)));
        }
    }
    return out;
}

AdaptedForm exterior_derivative(const AdaptedForm& w, const FrameContext& fc) {
    if (w.degree > 2) throw DegreeOverflow("exterior derivative input must have degree <= 2");
    AdaptedForm out{w.degree + 1, {}};
    for (const auto& [idx, f] : w.coeff) {
        // d(f) ^ basis(idx)
        AdaptedForm df = fc.d_function(f);
        for (const auto& [k1, c1] : df.coeff) {
            std::vector<int> key = k1;
            key.insert(key.end(), idx.begin(), idx.end());
            out.accumulate(std::move(key), c1);
        }
        // f * sum_i (-1)^i basis[0..i) ^ d(basis[i]) ^ basis(i..]
        for (std::size_t i = 0; i < idx.size(); ++i) {
            AdaptedForm db = fc.d_basis(idx[i]);
            int sign = (i % 2 == 0) ? 1 : -1;
            for (const auto& [k2, c2] : db.coeff) {
                std::vector<int> key;
                key.insert(key.end(), idx.begin(), idx.begin() + static_cast<long>(i));
                key.insert(key.end(), k2.begin(), k2.end());
                key.insert(key.end(), idx.begin() + static_cast<long>(i) + 1, idx.end());
                Expr c = mul(f, c2);
                out.accumulate(std::move(key), sign > 0 ? c : neg(c));
            }
        }
    }
    return out;
}

DivisibilityResult divisibility_test(const AdaptedForm& w, const AdaptedForm& alpha,
                                     const FrameContext& fc, const ZeroTester& zt) {
    (void)fc;
    if (alpha.is_zero_syntactic())
        return {Divisibility::Indeterminate, std::nullopt, "divisor form is zero"};
    AdaptedForm prod = wedge(w, alpha);
    std::vector<Expr> coeffs;
    coeffs.reserve(prod.coeff.size());
    for (const auto& [k, v] : prod.coeff) coeffs.push_back(v);
    if (coeffs.empty()) return {Divisibility::Divisible, std::nullopt, "w ^ alpha = 0 exactly"};
    bool exact = true;
    try {
        auto results = zt.test_many(coeffs);
        std::size_t i = 0;
        for (const auto& [k, v] : prod.coeff) {
            const auto& r = results[i++];
            if (r.verdict == ZeroVerdict::NonZero) {
                std::ostringstream os;
                os << "w ^ alpha has nonzero coefficient " << to_string(v);
                return {Divisibility::NotDivisible, r.witness, os.str()};
            }
            if (r.verdict == ZeroVerdict::NumericallyZero) exact = false;
        }
    } catch (const IndeterminateError& e) {
        return {Divisibility::Indeterminate, std::nullopt, e.what()};
    }
    return {exact ? Divisibility::Divisible : Divisibility::DivisibleNumeric, std::nullopt,
            exact ? "w ^ alpha = 0 exactly" : "w ^ alpha = 0 numerically"};
}

std::string to_string(const AdaptedForm& w, const CoBasis& basis) {
    if (w.coeff.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : w.coeff) {
        if (!first) os << " + ";
        first = false;
        os << "(" << to_string(v) << ")";
        for (int id : k) os << "^" << basis.name(id);
    }
    return os.str();
}

} // namespace varinv
