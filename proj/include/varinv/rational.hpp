#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>

namespace varinv {

// Exact rational constants. Arbitrary precision so that repeated
// normal-form arithmetic never overflows.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.template convert_to<double>(); }

inline Int num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline bool is_integer(const Rat& r) { return den(r) == 1; }

// gcd on rationals: gcd(a/b, c/d) = gcd(a,c)/lcm(b,d). Used to extract the
// rational content of vectors and polynomials.
inline Rat rat_gcd(const Rat& a, const Rat& b) {
    if (a == 0) return b < 0 ? Rat(-b) : b;
    if (b == 0) return a < 0 ? Rat(-a) : a;
    Int na = num(a) < 0 ? Int(-num(a)) : num(a);
    Int nb = num(b) < 0 ? Int(-num(b)) : num(b);
    Int g = boost::multiprecision::gcd(na, nb);
    Int l = boost::multiprecision::lcm(den(a), den(b));
    return Rat(g, l);
}

// Exact k-th root if it exists (k >= 1, v >= 0 for even k).
inline std::optional<Int> exact_root(const Int& v, unsigned k) {
    if (k == 1) return v;
    if (v < 0) return std::nullopt;
    if (v == 0 || v == 1) return v;
    Int lo = 0, hi = v;
    while (lo < hi) {
        Int mid = (lo + hi + 1) / 2;
        Int p = 1;
        bool over = false;
        for (unsigned i = 0; i < k; ++i) {
            p *= mid;
            if (p > v) { over = true; break; }
        }
        if (over) hi = mid - 1; else lo = mid;
    }
    Int p = 1;
    for (unsigned i = 0; i < k; ++i) p *= lo;
    if (p == v) return lo;
    return std::nullopt;
}

inline std::string rat_to_string(const Rat& r) {
    std::string s = num(r).str();
    if (!is_integer(r)) s += "/" + den(r).str();
    return s;
}

} // namespace varinv
