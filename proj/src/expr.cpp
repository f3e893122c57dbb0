#include "varinv/expr.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

namespace varinv {

namespace {

std::size_t hash_combine(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

std::size_t hash_rat(const Rat& r) {
    std::hash<std::string> hs;
    return hs(rat_to_string(r));
}

Expr finish(ExprNode n) {
    std::size_t h = static_cast<std::size_t>(n.kind) * 1099511628211ull;
    h = hash_combine(h, hash_rat(n.value));
    h = hash_combine(h, std::hash<std::string>{}(n.name));
    for (const auto& k : n.kids) h = hash_combine(h, k->hash);
    n.hash = h;
    return std::make_shared<const ExprNode>(std::move(n));
}

int kind_rank(Kind k) { return static_cast<int>(k); }

} // namespace

Expr make_num(const Rat& r) {
    ExprNode n;
    n.kind = Kind::Num;
    n.value = r;
    return finish(std::move(n));
}

Expr make_num(long long v) { return make_num(Rat(v)); }

Expr make_sym(const std::string& name) {
    ExprNode n;
    n.kind = Kind::Sym;
    n.name = name;
    return finish(std::move(n));
}

int compare(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return kind_rank(a->kind) < kind_rank(b->kind) ? -1 : 1;
    switch (a->kind) {
    case Kind::Num:
        if (a->value == b->value) return 0;
        return a->value < b->value ? -1 : 1;
    case Kind::Sym:
        return a->name.compare(b->name) < 0 ? -1 : (a->name == b->name ? 0 : 1);
    case Kind::Pow: {
        int c = compare(a->kids[0], b->kids[0]);
        if (c != 0) return c;
        if (a->value == b->value) return 0;
        return a->value < b->value ? -1 : 1;
    }
    default: {
        if (a->kids.size() != b->kids.size())
            return a->kids.size() < b->kids.size() ? -1 : 1;
        for (std::size_t i = 0; i < a->kids.size(); ++i) {
            int c = compare(a->kids[i], b->kids[i]);
            if (c != 0) return c;
        }
        return 0;
    }
    }
}

bool equal(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return true;
    if (a->hash != b->hash) return false;
    return compare(a, b) == 0;
}

namespace {

// (coefficient, monomial) decomposition of a sum term; monomial == nullptr
// means the term is a plain constant.
struct Term {
    Rat coeff;
    Expr mono;
};

Term term_of(const Expr& e) {
    if (e->kind == Kind::Num) return {e->value, nullptr};
    if (e->kind == Kind::Mul && e->kids[0]->kind == Kind::Num) {
        if (e->kids.size() == 2) return {e->kids[0]->value, e->kids[1]};
        ExprNode n;
        n.kind = Kind::Mul;
        n.kids.assign(e->kids.begin() + 1, e->kids.end());
        return {e->kids[0]->value, finish(std::move(n))};
    }
    return {Rat(1), e};
}

Expr term_to_expr(const Rat& c, const Expr& mono) {
    if (mono == nullptr) return make_num(c);
    if (c == 0) return make_num(0);
    if (c == 1) return mono;
    return mul({make_num(c), mono});
}

// (base, exponent) decomposition of a product factor.
struct Factor {
    Expr base;
    Rat exp;
};

Factor factor_of(const Expr& e) {
    if (e->kind == Kind::Pow) return {e->kids[0], e->value};
    return {e, Rat(1)};
}

} // namespace

Expr add(std::vector<Expr> terms) {
    Rat constant = 0;
    std::vector<Term> collected;
    std::function<void(const Expr&)> absorb = [&](const Expr& t) {
        if (t->kind == Kind::Add) {
            for (const auto& k : t->kids) absorb(k);
            return;
        }
        Term tm = term_of(t);
        if (tm.mono == nullptr) {
            constant += tm.coeff;
            return;
        }
        for (auto& c : collected) {
            if (equal(c.mono, tm.mono)) {
                c.coeff += tm.coeff;
                return;
            }
        }
        collected.push_back(std::move(tm));
    };
    for (const auto& t : terms) absorb(t);

    std::vector<Expr> out;
    for (const auto& c : collected)
        if (c.coeff != 0) out.push_back(term_to_expr(c.coeff, c.mono));
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
    if (constant != 0) out.insert(out.begin(), make_num(constant));
    if (out.empty()) return make_num(0);
    if (out.size() == 1) return out[0];
    ExprNode n;
    n.kind = Kind::Add;
    n.kids = std::move(out);
    return finish(std::move(n));
}

Expr add(const Expr& a, const Expr& b) { return add(std::vector<Expr>{a, b}); }
Expr sub(const Expr& a, const Expr& b) { return add(a, neg(b)); }
Expr neg(const Expr& a) { return mul({make_num(-1), a}); }

namespace {

Expr make_pow_node(const Expr& base, const Rat& exponent) {
    ExprNode n;
    n.kind = Kind::Pow;
    n.value = exponent;
    n.kids = {base};
    return finish(std::move(n));
}

Rat rat_int_pow(const Rat& base, const Int& e_in) {
    Int e = e_in < 0 ? Int(-e_in) : e_in;
    Rat v = 1, b = base;
    while (e > 0) {
        if (e % 2 == 1) v *= b;
        b *= b;
        e /= 2;
    }
    if (e_in < 0) {
        if (v == 0) throw ExprError("division by zero constant");
        v = 1 / v;
    }
    return v;
}

// A power of a constant folds to a rational when the exponent is an integer
// or when the exact root exists; otherwise stays symbolic (e.g. sqrt(2)).
Expr pow_of_num(const Rat& base, const Rat& exponent) {
    if (is_integer(exponent)) return make_num(rat_int_pow(base, num(exponent)));
    if (base == 0) {
        if (exponent < 0) throw ExprError("division by zero constant");
        return make_num(0);
    }
    if (base < 0) throw ExprError("fractional power of negative constant");
    unsigned root = den(exponent).convert_to<unsigned>();
    auto rn = exact_root(num(base), root);
    auto rd = exact_root(den(base), root);
    if (rn && rd) return make_num(rat_int_pow(Rat(*rn, *rd), num(exponent)));
    if (base == 1) return make_num(1);
    return make_pow_node(make_num(base), exponent);
}

} // namespace

Expr pow(const Expr& base, const Rat& exponent) {
    if (exponent == 0) return make_num(1);
    if (exponent == 1) return base;
    switch (base->kind) {
    case Kind::Num:
        return pow_of_num(base->value, exponent);
    case Kind::Mul: {
        // distribute; fractional exponents on products assume the factors are
        // sign-definite on the sampling domain (sqrt arguments are kept
        // positive by the per-symbol domains)
        std::vector<Expr> fs;
        fs.reserve(base->kids.size());
        for (const auto& k : base->kids) fs.push_back(pow(k, exponent));
        return mul(std::move(fs));
    }
    case Kind::Pow: {
        const Rat& inner = base->value;
        // (x^a)^b -> x^(ab) is valid when b is an integer, when a is
        // fractional (domain already x >= 0), or when a is odd
        bool safe = is_integer(exponent) || !is_integer(inner) || (num(inner) % 2) != 0;
        if (safe) return pow(base->kids[0], Rat(inner * exponent));
        return make_pow_node(base, exponent);
    }
    default:
        return make_pow_node(base, exponent);
    }
}

Expr pow(const Expr& base, long long exponent) { return pow(base, Rat(exponent)); }

Expr mul(std::vector<Expr> factors) {
    Rat coeff = 1;
    std::vector<Factor> collected;

    std::function<void(const Expr&)> absorb = [&](const Expr& f) {
        if (f->kind == Kind::Num) {
            coeff *= f->value;
            return;
        }
        if (f->kind == Kind::Mul) {
            for (const auto& k : f->kids) absorb(k);
            return;
        }
        Factor fa = factor_of(f);
        for (auto& c : collected) {
            if (equal(c.base, fa.base)) {
                c.exp += fa.exp;
                return;
            }
        }
        collected.push_back(std::move(fa));
    };
    for (const auto& f : factors) absorb(f);

    if (coeff == 0) return make_num(0);

    std::vector<Expr> out;
    bool needs_refold = false;
    for (const auto& c : collected) {
        if (c.exp == 0) continue;
        Expr p = pow(c.base, c.exp);
        if (p->kind == Kind::Num || p->kind == Kind::Mul) needs_refold = true;
        out.push_back(std::move(p));
    }
    if (needs_refold) {
        // exponent merging folded something (exact roots, distributed
        // products); renormalize once more
        out.insert(out.begin(), make_num(coeff));
        return mul(std::move(out));
    }

    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
    if (out.empty()) return make_num(coeff);
    if (coeff == 1 && out.size() == 1) return out[0];
    if (coeff != 1) out.insert(out.begin(), make_num(coeff));
    if (out.size() == 1) return out[0];
    ExprNode n;
    n.kind = Kind::Mul;
    n.kids = std::move(out);
    return finish(std::move(n));
}

Expr mul(const Expr& a, const Expr& b) { return mul(std::vector<Expr>{a, b}); }

Expr div(const Expr& a, const Expr& b) { return mul(a, pow(b, Rat(-1))); }

Expr sqrt(const Expr& a) { return pow(a, Rat(1, 2)); }

namespace {
Expr fn(Kind k, const Expr& a) {
    if (a->kind == Kind::Num) {
        if (k == Kind::Sin && a->value == 0) return make_num(0);
        if (k == Kind::Cos && a->value == 0) return make_num(1);
        if (k == Kind::Exp && a->value == 0) return make_num(1);
        if (k == Kind::Log && a->value == 1) return make_num(0);
    }
    ExprNode n;
    n.kind = k;
    n.kids = {a};
    return finish(std::move(n));
}
} // namespace

Expr sin(const Expr& a) { return fn(Kind::Sin, a); }
Expr cos(const Expr& a) { return fn(Kind::Cos, a); }
Expr exp(const Expr& a) { return fn(Kind::Exp, a); }
Expr log(const Expr& a) { return fn(Kind::Log, a); }

Expr simplify(const Expr& e) {
    switch (e->kind) {
    case Kind::Num:
    case Kind::Sym:
        return e;
    case Kind::Add: {
        std::vector<Expr> kids;
        kids.reserve(e->kids.size());
        for (const auto& k : e->kids) kids.push_back(simplify(k));
        return add(std::move(kids));
    }
    case Kind::Mul: {
        std::vector<Expr> kids;
        kids.reserve(e->kids.size());
        for (const auto& k : e->kids) kids.push_back(simplify(k));
        return mul(std::move(kids));
    }
    case Kind::Pow:
        return pow(simplify(e->kids[0]), e->value);
    case Kind::Sin:
        return sin(simplify(e->kids[0]));
    case Kind::Cos:
        return cos(simplify(e->kids[0]));
    case Kind::Exp:
        return exp(simplify(e->kids[0]));
    case Kind::Log:
        return log(simplify(e->kids[0]));
    }
    throw ExprError("unreachable kind");
}

Expr differentiate(const Expr& e, const std::string& sym) {
    switch (e->kind) {
    case Kind::Num:
        return make_num(0);
    case Kind::Sym:
        return make_num(e->name == sym ? 1 : 0);
    case Kind::Add: {
        std::vector<Expr> kids;
        for (const auto& k : e->kids) kids.push_back(differentiate(k, sym));
        return add(std::move(kids));
    }
    case Kind::Mul: {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            Expr dk = differentiate(e->kids[i], sym);
            if (is_zero(dk)) continue;
            std::vector<Expr> fs;
            for (std::size_t j = 0; j < e->kids.size(); ++j)
                fs.push_back(i == j ? dk : e->kids[j]);
            terms.push_back(mul(std::move(fs)));
        }
        return add(std::move(terms));
    }
    case Kind::Pow: {
        Expr db = differentiate(e->kids[0], sym);
        if (is_zero(db)) return make_num(0);
        return mul({make_num(e->value), pow(e->kids[0], Rat(e->value - 1)), db});
    }
    case Kind::Sin:
        return mul(cos(e->kids[0]), differentiate(e->kids[0], sym));
    case Kind::Cos:
        return neg(mul(sin(e->kids[0]), differentiate(e->kids[0], sym)));
    case Kind::Exp:
        return mul(e, differentiate(e->kids[0], sym));
    case Kind::Log:
        return div(differentiate(e->kids[0], sym), e->kids[0]);
    }
    throw ExprError("unreachable kind");
}

Expr substitute(const Expr& e, const std::string& sym, const Expr& repl) {
    switch (e->kind) {
    case Kind::Num:
        return e;
    case Kind::Sym:
        return e->name == sym ? repl : e;
    default: {
        bool touched = false;
        std::vector<Expr> kids;
        for (const auto& k : e->kids) {
            Expr s = substitute(k, sym, repl);
            touched = touched || s.get() != k.get();
            kids.push_back(std::move(s));
        }
        if (!touched) return e;
        switch (e->kind) {
        case Kind::Add: return add(std::move(kids));
        case Kind::Mul: return mul(std::move(kids));
        case Kind::Pow: return pow(kids[0], e->value);
        case Kind::Sin: return sin(kids[0]);
        case Kind::Cos: return cos(kids[0]);
        case Kind::Exp: return exp(kids[0]);
        case Kind::Log: return log(kids[0]);
        default: throw ExprError("unreachable kind");
        }
    }
    }
}

void collect_symbols(const Expr& e, std::vector<std::string>& out) {
    if (e->kind == Kind::Sym) {
        if (std::find(out.begin(), out.end(), e->name) == out.end()) out.push_back(e->name);
        return;
    }
    for (const auto& k : e->kids) collect_symbols(k, out);
}

bool depends_on(const Expr& e, const std::string& sym) {
    if (e->kind == Kind::Sym) return e->name == sym;
    for (const auto& k : e->kids)
        if (depends_on(k, sym)) return true;
    return false;
}

// --- printing ---------------------------------------------------------------

namespace {

void print(std::ostream& os, const Expr& e, int parent_prec);

// precedence: 0 sum, 1 product, 2 power/atom
void print_pow_abs(std::ostream& os, const Expr& base, const Rat& e_abs) {
    // e_abs > 0; renders base^e_abs using integer powers and sqrt nesting
    Int d = den(e_abs);
    Int p = num(e_abs);
    if (d == 1) {
        if (p == 1) {
            print(os, base, 2);
        } else {
            print(os, base, 2);
            os << "^" << p.str();
        }
        return;
    }
    int nest = 0;
    Int dd = d;
    while (dd > 1) {
        if (dd % 2 != 0) throw ExprError("unprintable exponent denominator: " + rat_to_string(e_abs));
        dd /= 2;
        ++nest;
    }
    std::string open, close;
    for (int i = 0; i < nest; ++i) { open += "sqrt("; close += ")"; }
    os << open;
    if (p == 1) {
        print(os, base, 0);
    } else {
        print(os, base, 2);
        os << "^" << p.str();
    }
    os << close;
}

void print_product(std::ostream& os, const Rat& coeff, const std::vector<Expr>& factors) {
    // factors are Pow or atoms; split into numerator/denominator parts
    std::vector<std::pair<Expr, Rat>> pos, neg;
    for (const auto& f : factors) {
        if (f->kind == Kind::Pow) {
            if (f->value < 0)
                neg.push_back({f->kids[0], Rat(-f->value)});
            else
                pos.push_back({f->kids[0], f->value});
        } else {
            pos.push_back({f, Rat(1)});
        }
    }
    bool first = true;
    auto emit_coeff = [&]() {
        if (coeff == 1 && !pos.empty()) return;
        if (coeff == -1 && !pos.empty()) { os << "-"; return; }
        os << rat_to_string(coeff);
        first = false;
    };
    emit_coeff();
    for (const auto& [b, e] : pos) {
        if (!first) os << "*";
        print_pow_abs(os, b, e);
        first = false;
    }
    if (pos.empty() && (coeff == 1 || coeff == -1) && !neg.empty()) {
        // pure reciprocal like 1/x
        if (coeff == -1) os << "-";
        os << "1";
    }
    for (const auto& [b, e] : neg) {
        os << "/";
        print_pow_abs(os, b, e);
    }
}

void print(std::ostream& os, const Expr& e, int parent_prec) {
    switch (e->kind) {
    case Kind::Num: {
        bool needs = (e->value < 0 && parent_prec > 0) || (!is_integer(e->value) && parent_prec >= 2);
        if (needs) os << "(";
        os << rat_to_string(e->value);
        if (needs) os << ")";
        return;
    }
    case Kind::Sym:
        os << e->name;
        return;
    case Kind::Add: {
        if (parent_prec > 0) os << "(";
        bool first = true;
        for (const auto& t : e->kids) {
            Term tm = term_of(t);
            if (!first) {
                if (tm.coeff < 0) {
                    os << " - ";
                    print(os, term_to_expr(Rat(-tm.coeff), tm.mono), 1);
                } else {
                    os << " + ";
                    print(os, t, 1);
                }
            } else {
                print(os, t, 1);
                first = false;
            }
        }
        if (parent_prec > 0) os << ")";
        return;
    }
    case Kind::Mul: {
        if (parent_prec > 1) os << "(";
        Rat coeff = 1;
        std::vector<Expr> factors;
        for (const auto& k : e->kids) {
            if (k->kind == Kind::Num) coeff = k->value;
            else factors.push_back(k);
        }
        print_product(os, coeff, factors);
        if (parent_prec > 1) os << ")";
        return;
    }
    case Kind::Pow: {
        if (e->value < 0) {
            if (parent_prec > 1) os << "(";
            os << "1/";
            print_pow_abs(os, e->kids[0], Rat(-e->value));
            if (parent_prec > 1) os << ")";
        } else {
            print_pow_abs(os, e->kids[0], e->value);
        }
        return;
    }
    case Kind::Sin: os << "sin("; print(os, e->kids[0], 0); os << ")"; return;
    case Kind::Cos: os << "cos("; print(os, e->kids[0], 0); os << ")"; return;
    case Kind::Exp: os << "exp("; print(os, e->kids[0], 0); os << ")"; return;
    case Kind::Log: os << "log("; print(os, e->kids[0], 0); os << ")"; return;
    }
}

} // namespace

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print(os, e, 0);
    return os.str();
}

} // namespace varinv
