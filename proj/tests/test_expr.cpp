#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "varinv/eval.hpp"
#include "varinv/parser.hpp"
#include "varinv/zerotest.hpp"

#include <cmath>
#include <random>

using namespace varinv;

namespace {

const std::set<std::string> kSyms = {"t", "x", "y", "z", "w", "u",
                                     "dx", "dy", "dz", "dw", "du"};

Expr P(const std::string& s) { return parse_expr(s, kSyms); }

double eval_at(const Expr& e, std::initializer_list<std::pair<const std::string, double>> vals) {
    return eval_point(e, Point(vals));
}

} // namespace

TEST_CASE("parser accepts the documented grammar") {
    CHECK(equal(P("x*dx + z*dz"), add(mul(P("x"), P("dx")), mul(P("z"), P("dz")))));
    CHECK(to_string(P("1/y*(1+dy^2+dz^2)")) ==
          to_string(div(add({one(), pow(P("dy"), 2), pow(P("dz"), 2)}), P("y"))));
    CHECK(equal(P("1/2"), make_num(Rat(1, 2))));
    CHECK(equal(P("0.25"), make_num(Rat(1, 4))));
    CHECK(equal(P("-x"), neg(P("x"))));
    CHECK(equal(P("x^-2"), pow(P("x"), -2)));
    CHECK(equal(P("sqrt(sqrt(t))"), pow(P("t"), Rat(1, 4))));
}

TEST_CASE("parser reports error positions") {
    CHECK_THROWS_WITH_AS(P("w^2 +"), doctest::Contains("at offset 5"), ParseError);
    CHECK_THROWS_AS(P("q + 1"), ParseError);
    CHECK_THROWS_AS(P("sin(x"), ParseError);
    try {
        P("q + 1");
    } catch (const ParseError& pe) {
        CHECK(pe.offset == 0);
        CHECK(std::string(pe.what()).find("unknown identifier") != std::string::npos);
    }
}

TEST_CASE("print/parse round trip is structural identity") {
    const char* samples[] = {
        "x*dx + z*dz",
        "1/y*(1+dy^2+dz^2)",
        "sqrt(w^2 - 2*du) - w",
        "-3*dy/(2*dz^2)",
        "sin(x)^2 + cos(x)^2 - 1",
        "exp(-t)*log(y)/sqrt(dz^3)",
        "2 - x/7 + 3/4*y^3",
    };
    for (const char* s : samples) {
        Expr e = P(s);
        CAPTURE(s);
        CHECK(equal(e, P(to_string(e))));
    }
}

TEST_CASE("simplify folds and collects") {
    // (u*w)/w == u for w != 0
    CHECK(equal(P("(u*w)/w"), P("u")));
    // (sqrt(w^2-2*u)-w) + w == sqrt(w^2-2*u)
    CHECK(equal(P("(sqrt(w^2-2*u)-w) + w"), P("sqrt(w^2-2*u)")));
    CHECK(equal(P("0*sin(x)+3/3"), one()));
    CHECK(equal(P("x - x"), zero()));
    CHECK(equal(P("x*x"), pow(P("x"), 2)));
    CHECK(equal(P("sqrt(x)*sqrt(x)"), P("x")));
    CHECK(equal(P("x^2/x"), P("x")));
    CHECK(equal(P("sqrt(4)"), make_num(2)));
    CHECK(equal(P("sqrt(2)^2"), make_num(2)));
    CHECK(equal(P("(2*x)^2"), mul(make_num(4), pow(P("x"), 2))));
    // simplify is idempotent on anything the constructors produce
    Expr e = P("(x+y)^2/(x+y) - x");
    CHECK(equal(simplify(e), e));
    CHECK(equal(e, P("y")));
}

TEST_CASE("fractional powers of even powers are not collapsed") {
    Expr e = pow(pow(P("x"), 2), Rat(1, 2)); // sqrt(x^2) != x for x < 0
    CHECK(eval_at(e, {{"x", -3.0}}) == doctest::Approx(3.0));
}

TEST_CASE("differentiate basic rules") {
    CHECK(equal(differentiate(P("u*w"), "u"), P("w")));
    CHECK(equal(differentiate(P("sqrt(t)"), "t"), P("1/(2*sqrt(t))")));
    // d/ddz of F^y from the three-dimensional fixture
    Expr d = differentiate(P("1/y*(1+dy^2+dz^2)"), "dz");
    CHECK(equal(d, P("2*dz/y")));
    CHECK(equal(differentiate(P("sin(x^2)"), "x"), P("2*x*cos(x^2)")));
    CHECK(equal(differentiate(P("log(y)"), "y"), P("1/y")));
    CHECK(equal(differentiate(P("exp(2*x)"), "x"), P("2*exp(2*x)")));
}

TEST_CASE("differentiate agrees with finite differences") {
    const char* samples[] = {
        "1/y*(1+dy^2+dz^2)",
        "sqrt(w^2+2*du)*sin(x)",
        "exp(x*y)/sqrt(t)",
        "log(1+x^2)*cos(dz)",
    };
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(0.6, 1.8);
    for (const char* s : samples) {
        Expr e = P(s);
        std::vector<std::string> syms;
        collect_symbols(e, syms);
        for (const auto& v : syms) {
            Expr de = differentiate(e, v);
            for (int trial = 0; trial < 10; ++trial) {
                Point p;
                for (const auto& q : syms) p[q] = dist(rng);
                const double h = 1e-6;
                Point pl = p, pr = p;
                pl[v] -= h;
                pr[v] += h;
                double fd = (eval_point(e, pr) - eval_point(e, pl)) / (2 * h);
                double ex = eval_point(de, p);
                CAPTURE(s);
                CAPTURE(v);
                CHECK(std::fabs(fd - ex) <= 1e-7 * (1 + std::fabs(ex)));
            }
        }
    }
}

TEST_CASE("differentiation is linear at random points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.5, 2.0);
    Expr e1 = P("sqrt(x)*dy + t^3");
    Expr e2 = P("cos(x*t) - dy/x");
    Expr combo = add(mul(make_num(Rat(7, 3)), e1), e2);
    Expr lhs = differentiate(combo, "x");
    Expr rhs = add(mul(make_num(Rat(7, 3)), differentiate(e1, "x")), differentiate(e2, "x"));
    for (int i = 0; i < 10; ++i) {
        Point p{{"x", dist(rng)}, {"dy", dist(rng)}, {"t", dist(rng)}};
        CHECK(eval_point(lhs, p) == doctest::Approx(eval_point(rhs, p)).epsilon(1e-9));
    }
}

TEST_CASE("eval_point handles domain errors with context") {
    CHECK(eval_at(P("2*dz/y"), {{"y", 2.0}, {"dz", 1.0}}) == doctest::Approx(1.0));
    CHECK(eval_at(P("1/y*(1+dy^2+dz^2)"), {{"y", 2.0}, {"dy", 1.0}, {"dz", 1.0}}) ==
          doctest::Approx(1.5));
    CHECK_THROWS_AS(eval_at(P("1/y"), {{"y", 0.0}}), EvalError);
    CHECK_THROWS_AS(eval_at(P("log(x)"), {{"x", -1.0}}), EvalError);
    CHECK_THROWS_AS(eval_at(P("sqrt(x)"), {{"x", -1.0}}), EvalError);
    try {
        eval_at(P("x + 1/y"), {{"x", 1.0}, {"y", 0.0}});
        CHECK(false);
    } catch (const EvalError& e) {
        CHECK(e.where.find("y") != std::string::npos);
        CHECK(e.at.at("y") == 0.0);
    }
}

TEST_CASE("random expression simplification preserves value") {
    // build 100 random small trees through the raw-ish API and check simplify
    // agrees with the original numerically
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> pick(0, 6);
    std::uniform_int_distribution<long long> cnum(-4, 4);
    std::uniform_real_distribution<double> dist(0.55, 1.9);
    const std::vector<std::string> vars = {"x", "y", "t"};
    std::function<Expr(int)> gen = [&](int depth) -> Expr {
        if (depth <= 0) {
            int c = pick(rng) % 3;
            if (c == 0) return make_num(cnum(rng));
            return make_sym(vars[static_cast<std::size_t>(pick(rng)) % vars.size()]);
        }
        switch (pick(rng)) {
        case 0: return add(gen(depth - 1), gen(depth - 1));
        case 1: return mul(gen(depth - 1), gen(depth - 1));
        case 2: return sub(gen(depth - 1), gen(depth - 1));
        case 3: return pow(gen(depth - 1), (cnum(rng) % 3) + 1);
        case 4: return sin(gen(depth - 1));
        case 5: return cos(gen(depth - 1));
        default: return add(gen(depth - 1), make_num(cnum(rng)));
        }
    };
    for (int i = 0; i < 100; ++i) {
        Expr e = gen(3);
        Expr s = simplify(e);
        CHECK(equal(s, simplify(s))); // idempotent
        for (int j = 0; j < 10; ++j) {
            Point p{{"x", dist(rng)}, {"y", dist(rng)}, {"t", dist(rng)}};
            double a = eval_point(e, p);
            double b = eval_point(s, p);
            CHECK(std::fabs(a - b) <= 1e-9 * (1 + std::fabs(a)));
        }
    }
}

TEST_CASE("zero_test verdicts") {
    ZeroTester zt;
    SUBCASE("provably zero") {
        CHECK(zt.test(P("x - x")).verdict == ZeroVerdict::ProvablyZero);
        CHECK(zt.test(sub(P("(u*w)/w"), P("u"))).verdict == ZeroVerdict::ProvablyZero);
    }
    SUBCASE("numerically zero identity the normal form cannot prove") {
        auto r = zt.test(P("sin(x)^2 + cos(x)^2 - 1"));
        CHECK(r.verdict == ZeroVerdict::NumericallyZero);
    }
    SUBCASE("nonzero with witness") {
        auto r = zt.test(P("-1/2"));
        CHECK(r.verdict == ZeroVerdict::NonZero);
        r = zt.test(P("x*y - 1/2"));
        CHECK(r.verdict == ZeroVerdict::NonZero);
        REQUIRE(r.witness.has_value());
        double v = eval_point(P("x*y - 1/2"), *r.witness);
        CHECK(std::fabs(v) > 1e-9);
    }
    SUBCASE("never declares a visibly nonzero function zero") {
        // constructed witness family: |e| > 1e-3 somewhere on the box
        for (const char* s : {"x - 11/10", "sin(x) - x/4", "x*y*t - 9/8"}) {
            CHECK(zt.test(P(s)).verdict == ZeroVerdict::NonZero);
        }
    }
    SUBCASE("indeterminate when the whole domain errors") {
        ZeroTester bad;
        bad.domain.intervals["x"] = {-2.0, -1.0};
        CHECK_THROWS_AS(bad.test(P("log(x)")), IndeterminateError);
    }
    SUBCASE("determinism") {
        auto a = zt.test(P("x*y - 1/2"));
        auto b = zt.test(P("x*y - 1/2"));
        REQUIRE(a.witness.has_value());
        REQUIRE(b.witness.has_value());
        CHECK(a.witness->at("x") == b.witness->at("x"));
        CHECK(a.max_residual == b.max_residual);
    }
}

TEST_CASE("excluded loci are avoided while sampling") {
    ZeroTester zt;
    zt.domain.intervals["dz"] = {-1.0, 1.0};
    zt.domain.excluded["dz"] = {0.0};
    auto r = zt.test(P("1/dz - dz"));
    CHECK(r.verdict == ZeroVerdict::NonZero);
}
