#pragma once

#include "varinv/eval.hpp"
#include "varinv/expr.hpp"

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace varinv {

struct Interval {
    double lo = 0.5;
    double hi = 2.0;
};

// Per-symbol sampling intervals plus declared excluded values (e.g. dz = 0).
struct Domain {
    std::map<std::string, Interval> intervals;
    std::map<std::string, std::vector<double>> excluded;

    Interval interval_of(const std::string& sym) const {
        auto it = intervals.find(sym);
        return it == intervals.end() ? Interval{} : it->second;
    }
};

// Deterministic point sampler over a fixed symbol order.
class Sampler {
  public:
    Sampler(std::vector<std::string> symbols, const Domain& dom, std::uint64_t seed);

    // next point as a row of values following the symbol order
    std::vector<double> draw();
    const std::vector<std::string>& symbols() const { return symbols_; }
    Point as_point(const std::vector<double>& row) const;

  private:
    std::vector<std::string> symbols_;
    std::vector<Interval> ivals_;
    std::vector<std::vector<double>> excl_;
    std::mt19937_64 rng_;
};

enum class ZeroVerdict { ProvablyZero, NumericallyZero, NonZero };

struct ZeroResult {
    ZeroVerdict verdict;
    std::optional<Point> witness;    // for NonZero
    double max_residual = 0.0;       // max |e(p)| / (1 + magnitude)
};

struct IndeterminateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroTester {
    Domain domain;
    int trials = 32;
    double tol = 1e-9;
    std::uint64_t seed = 0x5eed;
    EvalMode mode = EvalMode::Parallel;

    // Probabilistic zero test after syntactic normalization: ProvablyZero iff
    // the normal form is the zero constant; otherwise Schwartz-Zippel style
    // sampling with residuals normalized by (1 + magnitude). Throws
    // IndeterminateError when every sampled point hits a domain error.
    ZeroResult test(const Expr& e) const;

    // batched variant sharing one set of sample points
    std::vector<ZeroResult> test_many(const std::vector<Expr>& es) const;

    bool is_zero(const Expr& e) const {
        return test(e).verdict != ZeroVerdict::NonZero;
    }
};

} // namespace varinv
