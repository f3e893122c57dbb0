#include "varinv/zerotest.hpp"

#include <algorithm>
#include <cmath>

namespace varinv {

Sampler::Sampler(std::vector<std::string> symbols, const Domain& dom, std::uint64_t seed)
    : symbols_(std::move(symbols)), rng_(seed) {
    for (const auto& s : symbols_) {
        ivals_.push_back(dom.interval_of(s));
        auto it = dom.excluded.find(s);
        excl_.push_back(it == dom.excluded.end() ? std::vector<double>{} : it->second);
    }
}

std::vector<double> Sampler::draw() {
    std::vector<double> row(symbols_.size());
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        const auto& iv = ivals_[i];
        std::uniform_real_distribution<double> dist(iv.lo, iv.hi);
        double v = dist(rng_);
        double span = iv.hi - iv.lo;
        for (int retry = 0; retry < 16; ++retry) {
            bool bad = false;
            for (double x : excl_[i])
                if (std::fabs(v - x) < 1e-3 * (span > 0 ? span : 1.0)) bad = true;
            if (!bad) break;
            v = dist(rng_);
        }
        row[i] = v;
    }
    return row;
}

Point Sampler::as_point(const std::vector<double>& row) const {
    Point p;
    for (std::size_t i = 0; i < symbols_.size(); ++i) p[symbols_[i]] = row[i];
    return p;
}

std::vector<ZeroResult> ZeroTester::test_many(const std::vector<Expr>& es) const {
    std::vector<ZeroResult> out(es.size());
    std::vector<std::size_t> sampled_idx;
    std::vector<std::string> symbols;
    for (std::size_t i = 0; i < es.size(); ++i) {
        if (varinv::is_num(es[i])) {
            if (varinv::is_zero(es[i])) {
                out[i] = {ZeroVerdict::ProvablyZero, std::nullopt, 0.0};
            } else {
                out[i] = {ZeroVerdict::NonZero, Point{}, std::fabs(to_double(es[i]->value))};
            }
        } else {
            sampled_idx.push_back(i);
            collect_symbols(es[i], symbols);
        }
    }
    if (sampled_idx.empty()) return out;
    std::sort(symbols.begin(), symbols.end());

    Sampler sampler(symbols, domain, seed);
    // oversample so that sporadic domain errors do not starve the test
    int budget = trials * 4;
    std::vector<std::vector<double>> pts;
    pts.reserve(static_cast<std::size_t>(budget));
    for (int i = 0; i < budget; ++i) pts.push_back(sampler.draw());

    std::vector<CompiledExpr> progs;
    progs.reserve(sampled_idx.size());
    for (std::size_t i : sampled_idx) progs.push_back(compile_expr(es[i], symbols));

    BatchResult br = eval_batch(progs, pts, mode);

    for (std::size_t r = 0; r < sampled_idx.size(); ++r) {
        int used = 0;
        double worst = 0.0;
        std::optional<Point> witness;
        for (std::size_t c = 0; c < pts.size() && used < trials; ++c) {
            if (br.stat(r, c) != kEvalOk) continue;
            ++used;
            double res = std::fabs(br.val(r, c)) / (1.0 + br.mag(r, c));
            if (res > worst) {
                worst = res;
                if (res > tol) witness = sampler.as_point(pts[c]);
            }
        }
        if (used == 0)
            throw IndeterminateError("zero test indeterminate: all sample points hit domain errors for " +
                                     to_string(es[sampled_idx[r]]));
        if (worst > tol)
            out[sampled_idx[r]] = {ZeroVerdict::NonZero, witness, worst};
        else
            out[sampled_idx[r]] = {ZeroVerdict::NumericallyZero, std::nullopt, worst};
    }
    return out;
}

ZeroResult ZeroTester::test(const Expr& e) const { return test_many({e})[0]; }

} // namespace varinv
