#include "varinv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace varinv {

namespace {

bool near_zero(double v) { return v == 0.0; }

} // namespace

double eval_point(const Expr& e, const Point& p) {
    switch (e->kind) {
    case Kind::Num:
        return to_double(e->value);
    case Kind::Sym: {
        auto it = p.find(e->name);
        if (it == p.end()) throw EvalError("unassigned symbol", e->name, p);
        return it->second;
    }
    case Kind::Add: {
        double s = 0;
        for (const auto& k : e->kids) s += eval_point(k, p);
        return s;
    }
    case Kind::Mul: {
        double s = 1;
        for (const auto& k : e->kids) s *= eval_point(k, p);
        return s;
    }
    case Kind::Pow: {
        double b = eval_point(e->kids[0], p);
        if (is_integer(e->value)) {
            long long n = e->value.convert_to<long long>();
            if (n < 0 && near_zero(b)) throw EvalError("division by zero", to_string(e), p);
            return std::pow(b, static_cast<double>(n));
        }
        if (b < 0) throw EvalError("fractional power of negative value", to_string(e), p);
        double r = to_double(e->value);
        if (near_zero(b) && r < 0) throw EvalError("division by zero", to_string(e), p);
        return std::pow(b, r);
    }
    case Kind::Sin:
        return std::sin(eval_point(e->kids[0], p));
    case Kind::Cos:
        return std::cos(eval_point(e->kids[0], p));
    case Kind::Exp:
        return std::exp(eval_point(e->kids[0], p));
    case Kind::Log: {
        double v = eval_point(e->kids[0], p);
        if (v <= 0) throw EvalError("log of non-positive value", to_string(e), p);
        return std::log(v);
    }
    }
    throw EvalError("unreachable", "", p);
}

CompiledExpr compile_expr(const Expr& e, const std::vector<std::string>& symbol_order) {
    CompiledExpr ce;
    ce.symbols = symbol_order;
    int depth = 0;
    auto push = [&](Instr i, int delta) {
        ce.code.push_back(i);
        depth += delta;
        ce.stack_need = std::max(ce.stack_need, depth);
    };
    std::function<void(const Expr&)> emit = [&](const Expr& x) {
        switch (x->kind) {
        case Kind::Num:
            push({Op::Const, 0, 0, to_double(x->value)}, +1);
            return;
        case Kind::Sym: {
            auto it = std::find(symbol_order.begin(), symbol_order.end(), x->name);
            if (it == symbol_order.end())
                throw ExprError("symbol not in compile order: " + x->name);
            push({Op::Load, static_cast<std::int32_t>(it - symbol_order.begin())}, +1);
            return;
        }
        case Kind::Add:
            for (const auto& k : x->kids) emit(k);
            push({Op::AddN, static_cast<std::int32_t>(x->kids.size())},
                 1 - static_cast<int>(x->kids.size()));
            return;
        case Kind::Mul:
            for (const auto& k : x->kids) emit(k);
            push({Op::MulN, static_cast<std::int32_t>(x->kids.size())},
                 1 - static_cast<int>(x->kids.size()));
            return;
        case Kind::Pow:
            emit(x->kids[0]);
            if (is_integer(x->value))
                push({Op::PowInt, x->value.convert_to<std::int32_t>()}, 0);
            else
                push({Op::PowRat, num(x->value).convert_to<std::int32_t>(),
                      den(x->value).convert_to<std::int32_t>()},
                     0);
            return;
        case Kind::Sin: emit(x->kids[0]); push({Op::Sin}, 0); return;
        case Kind::Cos: emit(x->kids[0]); push({Op::Cos}, 0); return;
        case Kind::Exp: emit(x->kids[0]); push({Op::Exp}, 0); return;
        case Kind::Log: emit(x->kids[0]); push({Op::Log}, 0); return;
        }
    };
    emit(e);
    return ce;
}

std::uint8_t eval_compiled(const CompiledExpr& ce, std::span<const double> vals,
                           double& value, double& magnitude) {
    // two stacks: actual value and all-signs-dropped magnitude
    double vsmall[64];
    double msmall[64];
    thread_local std::vector<double> vbig, mbig;
    double* vstack = vsmall;
    double* mstack = msmall;
    if (ce.stack_need > 64) {
        if (static_cast<int>(vbig.size()) < ce.stack_need) {
            vbig.resize(static_cast<std::size_t>(ce.stack_need));
            mbig.resize(static_cast<std::size_t>(ce.stack_need));
        }
        vstack = vbig.data();
        mstack = mbig.data();
    }
    int top = 0;
    for (const Instr& in : ce.code) {
        switch (in.op) {
        case Op::Const:
            vstack[top] = in.c;
            mstack[top] = std::fabs(in.c);
            ++top;
            break;
        case Op::Load:
            vstack[top] = vals[static_cast<std::size_t>(in.a)];
            mstack[top] = std::fabs(vstack[top]);
            ++top;
            break;
        case Op::AddN: {
            double s = 0, m = 0;
            for (int i = 0; i < in.a; ++i) {
                s += vstack[top - in.a + i];
                m += mstack[top - in.a + i];
            }
            top -= in.a;
            vstack[top] = s;
            mstack[top] = m;
            ++top;
            break;
        }
        case Op::MulN: {
            double s = 1, m = 1;
            for (int i = 0; i < in.a; ++i) {
                s *= vstack[top - in.a + i];
                m *= mstack[top - in.a + i];
            }
            top -= in.a;
            vstack[top] = s;
            mstack[top] = m;
            ++top;
            break;
        }
        case Op::PowInt: {
            double b = vstack[top - 1];
            if (in.a < 0 && b == 0.0) return kEvalDomainError;
            vstack[top - 1] = std::pow(b, static_cast<double>(in.a));
            // negative powers: scale by the actual denominator size, not the
            // accumulated magnitude (which only over-estimates)
            double mb = in.a < 0 ? std::fabs(b) : mstack[top - 1];
            mstack[top - 1] = std::pow(mb, static_cast<double>(in.a));
            break;
        }
        case Op::PowRat: {
            double b = vstack[top - 1];
            double r = static_cast<double>(in.a) / static_cast<double>(in.b);
            if (b < 0) return kEvalDomainError;
            if (b == 0.0 && r < 0) return kEvalDomainError;
            vstack[top - 1] = std::pow(b, r);
            double mb = r < 0 ? b : mstack[top - 1];
            mstack[top - 1] = std::pow(mb, r);
            break;
        }
        case Op::Sin:
            vstack[top - 1] = std::sin(vstack[top - 1]);
            mstack[top - 1] = std::fabs(vstack[top - 1]);
            break;
        case Op::Cos:
            vstack[top - 1] = std::cos(vstack[top - 1]);
            mstack[top - 1] = std::fabs(vstack[top - 1]);
            break;
        case Op::Exp:
            vstack[top - 1] = std::exp(vstack[top - 1]);
            mstack[top - 1] = vstack[top - 1];
            break;
        case Op::Log: {
            double v = vstack[top - 1];
            if (v <= 0) return kEvalDomainError;
            vstack[top - 1] = std::log(v);
            mstack[top - 1] = std::fabs(vstack[top - 1]);
            break;
        }
        }
        if (!std::isfinite(vstack[top - 1])) return kEvalDomainError;
    }
    value = vstack[0];
    magnitude = mstack[0];
    return kEvalOk;
}

BatchResult eval_batch(const std::vector<CompiledExpr>& programs,
                       const std::vector<std::vector<double>>& points,
                       EvalMode mode) {
    BatchResult r;
    r.rows = programs.size();
    r.cols = points.size();
    r.value.assign(r.rows * r.cols, 0.0);
    r.magnitude.assign(r.rows * r.cols, 0.0);
    r.status.assign(r.rows * r.cols, kEvalOk);

    const std::int64_t total = static_cast<std::int64_t>(r.rows * r.cols);
    if (mode == EvalMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t idx = 0; idx < total; ++idx) {
            std::size_t i = static_cast<std::size_t>(idx) / r.cols;
            std::size_t j = static_cast<std::size_t>(idx) % r.cols;
            r.status[idx] = eval_compiled(programs[i], points[j], r.value[idx], r.magnitude[idx]);
        }
    } else {
        for (std::int64_t idx = 0; idx < total; ++idx) {
            std::size_t i = static_cast<std::size_t>(idx) / r.cols;
            std::size_t j = static_cast<std::size_t>(idx) % r.cols;
            r.status[idx] = eval_compiled(programs[i], points[j], r.value[idx], r.magnitude[idx]);
        }
    }
    return r;
}

} // namespace varinv
