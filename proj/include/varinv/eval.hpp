#pragma once

#include "varinv/expr.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace varinv {

// Assignment of double values to every symbol in scope.
using Point = std::map<std::string, double>;

struct EvalError : std::runtime_error {
    EvalError(const std::string& what, std::string where_, Point at_)
        : std::runtime_error(what), where(std::move(where_)), at(std::move(at_)) {}
    std::string where; // offending sub-expression, printed
    Point at;
};

// Tree-walking evaluation with domain checks. Throws EvalError on division by
// zero, log of a non-positive value, or a fractional power of a negative.
double eval_point(const Expr& e, const Point& p);

// ---------------------------------------------------------------------------
// Compiled evaluation. Expressions are flattened to a postfix program over a
// fixed symbol order; programs are plain data and safe to evaluate from many
// threads at once. This is the hot path: every zero test, identity residual
// and Helmholtz check reduces to evaluating compiled programs on a batch of
// sample points.

enum class Op : std::uint8_t { Const, Load, AddN, MulN, PowInt, PowRat, Sin, Cos, Exp, Log };

struct Instr {
    Op op;
    std::int32_t a = 0;  // Load slot / AddN,MulN arity / PowInt exponent / PowRat num
    std::int32_t b = 0;  // PowRat den
    double c = 0.0;      // Const value
};

struct CompiledExpr {
    std::vector<Instr> code;
    std::vector<std::string> symbols; // slot order
    int stack_need = 0;
};

CompiledExpr compile_expr(const Expr& e, const std::vector<std::string>& symbol_order);

// status codes per evaluated sample
enum : std::uint8_t { kEvalOk = 0, kEvalDomainError = 1 };

// Evaluates one program at one point (columns of `vals` follow
// CompiledExpr::symbols). Returns status; on success also the magnitude
// estimate (the same program evaluated with all signs dropped), used for
// residual normalization.
std::uint8_t eval_compiled(const CompiledExpr& ce, std::span<const double> vals,
                           double& value, double& magnitude);

enum class EvalMode { Serial, Parallel };

// Batch kernel: programs x points -> values/magnitudes/status, row-major with
// one row per program. The serial path is the reference implementation; the
// parallel path must produce bit-identical output (each cell is independent).
struct BatchResult {
    std::size_t rows = 0, cols = 0;
    std::vector<double> value;
    std::vector<double> magnitude;
    std::vector<std::uint8_t> status;
    double& val(std::size_t r, std::size_t c) { return value[r * cols + c]; }
    double val(std::size_t r, std::size_t c) const { return value[r * cols + c]; }
    double mag(std::size_t r, std::size_t c) const { return magnitude[r * cols + c]; }
    std::uint8_t stat(std::size_t r, std::size_t c) const { return status[r * cols + c]; }
};

// `points` is row-major: one row of symbol values per sample point.
BatchResult eval_batch(const std::vector<CompiledExpr>& programs,
                       const std::vector<std::vector<double>>& points,
                       EvalMode mode = EvalMode::Parallel);

} // namespace varinv
