#pragma once

#include "varinv/expr.hpp"

#include <set>
#include <stdexcept>
#include <string>

namespace varinv {

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " at offset " + std::to_string(off)), offset(off) {}
};

// Grammar:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' integer)?
//   base   := number | identifier | '(' expr ')' | func '(' expr ')' | '-' base
//   func   in {sqrt, sin, cos, exp, log}
//   number := integer | decimal
// Identifiers must be in `allowed`; velocity of coordinate q is `dq`.
Expr parse_expr(const std::string& text, const std::set<std::string>& allowed);

} // namespace varinv
