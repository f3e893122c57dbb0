#include "varinv/sode.hpp"

#include <stdexcept>

namespace varinv {

std::vector<std::string> Sode::all_symbols() const {
    std::vector<std::string> out;
    out.push_back("t");
    for (int a = 0; a < n; ++a) out.push_back(coord(a));
    for (int a = 0; a < n; ++a) out.push_back(velocity(a));
    return out;
}

std::set<std::string> Sode::symbol_set() const {
    auto v = all_symbols();
    return {v.begin(), v.end()};
}

void Sode::validate() const {
    if (n < 1) throw std::invalid_argument("dimension must be >= 1");
    if (static_cast<int>(coords.size()) != n || static_cast<int>(forces.size()) != n)
        throw std::invalid_argument("coords/forces size must match dimension");
    std::set<std::string> seen;
    for (const auto& c : coords) {
        if (c == "t") throw std::invalid_argument("coordinate may not be named t");
        if (!seen.insert(c).second) throw std::invalid_argument("duplicate coordinate " + c);
    }
    for (const auto& c : coords)
        if (seen.count("d" + c) && c != "d" + c)
            throw std::invalid_argument("coordinate d" + c + " collides with a velocity name");
    auto scope = symbol_set();
    for (const auto& f : forces) {
        std::vector<std::string> syms;
        collect_symbols(f, syms);
        for (const auto& s : syms)
            if (!scope.count(s))
                throw std::invalid_argument("force uses undeclared symbol " + s);
    }
    for (const auto& [sym, iv] : domain.intervals) {
        if (!(iv.lo < iv.hi)) throw std::invalid_argument("empty domain interval for " + sym);
        if (!scope.count(sym)) throw std::invalid_argument("domain interval for unknown symbol " + sym);
    }
}

} // namespace varinv
