#include "varinv/parser.hpp"

#include <cctype>

namespace varinv {

namespace {

struct Parser {
    const std::string& s;
    const std::set<std::string>& allowed;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos != s.size()) fail("unexpected trailing input");
        return e;
    }

    Expr expr() {
        bool negate_first = eat('-');
        Expr e = term();
        if (negate_first) e = neg(e);
        while (true) {
            if (eat('+')) e = add(e, term());
            else if (eat('-')) e = sub(e, term());
            else break;
        }
        return e;
    }

    Expr term() {
        Expr e = factor();
        while (true) {
            if (eat('*')) e = mul(e, factor());
            else if (eat('/')) e = div(e, factor());
            else break;
        }
        return e;
    }

    Expr factor() {
        Expr b = base();
        if (eat('^')) {
            bool negexp = eat('-');
            skip_ws();
            if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
                fail("expected integer exponent");
            long long v = 0;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                v = v * 10 + (s[pos] - '0');
                ++pos;
            }
            return pow(b, negexp ? -v : v);
        }
        return b;
    }

    Expr base() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of input");
        char c = s[pos];
        if (c == '-') {
            ++pos;
            return neg(base());
        }
        if (c == '(') {
            ++pos;
            Expr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr number() {
        std::size_t start = pos;
        Int int_part = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            int_part = int_part * 10 + (s[pos] - '0');
            ++pos;
        }
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            Int frac = 0, scale = 1;
            bool any = false;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                frac = frac * 10 + (s[pos] - '0');
                scale *= 10;
                ++pos;
                any = true;
            }
            if (!any && pos == start + 1) fail("malformed number");
            return make_num(Rat(int_part * scale + frac, scale));
        }
        return make_num(Rat(int_part));
    }

    Expr identifier() {
        std::size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        std::string name = s.substr(start, pos - start);
        if (name == "sqrt" || name == "sin" || name == "cos" || name == "exp" || name == "log") {
            if (!eat('(')) {
                pos = start;
                fail("expected '(' after function name '" + name + "'");
            }
            Expr arg = expr();
            if (!eat(')')) fail("expected ')'");
            if (name == "sqrt") return sqrt(arg);
            if (name == "sin") return sin(arg);
            if (name == "cos") return cos(arg);
            if (name == "exp") return exp(arg);
            return log(arg);
        }
        if (!allowed.count(name)) {
            pos = start;
            fail("unknown identifier '" + name + "'");
        }
        return make_sym(name);
    }
};

} // namespace

Expr parse_expr(const std::string& text, const std::set<std::string>& allowed) {
    Parser p{text, allowed};
    return p.parse();
}

} // namespace varinv
