#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "pdebound/poly.hpp"

namespace pdebound {
namespace {

// Recursive-descent parser for polynomial expressions:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*' factor) | factor)*     (adjacency = product)
//   factor := primary ('^' integer)?
//   primary:= number | identifier | '(' expr ')' | '-' factor
struct Parser {
    std::string_view s;
    size_t pos = 0;
    const VarSet* vars;
    const std::map<std::string, double>* params;
    std::vector<std::string> inferred;  // used when vars == nullptr

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    char peek() {
        skip();
        return pos < s.size() ? s[pos] : '\0';
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw Error("parse error at position " + std::to_string(pos) + ": " + msg +
                    " in '" + std::string(s) + "'");
    }

    Polynomial expr() {
        Polynomial acc = term();
        for (;;) {
            if (eat('+'))
                acc = acc + term();
            else if (eat('-'))
                acc = acc - term();
            else
                return acc;
        }
    }

    Polynomial term() {
        Polynomial acc = factor();
        for (;;) {
            char c = peek();
            if (c == '*') {
                ++pos;
                acc = acc * factor();
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '(' ||
                       std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                acc = acc * factor();
            } else {
                return acc;
            }
        }
    }

    Polynomial factor() {
        Polynomial base = primary();
        if (eat('^')) {
            skip();
            size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == start) fail("expected integer exponent");
            int e = std::atoi(std::string(s.substr(start, pos - start)).c_str());
            Polynomial out = Polynomial::constant(1.0);
            for (int i = 0; i < e; ++i) out = out * base;
            return out;
        }
        return base;
    }

    Polynomial primary() {
        skip();
        if (pos >= s.size()) fail("unexpected end of input");
        char c = s[pos];
        if (c == '(') {
            ++pos;
            Polynomial p = expr();
            if (!eat(')')) fail("expected ')'");
            return p;
        }
        if (c == '-') {
            ++pos;
            return -factor();
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            double v = std::strtod(s.data() + pos, &end);
            pos = static_cast<size_t>(end - s.data());
            return Polynomial::constant(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos;
            while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) ||
                                      s[pos] == '_'))
                ++pos;
            std::string id(s.substr(start, pos - start));
            if (id == "pi") return Polynomial::constant(4.0 * std::atan(1.0));
            if (params) {
                auto it = params->find(id);
                if (it != params->end()) return Polynomial::constant(it->second);
            }
            if (vars) {
                int idx = vars->index(id);
                if (idx < 0) fail("unknown identifier '" + id + "'");
                return Polynomial::variable(*vars, idx);
            }
            if (std::find(inferred.begin(), inferred.end(), id) == inferred.end())
                inferred.push_back(id);
            VarSet vs({id});
            return Polynomial::variable(vs, 0);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, const VarSet& vars,
                            const std::map<std::string, double>& params) {
    VarSet effective = vars;
    if (vars.size() == 0) {
        // Inference: collect identifiers in first-occurrence order so terms
        // written in different variable orders still share one VarSet.
        std::vector<std::string> ids;
        for (size_t i = 0; i < text.size();) {
            unsigned char c = static_cast<unsigned char>(text[i]);
            if (std::isalpha(c) || text[i] == '_') {
                size_t start = i;
                while (i < text.size() &&
                       (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                    ++i;
                std::string id(text.substr(start, i - start));
                if (id != "pi" && !params.count(id) &&
                    std::find(ids.begin(), ids.end(), id) == ids.end())
                    ids.push_back(id);
            } else {
                ++i;
            }
        }
        effective = VarSet(ids);
    }
    Parser p{text, 0, effective.size() > 0 ? &effective : nullptr, &params, {}};
    Polynomial out = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    if (effective.size() > 0) out = out.aligned_to(effective);
    return out;
}

}  // namespace pdebound
