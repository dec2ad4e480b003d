#include "pdebound/poly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pdebound {

VarSet::VarSet(std::vector<std::string> names) : names_(std::move(names)) {
    for (size_t i = 0; i < names_.size(); ++i)
        for (size_t j = i + 1; j < names_.size(); ++j)
            if (names_[i] == names_[j])
                throw Error("VarSet: duplicate variable '" + names_[i] + "'");
}

int VarSet::index(std::string_view name) const {
    for (size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

VarSet VarSet::merged(const VarSet& a, const VarSet& b) {
    // Merge of two ordered sequences; relative order must agree.
    std::vector<std::string> out;
    size_t i = 0, j = 0;
    const auto& an = a.names_;
    const auto& bn = b.names_;
    while (i < an.size() || j < bn.size()) {
        if (i < an.size() && j < bn.size() && an[i] == bn[j]) {
            out.push_back(an[i]);
            ++i, ++j;
        } else if (i < an.size() &&
                   std::find(bn.begin() + static_cast<long>(j), bn.end(), an[i]) == bn.end()) {
            out.push_back(an[i]);
            ++i;
        } else if (j < bn.size() &&
                   std::find(an.begin() + static_cast<long>(i), an.end(), bn[j]) == an.end()) {
            out.push_back(bn[j]);
            ++j;
        } else if (j < bn.size()) {
            // bn[j] occurs later in a: emit it now only if that does not
            // invert the order required by a.
            if (i < an.size() &&
                std::find(bn.begin() + static_cast<long>(j), bn.end(), an[i]) != bn.end())
                throw Error("VarSet merge conflict: variables '" + an[i] + "' and '" +
                            bn[j] + "' appear in opposite relative order");
            out.push_back(bn[j]);
            ++j;
        } else {
            throw Error("VarSet merge conflict");
        }
    }
    return VarSet(out);
}

Polynomial Polynomial::constant(double c) {
    Polynomial p;
    if (c != 0.0) p.terms_[Mono{}] = c;
    return p;
}

Polynomial Polynomial::variable(const VarSet& vars, int index) {
    if (index < 0 || index >= vars.size()) throw Error("variable index out of range");
    Polynomial p(vars);
    Mono m(static_cast<size_t>(vars.size()), 0);
    m[static_cast<size_t>(index)] = 1;
    p.terms_[m] = 1.0;
    return p;
}

Polynomial Polynomial::variable(const VarSet& vars, std::string_view name) {
    int idx = vars.index(name);
    if (idx < 0) throw Error("unknown variable '" + std::string(name) + "'");
    return variable(vars, idx);
}

int Polynomial::total_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, mono_degree(m));
    return d;
}

int Polynomial::degree_in(int var_index) const {
    int d = 0;
    for (const auto& [m, c] : terms_)
        if (var_index < static_cast<int>(m.size()))
            d = std::max(d, m[static_cast<size_t>(var_index)]);
    return d;
}

int Polynomial::degree_in(std::string_view name) const {
    int idx = vars_.index(name);
    return idx < 0 ? 0 : degree_in(idx);
}

double Polynomial::coeff(const Mono& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::set_coeff(const Mono& m, double c) {
    if (static_cast<int>(m.size()) != vars_.size()) throw Error("exponent length mismatch");
    if (c == 0.0)
        terms_.erase(m);
    else
        terms_[m] = c;
}

Polynomial Polynomial::aligned_to(const VarSet& target) const {
    if (vars_ == target) return *this;
    std::vector<int> map(static_cast<size_t>(vars_.size()));
    for (int i = 0; i < vars_.size(); ++i) {
        int j = target.index(vars_.name(i));
        if (j < 0) throw Error("aligned_to: missing variable '" + vars_.name(i) + "'");
        map[static_cast<size_t>(i)] = j;
    }
    Polynomial out(target);
    for (const auto& [m, c] : terms_) {
        Mono nm(static_cast<size_t>(target.size()), 0);
        for (size_t i = 0; i < m.size(); ++i) nm[static_cast<size_t>(map[i])] = m[i];
        out.terms_[nm] = c;
    }
    return out;
}

Polynomial reordered(const Polynomial& p, const VarSet& target) {
    return p.aligned_to(target);
}

Polynomial Polynomial::operator-() const {
    Polynomial out(vars_);
    for (const auto& [m, c] : terms_) out.terms_[m] = -c;
    return out;
}

Polynomial& Polynomial::prune(double eps) {
    for (auto it = terms_.begin(); it != terms_.end();)
        it = std::abs(it->second) < eps ? terms_.erase(it) : std::next(it);
    return *this;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    VarSet vs = VarSet::merged(a.vars(), b.vars());
    Polynomial aa = a.aligned_to(vs), bb = b.aligned_to(vs);
    Polynomial out(vs);
    for (const auto& [m, c] : aa.terms()) out.set_coeff(m, c);
    for (const auto& [m, c] : bb.terms()) out.set_coeff(m, out.coeff(m) + c);
    return out;
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    VarSet vs = VarSet::merged(a.vars(), b.vars());
    Polynomial aa = a.aligned_to(vs), bb = b.aligned_to(vs);
    Polynomial out(vs);
    for (const auto& [ma, ca] : aa.terms())
        for (const auto& [mb, cb] : bb.terms()) {
            Mono m(ma);
            for (size_t i = 0; i < m.size(); ++i) m[i] += mb[i];
            out.set_coeff(m, out.coeff(m) + ca * cb);
        }
    return out;
}

Polynomial operator*(double s, const Polynomial& p) {
    Polynomial out(p.vars());
    if (s == 0.0) return out;
    for (const auto& [m, c] : p.terms()) out.set_coeff(m, s * c);
    return out;
}

Polynomial operator*(const Polynomial& p, double s) { return s * p; }
Polynomial operator+(const Polynomial& a, double c) { return a + Polynomial::constant(c); }
Polynomial operator-(const Polynomial& a, double c) { return a + Polynomial::constant(-c); }

Polynomial differentiate(const Polynomial& p, std::string_view var) {
    int idx = p.vars().index(var);
    if (idx < 0) throw Error("differentiate: unknown variable '" + std::string(var) + "'");
    Polynomial out(p.vars());
    for (const auto& [m, c] : p.terms()) {
        int e = m[static_cast<size_t>(idx)];
        if (e == 0) continue;
        Mono nm(m);
        nm[static_cast<size_t>(idx)] = e - 1;
        out.set_coeff(nm, out.coeff(nm) + c * e);
    }
    return out;
}

Polynomial substitute(const Polynomial& p,
                      const std::map<std::string, Polynomial>& bindings) {
    // Binding a variable must not re-introduce another eliminated one.
    for (const auto& [target, repl] : bindings)
        for (const auto& [other, r2] : bindings) {
            (void)r2;
            if (other != target && repl.vars().contains(other))
                throw Error("substitute: binding for '" + target +
                            "' reintroduces bound variable '" + other + "'");
        }
    // One shared output VarSet (unbound originals, then replacement variables
    // in first appearance order) so accumulation never merges conflicting
    // variable orders.
    std::vector<std::string> names;
    auto add = [&](const std::string& n) {
        for (const auto& e : names)
            if (e == n) return;
        names.push_back(n);
    };
    for (int i = 0; i < p.vars().size(); ++i)
        if (!bindings.count(p.vars().name(i))) add(p.vars().name(i));
    for (int i = 0; i < p.vars().size(); ++i) {
        auto it = bindings.find(p.vars().name(i));
        if (it != bindings.end())
            for (const auto& n : it->second.vars().names()) add(n);
    }
    VarSet target(names);
    Polynomial out(target);
    for (const auto& [m, c] : p.terms()) {
        Polynomial term = Polynomial::constant(c).aligned_to(target);
        for (size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            const std::string& nm = p.vars().name(static_cast<int>(i));
            auto it = bindings.find(nm);
            Polynomial base = it != bindings.end()
                                  ? it->second.aligned_to(target)
                                  : Polynomial::variable(target, nm);
            for (int k = 0; k < m[i]; ++k) term = term * base;
        }
        out = out + term;
    }
    return out;
}

double evaluate(const Polynomial& p, const std::map<std::string, double>& point) {
    std::vector<double> vals(static_cast<size_t>(p.vars().size()), 0.0);
    std::vector<bool> used(static_cast<size_t>(p.vars().size()), false);
    for (const auto& [m, c] : p.terms()) {
        (void)c;
        for (size_t i = 0; i < m.size(); ++i)
            if (m[i] > 0) used[i] = true;
    }
    for (int i = 0; i < p.vars().size(); ++i) {
        auto it = point.find(p.vars().name(i));
        if (it == point.end()) {
            if (used[static_cast<size_t>(i)])
                throw Error("evaluate: missing value for '" + p.vars().name(i) + "'");
        } else {
            vals[static_cast<size_t>(i)] = it->second;
        }
    }
    double sum = 0.0, comp = 0.0;  // Kahan
    for (const auto& [m, c] : p.terms()) {
        double t = c;
        for (size_t i = 0; i < m.size(); ++i)
            for (int k = 0; k < m[i]; ++k) t *= vals[i];
        double y = t - comp;
        double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return sum;
}

Polynomial integrate(const Polynomial& p, std::string_view var, double lo, double hi) {
    int idx = p.vars().index(var);
    if (idx < 0) return (hi - lo) * p;
    Polynomial out(p.vars());
    for (const auto& [m, c] : p.terms()) {
        int e = m[static_cast<size_t>(idx)];
        Mono nm(m);
        nm[static_cast<size_t>(idx)] = 0;
        double v = c * (std::pow(hi, e + 1) - std::pow(lo, e + 1)) / (e + 1);
        out.set_coeff(nm, out.coeff(nm) + v);
    }
    return out;
}

bool almost_equal(const Polynomial& a, const Polynomial& b, double eps) {
    Polynomial d = a - b;
    d.prune(eps);
    return d.is_zero();
}

double max_abs_coeff(const Polynomial& p) {
    double m = 0.0;
    for (const auto& [mono, c] : p.terms()) {
        (void)mono;
        m = std::max(m, std::abs(c));
    }
    return m;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", c);
        os << buf;
        for (size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            os << " * " << vars_.name(static_cast<int>(i));
            if (m[i] > 1) os << "^" << m[i];
        }
    }
    return os.str();
}

}  // namespace pdebound
