#include "pdebound/jets.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace pdebound {

std::string jet_name(int component, int order, int ncomp) {
    if (ncomp <= 1) return "u" + std::to_string(order);
    return "u" + std::to_string(component + 1) + "_" + std::to_string(order);
}

std::optional<JetVar> parse_jet_name(std::string_view name) {
    if (name.size() < 2 || name[0] != 'u') return std::nullopt;
    size_t us = name.find('_');
    auto all_digits = [](std::string_view s) {
        if (s.empty()) return false;
        for (char c : s)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        return true;
    };
    if (us == std::string_view::npos) {
        std::string_view d = name.substr(1);
        if (!all_digits(d)) return std::nullopt;
        return JetVar{0, std::atoi(std::string(d).c_str())};
    }
    std::string_view comp = name.substr(1, us - 1);
    std::string_view ord = name.substr(us + 1);
    if (!all_digits(comp) || !all_digits(ord)) return std::nullopt;
    return JetVar{std::atoi(std::string(comp).c_str()) - 1,
                  std::atoi(std::string(ord).c_str())};
}

std::vector<std::string> jet_vector(const MultiIndex& alpha, int ncomp) {
    std::vector<std::string> out;
    for (int c = 0; c < ncomp; ++c)
        for (int j = 0; j <= alpha.orders[static_cast<size_t>(c)]; ++j)
            out.push_back(jet_name(c, j, ncomp));
    return out;
}

VarSet jet_varset(const MultiIndex& alpha, int ncomp, bool with_t, bool with_x) {
    std::vector<std::string> names;
    if (with_t) names.push_back("t");
    if (with_x) names.push_back("x");
    for (auto& j : jet_vector(alpha, ncomp)) names.push_back(j);
    return VarSet(names);
}

Polynomial total_x(const Polynomial& p) {
    // Start from the explicit x-dependence, then chain through jets.
    const VarSet& vs = p.vars();
    Polynomial out = vs.contains("x") ? differentiate(p, "x") : Polynomial(vs);
    // The naming format ("u{j}" vs "u{c+1}_{j}") is inferred from the jets
    // actually present so prolongation stays within one convention.
    bool multi = false;
    for (int i = 0; i < vs.size(); ++i)
        if (parse_jet_name(vs.name(i)) && vs.name(i).find('_') != std::string::npos)
            multi = true;
    for (int i = 0; i < vs.size(); ++i) {
        auto jv = parse_jet_name(vs.name(i));
        if (!jv) continue;
        Polynomial dp = differentiate(p, vs.name(i));
        if (dp.is_zero()) continue;
        std::string next = jet_name(jv->component, jv->order + 1, multi ? 2 : 1);
        Polynomial nv;
        if (vs.contains(next)) {
            nv = Polynomial::variable(vs, next);
        } else {
            // Prolong: insert the order+1 jet right after its predecessor.
            std::vector<std::string> names = vs.names();
            names.insert(names.begin() + i + 1, next);
            VarSet ext(names);
            nv = Polynomial::variable(ext, next);
        }
        out = out + dp * nv;
    }
    return out;
}

Polynomial total_x_n(const Polynomial& p, int k) {
    Polynomial out = p;
    for (int i = 0; i < k; ++i) out = total_x(out);
    return out;
}

namespace {

struct NameKey {
    int group;        // 0=t, 1=x, 2=jet, 3=stem+number
    int comp = 0, order = 0;
    std::string stem;
    long num = 0;

    bool operator<(const NameKey& o) const {
        if (group != o.group) return group < o.group;
        if (group == 2)
            return comp != o.comp ? comp < o.comp : order < o.order;
        if (stem != o.stem) return stem < o.stem;
        return num < o.num;
    }
};

NameKey name_key(const std::string& n) {
    if (n == "t") return {0};
    if (n == "x") return {1};
    if (auto jv = parse_jet_name(n)) return {2, jv->component, jv->order, {}, 0};
    NameKey k{3};
    size_t i = n.size();
    while (i > 0 && std::isdigit(static_cast<unsigned char>(n[i - 1]))) --i;
    k.stem = n.substr(0, i);
    k.num = i < n.size() ? std::atol(n.substr(i).c_str()) : -1;
    return k;
}

}  // namespace

bool canonical_name_less(const std::string& a, const std::string& b) {
    return name_key(a) < name_key(b);
}

VarSet canonical_vars(const std::vector<const Polynomial*>& ps,
                      const std::vector<std::string>& extra) {
    std::vector<std::string> names = extra;
    auto add = [&](const std::string& n) {
        for (const auto& e : names)
            if (e == n) return;
        names.push_back(n);
    };
    for (const Polynomial* p : ps)
        for (const auto& n : p->vars().names()) add(n);
    std::sort(names.begin(), names.end(), canonical_name_less);
    return VarSet(names);
}

Polynomial csum(const std::vector<Polynomial>& ps) {
    std::vector<const Polynomial*> ptrs;
    for (const auto& p : ps) ptrs.push_back(&p);
    VarSet vs = canonical_vars(ptrs);
    Polynomial out(vs);
    for (const auto& p : ps) out = out + reordered(p, vs);
    return out;
}

Polynomial cmul(const Polynomial& a, const Polynomial& b) {
    VarSet vs = canonical_vars({&a, &b});
    return reordered(a, vs) * reordered(b, vs);
}

Polynomial compacted(const Polynomial& p) {
    std::vector<std::string> used;
    for (const auto& [m, c] : p.terms()) {
        (void)c;
        for (size_t i = 0; i < m.size(); ++i)
            if (m[i] > 0) {
                const std::string& n = p.vars().name(static_cast<int>(i));
                if (std::find(used.begin(), used.end(), n) == used.end()) used.push_back(n);
            }
    }
    std::sort(used.begin(), used.end(), canonical_name_less);
    VarSet vs(used);
    Polynomial out(vs);
    for (const auto& [m, c] : p.terms()) {
        Mono nm(static_cast<size_t>(vs.size()), 0);
        for (size_t i = 0; i < m.size(); ++i)
            if (m[i] > 0) nm[(size_t)vs.index(p.vars().name(static_cast<int>(i)))] = m[i];
        out.set_coeff(nm, c);
    }
    return out;
}

}  // namespace pdebound
